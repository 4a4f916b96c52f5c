#include "tbctl/model.hpp"
#include "tbctl/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace tbctl {

bool StateVec::all_finite() const {
    return std::isfinite(U) && std::isfinite(Tl) && std::isfinite(Td) &&
           std::isfinite(Tt) && std::isfinite(R);
}

bool StateVec::nonnegative(double slack) const {
    return U >= -slack && Tl >= -slack && Td >= -slack && Tt >= -slack && R >= -slack;
}

StateVec StateVec::from_array(std::span<const double> a) {
    if (a.size() != 5) throw InvalidInputError("StateVec::from_array: expected 5 components");
    return {a[0], a[1], a[2], a[3], a[4]};
}

bool ModelParams::valid() const {
    const double fields[] = {lambda1, lambda2, lambda3, lambda4, lambda5, lambda6, lambda7,
                             b, sigma, mu1, mu2, mu3, mu4, mu5};
    for (double v : fields) {
        if (!std::isfinite(v) || v < 0.0) return false;
    }
    return true;
}

void ModelParams::require_valid() const {
    if (!valid()) throw InvalidInputError("ModelParams: all rates must be finite and nonnegative");
}

double ModelParams::omega() const {
    return std::min({mu3 + sigma, mu1, mu2, mu4, mu5});
}

ModelParams ModelParams::baseline() {
    ModelParams p;
    p.lambda1 = 0.083;
    p.lambda2 = 0.0053;
    p.lambda3 = 0.2;
    p.lambda4 = 0.241;
    p.lambda5 = 0.10;
    p.lambda6 = 0.0891;
    p.lambda7 = 0.0003;
    p.b = 304.17;
    p.sigma = 0.013;
    p.mu1 = 0.0008;
    p.mu2 = 0.001;
    p.mu3 = 0.001;
    p.mu4 = 0.001;
    p.mu5 = 0.0008;
    return p;
}

StateVec base_rhs(const ModelParams& p, const StateVec& s) {
    p.require_valid();
    if (!s.all_finite()) throw InvalidInputError("base_rhs: non-finite state");
    StateVec d;
    d.U = p.b - (p.lambda1 + p.mu1) * s.U - p.lambda2 * s.Tl * s.U;
    d.Tl = p.lambda2 * s.Tl * s.U - (p.lambda3 + p.mu2) * s.Tl;
    d.Td = p.lambda1 * s.U + p.lambda3 * s.Tl - (p.lambda4 + p.mu3 + p.sigma) * s.Td +
           p.lambda6 * s.Tt + p.lambda7 * s.R;
    d.Tt = p.lambda4 * s.Td - (p.lambda5 + p.lambda6 + p.mu4) * s.Tt;
    d.R = p.lambda5 * s.Tt - (p.lambda7 + p.mu5) * s.R;
    return d;
}

std::array<std::array<double, 5>, 5> base_rhs_jacobian(const ModelParams& p, const StateVec& s) {
    std::array<std::array<double, 5>, 5> j{};
    j[0] = {-(p.lambda1 + p.mu1) - p.lambda2 * s.Tl, -p.lambda2 * s.U, 0.0, 0.0, 0.0};
    j[1] = {p.lambda2 * s.Tl, p.lambda2 * s.U - (p.lambda3 + p.mu2), 0.0, 0.0, 0.0};
    j[2] = {p.lambda1, p.lambda3, -(p.lambda4 + p.mu3 + p.sigma), p.lambda6, p.lambda7};
    j[3] = {0.0, 0.0, p.lambda4, -(p.lambda5 + p.lambda6 + p.mu4), 0.0};
    j[4] = {0.0, 0.0, 0.0, p.lambda5, -(p.lambda7 + p.mu5)};
    return j;
}

double r0_closed_form(const ModelParams& p) {
    p.require_valid();
    const double denom = (p.lambda1 + p.mu1) * (p.lambda3 + p.mu2);
    if (denom <= 0.0) throw DomainError("r0_closed_form: (lambda1+mu1)(lambda3+mu2) must be positive");
    return p.lambda2 * p.b / denom;
}

double r0_next_generation(const ModelParams& p) {
    p.require_valid();
    if (p.lambda1 + p.mu1 <= 0.0) throw DomainError("r0_next_generation: lambda1+mu1 must be positive");
    const double u0 = p.b / (p.lambda1 + p.mu1);

    // New-infection Jacobian over (Tl, Td, Tt) at the disease-free point.
    Eigen::Matrix3d f = Eigen::Matrix3d::Zero();
    f(0, 0) = p.lambda2 * u0;

    // Transfer Jacobian with outflows positive so that rho(F V^-1) >= 0.
    Eigen::Matrix3d v;
    v << p.lambda3 + p.mu2, 0.0, 0.0,
        -p.lambda3, p.lambda4 + p.mu3 + p.sigma, -p.lambda6,
        0.0, -p.lambda4, p.lambda5 + p.lambda6 + p.mu4;

    Eigen::FullPivLU<Eigen::Matrix3d> lu(v);
    if (!lu.isInvertible()) throw DomainError("r0_next_generation: singular transfer matrix");
    const Eigen::Matrix3d ngm = f * lu.inverse();

    Eigen::EigenSolver<Eigen::Matrix3d> es(ngm);
    double radius = 0.0;
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
        radius = std::max(radius, std::abs(es.eigenvalues()[i]));
    }
    return radius;
}

namespace {

double residual_norm_at(const ModelParams& p, const StateVec& s) {
    const StateVec d = base_rhs(p, s);
    const auto a = d.to_array();
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

} // namespace

EquilibriumPoint disease_free_equilibrium(const ModelParams& p) {
    p.require_valid();
    if (p.lambda1 + p.mu1 <= 0.0) throw DomainError("disease_free_equilibrium: lambda1+mu1 must be positive");
    EquilibriumPoint e;
    e.state = {p.b / (p.lambda1 + p.mu1), 0.0, 0.0, 0.0, 0.0};
    e.residual_norm = residual_norm_at(p, e.state);
    e.is_valid_equilibrium = e.residual_norm <= kEquilibriumTol;
    return e;
}

StateVec endemic_seed(const ModelParams& p) {
    p.require_valid();
    if (p.lambda2 <= 0.0) throw DomainError("endemic_seed: lambda2 must be positive");
    const double a = p.lambda3 + p.mu2;
    const double bb = p.lambda5 + p.lambda6 + p.mu4;
    const double c = p.lambda4 + p.mu3 + p.sigma;
    const double d = p.b * p.lambda2 - (p.lambda1 + p.mu1) * a;

    StateVec s;
    s.U = a / p.lambda2;
    s.Tl = d / (a * p.lambda2);
    const double x = -(p.lambda1 * a / p.lambda2 + p.lambda3 * d / (p.lambda2 * a));
    const double y = p.lambda7 * p.lambda5 / (p.lambda7 + p.mu5) - bb * c / p.lambda4 + p.lambda6;
    s.Tt = x / y;
    s.Td = bb * s.Tt / p.lambda4;
    s.R = p.lambda5 * s.Tt / (p.lambda7 + p.mu5);
    if (!s.all_finite()) throw DomainError("endemic_seed: closed forms are not finite for these rates");
    return s;
}

EquilibriumPoint endemic_equilibrium(const ModelParams& p) {
    constexpr int kMaxIterations = 200;
    StateVec s = endemic_seed(p);
    double res = residual_norm_at(p, s);

    for (int it = 0; it < kMaxIterations && res > kEquilibriumTol; ++it) {
        const StateVec f = base_rhs(p, s);
        const auto jac = base_rhs_jacobian(p, s);
        Eigen::Matrix<double, 5, 5> j;
        Eigen::Matrix<double, 5, 1> rhs;
        const auto fa = f.to_array();
        for (int r = 0; r < 5; ++r) {
            rhs(r) = -fa[r];
            for (int c = 0; c < 5; ++c) j(r, c) = jac[r][c];
        }
        const Eigen::Matrix<double, 5, 1> delta = j.fullPivLu().solve(rhs);

        // Damped update: halve the step until the residual actually drops.
        double step = 1.0;
        StateVec best = s;
        double best_res = res;
        for (int h = 0; h < 40; ++h) {
            StateVec trial = s;
            trial.U += step * delta(0);
            trial.Tl += step * delta(1);
            trial.Td += step * delta(2);
            trial.Tt += step * delta(3);
            trial.R += step * delta(4);
            if (trial.all_finite()) {
                const double r = residual_norm_at(p, trial);
                if (r < best_res) {
                    best = trial;
                    best_res = r;
                    break;
                }
            }
            step *= 0.5;
        }
        if (best_res >= res) break; // no progress possible
        s = best;
        res = best_res;
    }

    if (res > kEquilibriumTol) {
        const auto a = s.to_array();
        throw ConvergenceError("endemic_equilibrium: Newton refinement did not reach tolerance",
                               res, std::vector<double>(a.begin(), a.end()));
    }
    EquilibriumPoint e;
    e.state = s;
    e.residual_norm = res;
    e.is_valid_equilibrium = true;
    return e;
}

double feasible_bound(const ModelParams& p) {
    p.require_valid();
    const double w = p.omega();
    if (w <= 0.0) throw DomainError("feasible_bound: omega must be positive");
    return p.b / w;
}

} // namespace tbctl
