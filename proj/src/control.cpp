#include "tbctl/control.hpp"
#include "tbctl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tbctl {

ControlVec ControlVec::from_array(std::span<const double> a) {
    if (a.size() != 9) throw InvalidInputError("ControlVec::from_array: expected 9 components");
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8]};
}

AdjointVec AdjointVec::from_array(std::span<const double> a) {
    if (a.size() != 5) throw InvalidInputError("AdjointVec::from_array: expected 5 components");
    return {a[0], a[1], a[2], a[3], a[4]};
}

bool ScenarioMask::component_active(int index) const {
    if (index < 3) return tpt;
    if (index < 6) return mn;
    return d;
}

std::string ScenarioMask::token() const {
    if (!any()) return "none";
    std::string t;
    if (tpt) t += "tpt";
    if (mn) t += (t.empty() ? "" : "+") + std::string("mn");
    if (d) t += (t.empty() ? "" : "+") + std::string("d");
    return t;
}

std::string ScenarioMask::label() const {
    const int active = int(tpt) + int(mn) + int(d);
    if (active == 0) return "None";
    std::vector<std::string> parts;
    if (tpt) parts.push_back("TPT");
    if (mn) parts.push_back("MN");
    if (d) parts.push_back("D");
    if (active == 1) return parts[0];
    if (active == 2) return parts[0] + " and " + parts[1];
    return parts[0] + ", " + parts[1] + ", and " + parts[2];
}

ScenarioMask ScenarioMask::parse(const std::string& token) {
    ScenarioMask m;
    if (token == "none" || token.empty()) return m;
    if (token == "all") return {true, true, true};
    size_t pos = 0;
    while (pos < token.size()) {
        size_t next = token.find('+', pos);
        if (next == std::string::npos) next = token.size();
        const std::string part = token.substr(pos, next - pos);
        if (part == "tpt") m.tpt = true;
        else if (part == "mn") m.mn = true;
        else if (part == "d") m.d = true;
        else throw InvalidInputError("ScenarioMask: unknown intervention '" + part + "' in '" + token + "'");
        pos = next + 1;
    }
    return m;
}

std::array<ScenarioMask, 8> ScenarioMask::all() {
    return {{{false, false, false},
             {true, false, false},
             {false, true, false},
             {false, false, true},
             {true, true, false},
             {true, false, true},
             {false, true, true},
             {true, true, true}}};
}

ControlBounds ControlBounds::uniform(double bound) {
    ControlBounds b;
    b.upper.fill(bound);
    b.validate();
    return b;
}

ControlBounds ControlBounds::masked(const ScenarioMask& mask) const {
    ControlBounds b = *this;
    for (int i = 0; i < 9; ++i) {
        if (!mask.component_active(i)) b.upper[i] = 0.0;
    }
    return b;
}

void ControlBounds::validate() const {
    for (double v : upper) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInputError("ControlBounds: bounds must be finite and nonnegative");
        }
    }
}

void CostWeights::validate() const {
    if (!(A1 > 0.0) || !(A2 > 0.0) || !(A3 > 0.0) || !std::isfinite(A1) || !std::isfinite(A2) ||
        !std::isfinite(A3)) {
        throw InvalidInputError("CostWeights: A1, A2, A3 must be positive and finite");
    }
}

void FbsConfig::validate() const {
    if (!(rel_tol >= 0.0) || !(abs_tol >= 0.0) || rel_tol + abs_tol <= 0.0) {
        throw InvalidInputError("FbsConfig: tolerances must be nonnegative and not both zero");
    }
    if (!(relaxation > 0.0) || relaxation > 1.0) {
        throw InvalidInputError("FbsConfig: relaxation must lie in (0, 1]");
    }
    if (max_iterations < 1) throw InvalidInputError("FbsConfig: max_iterations must be >= 1");
}

StateVec controlled_rhs(const ModelParams& p, const ControlVec& u, const StateVec& s) {
    p.require_valid();
    if (!s.all_finite()) throw InvalidInputError("controlled_rhs: non-finite state");
    for (double v : u.to_array()) {
        if (!std::isfinite(v) || v < 0.0) {
            throw InvalidInputError("controlled_rhs: controls must be finite and nonnegative");
        }
    }
    StateVec d;
    d.U = p.b - (p.lambda1 + p.mu1) * s.U - p.lambda2 * s.Tl * s.U;
    d.Tl = p.lambda2 * s.Tl * s.U - (p.lambda3 + u.tl_outflow() + p.mu2) * s.Tl;
    d.Td = p.lambda1 * s.U + p.lambda3 * s.Tl -
           (p.lambda4 + u.td_outflow() + p.mu3 + p.sigma) * s.Td + p.lambda6 * s.Tt +
           p.lambda7 * s.R;
    d.Tt = p.lambda4 * s.Td - (p.lambda5 + p.lambda6 + u.tt_outflow() + p.mu4) * s.Tt;
    d.R = p.lambda5 * s.Tt - (p.lambda7 + p.mu5) * s.R;
    return d;
}

double running_cost(const StateVec& s, const ControlVec& u, const CostWeights& w,
                    const ScenarioMask& mask) {
    double cost = s.Tl + s.Td + s.Tt;
    if (mask.tpt) cost += w.A1 * (u.mu1T * u.mu1T + u.mu2T * u.mu2T + u.mu3T * u.mu3T);
    if (mask.mn) cost += w.A2 * (u.mu1M * u.mu1M + u.mu2M * u.mu2M + u.mu3M * u.mu3M);
    if (mask.d) cost += w.A3 * (u.mu1D * u.mu1D + u.mu2D * u.mu2D + u.mu3D * u.mu3D);
    return cost;
}

double cost_functional(const Trajectory& states, const Trajectory& controls, const CostWeights& w,
                       const ScenarioMask& mask) {
    if (!(states.grid() == controls.grid())) {
        throw InvalidInputError("cost_functional: state and control grids differ");
    }
    if (states.dim() != 5 || controls.dim() != 9) {
        throw InvalidInputError("cost_functional: expected 5 state and 9 control components");
    }
    w.validate();
    const int n = states.grid().n_nodes();
    const double dt = states.grid().dt();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const StateVec s = StateVec::from_array(states.node(i));
        const ControlVec u = ControlVec::from_array(controls.node(i));
        const double l = running_cost(s, u, w, mask);
        sum += (i == 0 || i == n - 1) ? 0.5 * l : l;
    }
    return sum * dt;
}

double hamiltonian(const StateVec& s, const AdjointVec& a, const ControlVec& u,
                   const ModelParams& p, const CostWeights& w) {
    // Full running cost: the Hamiltonian is scenario independent, masked
    // components simply carry zero controls.
    const double l = running_cost(s, u, w, {true, true, true});
    const StateVec d = controlled_rhs(p, u, s);
    return l + a.lamU * d.U + a.lamTl * d.Tl + a.lamTd * d.Td + a.lamTt * d.Tt + a.lamR * d.R;
}

AdjointVec adjoint_rhs(const ModelParams& p, const ControlVec& u, const StateVec& s,
                       const AdjointVec& a) {
    AdjointVec d;
    d.lamU = a.lamU * (p.lambda1 + p.mu1 + p.lambda2 * s.Tl) - a.lamTl * p.lambda2 * s.Tl -
             a.lamTd * p.lambda1;
    d.lamTl = -(1.0 - a.lamU * p.lambda2 * s.U + a.lamTl * p.lambda2 * s.U -
                a.lamTl * (p.lambda3 + u.tl_outflow() + p.mu2) + a.lamTd * p.lambda3);
    d.lamTd = -(1.0 - a.lamTd * (p.lambda4 + u.td_outflow() + p.mu3 + p.sigma) +
                a.lamTt * p.lambda4);
    d.lamTt = -(1.0 + a.lamTd * p.lambda6 -
                a.lamTt * (p.lambda5 + p.lambda6 + u.tt_outflow() + p.mu4) + a.lamR * p.lambda5);
    d.lamR = a.lamR * (p.lambda7 + p.mu5) - a.lamTd * p.lambda7;
    return d;
}

ControlVec optimal_control_update(const StateVec& s, const AdjointVec& a, const CostWeights& w,
                                  const ControlBounds& bounds, const ScenarioMask& mask) {
    const ControlBounds eff = bounds.masked(mask);
    auto clamp = [](double v, double hi) { return std::min(std::max(v, 0.0), hi); };
    ControlVec u;
    u.mu1T = clamp(a.lamTl * s.Tl / (2.0 * w.A1), eff.upper[0]);
    u.mu2T = clamp(a.lamTd * s.Td / (2.0 * w.A1), eff.upper[1]);
    u.mu3T = clamp(a.lamTt * s.Tt / (2.0 * w.A1), eff.upper[2]);
    u.mu1M = clamp(a.lamTl * s.Tl / (2.0 * w.A2), eff.upper[3]);
    u.mu2M = clamp(a.lamTd * s.Td / (2.0 * w.A2), eff.upper[4]);
    u.mu3M = clamp(a.lamTt * s.Tt / (2.0 * w.A2), eff.upper[5]);
    u.mu1D = clamp(a.lamTl * s.Tl / (2.0 * w.A3), eff.upper[6]);
    u.mu2D = clamp(a.lamTd * s.Td / (2.0 * w.A3), eff.upper[7]);
    u.mu3D = clamp(a.lamTt * s.Tt / (2.0 * w.A3), eff.upper[8]);
    return u;
}

namespace {

Trajectory forward_states(const ModelParams& p, const Trajectory& controls, const StateVec& y0,
                          const TimeGrid& grid) {
    std::array<double, 9> u_buf{};
    const VectorField field = [&](double t, std::span<const double> y, std::span<double> dydt) {
        controls.sample_linear(t, u_buf);
        const StateVec d = controlled_rhs(p, ControlVec::from_array(u_buf), StateVec::from_array(y));
        const auto da = d.to_array();
        std::copy(da.begin(), da.end(), dydt.begin());
    };
    return rk4_forward(field, y0.to_array(), grid);
}

Trajectory backward_adjoints(const ModelParams& p, const Trajectory& states,
                             const Trajectory& controls, const TimeGrid& grid) {
    std::array<double, 9> u_buf{};
    std::array<double, 5> x_buf{};
    const VectorField field = [&](double t, std::span<const double> y, std::span<double> dydt) {
        controls.sample_linear(t, u_buf);
        states.sample_linear(t, x_buf);
        const AdjointVec d = adjoint_rhs(p, ControlVec::from_array(u_buf),
                                         StateVec::from_array(x_buf), AdjointVec::from_array(y));
        const auto da = d.to_array();
        std::copy(da.begin(), da.end(), dydt.begin());
    };
    const std::array<double, 5> terminal{}; // transversality: all zero at t1
    return rk4_backward(field, terminal, grid, {&states, &controls});
}

} // namespace

OcSolution forward_backward_sweep(const ModelParams& p, const CostWeights& w,
                                  const ControlBounds& bounds, const ScenarioMask& mask,
                                  const TimeGrid& grid, const StateVec& y0,
                                  const FbsConfig& config) {
    grid.validate();
    config.validate();
    w.validate();
    bounds.validate();
    p.require_valid();
    if (!y0.all_finite() || !y0.nonnegative()) {
        throw InvalidInputError("forward_backward_sweep: initial state must be finite and nonnegative");
    }

    const int n = grid.n_nodes();
    Trajectory controls(grid, 9); // initial guess: all controls zero
    OcSolution sol{Trajectory(grid, 5), Trajectory(grid, 5), Trajectory(grid, 9)};

    for (int it = 1; it <= config.max_iterations; ++it) {
        Trajectory states = forward_states(p, controls, y0, grid);
        Trajectory adjoints = backward_adjoints(p, states, controls, grid);

        Trajectory updated(grid, 9);
        for (int i = 0; i < n; ++i) {
            const ControlVec u = optimal_control_update(StateVec::from_array(states.node(i)),
                                                        AdjointVec::from_array(adjoints.node(i)),
                                                        w, bounds, mask);
            updated.set_node(i, u.to_array());
        }

        // Per-component l1 change between the raw update and the controls
        // that produced this sweep.
        bool converged = true;
        for (int c = 0; c < 9 && converged; ++c) {
            double diff = 0.0;
            double norm = 0.0;
            for (int i = 0; i < n; ++i) {
                diff += std::abs(updated(i, c) - controls(i, c));
                norm += std::abs(updated(i, c));
            }
            converged = diff <= config.rel_tol * norm + config.abs_tol;
        }

        sol.iterations = it;
        sol.objective_history.push_back(cost_functional(states, updated, w, mask));
        if (converged || it == config.max_iterations) {
            sol.states = std::move(states);
            sol.adjoints = std::move(adjoints);
            sol.controls = std::move(updated);
            sol.converged = converged;
            break;
        }
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < 9; ++c) {
                controls(i, c) = config.relaxation * updated(i, c) +
                                 (1.0 - config.relaxation) * controls(i, c);
            }
        }
    }

    sol.objective = cost_functional(sol.states, sol.controls, w, mask);
    return sol;
}

Trajectory aggregate_controls(const Trajectory& controls) {
    if (controls.dim() != 9) throw InvalidInputError("aggregate_controls: expected 9 components");
    Trajectory agg(controls.grid(), 4);
    for (int i = 0; i < controls.grid().n_nodes(); ++i) {
        const ControlVec u = ControlVec::from_array(controls.node(i));
        const double mu_t = u.mu1T + u.mu2T + u.mu3T;
        const double mu_m = u.mu1M + u.mu2M + u.mu3M;
        const double mu_d = u.mu1D + u.mu2D + u.mu3D;
        const std::array<double, 4> row = {mu_t, mu_m, mu_d, mu_t + mu_m + mu_d};
        agg.set_node(i, row);
    }
    return agg;
}

} // namespace tbctl
