#include "tbctl/integrate.hpp"
#include "tbctl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tbctl {

void TimeGrid::validate() const {
    if (!std::isfinite(t0) || !std::isfinite(t1) || t1 <= t0) {
        throw InvalidInputError("TimeGrid: require finite t0 < t1");
    }
    if (n_steps < 1) throw InvalidInputError("TimeGrid: n_steps must be >= 1");
}

Trajectory::Trajectory(const TimeGrid& grid, int dim) : grid_(grid), dim_(dim) {
    grid_.validate();
    if (dim < 1) throw InvalidInputError("Trajectory: dimension must be >= 1");
    data_.assign(static_cast<size_t>(grid_.n_nodes()) * dim_, 0.0);
}

void Trajectory::set_node(int i, std::span<const double> values) {
    if (static_cast<int>(values.size()) != dim_) {
        throw InvalidInputError("Trajectory::set_node: dimension mismatch");
    }
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<size_t>(i) * dim_);
}

void Trajectory::sample_linear(double t, std::span<double> out) const {
    if (static_cast<int>(out.size()) != dim_) {
        throw InvalidInputError("Trajectory::sample_linear: output dimension mismatch");
    }
    const double dt = grid_.dt();
    const double s = (t - grid_.t0) / dt;
    const double eps = 1e-9;
    if (s < -eps || s > grid_.n_steps + eps) {
        throw InvalidInputError("Trajectory::sample_linear: t outside the grid");
    }
    int k = static_cast<int>(std::floor(s));
    k = std::clamp(k, 0, grid_.n_steps - 1);
    const double frac = s - k;
    if (frac <= eps) {
        std::copy_n(data_.begin() + static_cast<size_t>(k) * dim_, dim_, out.begin());
        return;
    }
    if (frac >= 1.0 - eps) {
        std::copy_n(data_.begin() + static_cast<size_t>(k + 1) * dim_, dim_, out.begin());
        return;
    }
    const double* lo = data_.data() + static_cast<size_t>(k) * dim_;
    const double* hi = lo + dim_;
    for (int c = 0; c < dim_; ++c) out[c] = lo[c] + frac * (hi[c] - lo[c]);
}

bool Trajectory::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Trajectory::min_value() const {
    return *std::min_element(data_.begin(), data_.end());
}

namespace {

bool finite_all(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// One classical RK4 step of size h from (t, y) into y_next.
void rk4_step(const VectorField& f, double t, double h, std::span<const double> y,
              std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp, std::span<double> y_next) {
    const size_t n = y.size();
    f(t, y, k1);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    f(t + 0.5 * h, tmp, k2);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    f(t + 0.5 * h, tmp, k3);
    for (size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    f(t + h, tmp, k4);
    for (size_t i = 0; i < n; ++i) {
        y_next[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

} // namespace

Trajectory rk4_forward(const VectorField& field, std::span<const double> y0, const TimeGrid& grid) {
    grid.validate();
    if (!finite_all(y0)) throw InvalidInputError("rk4_forward: non-finite initial value");
    const int dim = static_cast<int>(y0.size());
    Trajectory traj(grid, dim);
    traj.set_node(0, y0);

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), next(dim);
    const double h = grid.dt();
    for (int step = 0; step < grid.n_steps; ++step) {
        const double t = grid.time_at(step);
        rk4_step(field, t, h, traj.node(step), k1, k2, k3, k4, tmp, next);
        if (!finite_all(next)) throw DivergenceError("rk4_forward: non-finite value", step);
        traj.set_node(step + 1, next);
    }
    return traj;
}

Trajectory rk4_backward(const VectorField& field, std::span<const double> yT, const TimeGrid& grid,
                        std::initializer_list<const Trajectory*> frozen) {
    grid.validate();
    if (!finite_all(yT)) throw InvalidInputError("rk4_backward: non-finite terminal value");
    for (const Trajectory* f : frozen) {
        if (f == nullptr || !(f->grid() == grid)) {
            throw InvalidInputError("rk4_backward: frozen trajectory grid mismatch");
        }
    }
    const int dim = static_cast<int>(yT.size());
    Trajectory traj(grid, dim);
    traj.set_node(grid.n_steps, yT);

    std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), next(dim);
    const double h = -grid.dt();
    for (int node = grid.n_steps; node > 0; --node) {
        const double t = grid.time_at(node);
        rk4_step(field, t, h, traj.node(node), k1, k2, k3, k4, tmp, next);
        if (!finite_all(next)) throw DivergenceError("rk4_backward: non-finite value", node - 1);
        traj.set_node(node - 1, next);
    }
    return traj;
}

} // namespace tbctl
