#ifndef TBCTL_INTEGRATE_HPP
#define TBCTL_INTEGRATE_HPP

#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace tbctl {

/// Uniform time grid shared by forward state and backward adjoint passes.
struct TimeGrid {
    double t0 = 0.0;
    double t1 = 0.0;
    int n_steps = 0;

    double dt() const { return (t1 - t0) / n_steps; }
    int n_nodes() const { return n_steps + 1; }
    double time_at(int node) const { return t0 + node * dt(); }

    void validate() const; // throws InvalidInputError
    bool operator==(const TimeGrid&) const = default;
};

/// Per-node values of fixed dimension on a TimeGrid (5 for states and
/// adjoints, 9 for controls). Stored node-major.
class Trajectory {
public:
    Trajectory(const TimeGrid& grid, int dim);

    const TimeGrid& grid() const { return grid_; }
    int dim() const { return dim_; }

    double operator()(int node, int component) const { return data_[node * dim_ + component]; }
    double& operator()(int node, int component) { return data_[node * dim_ + component]; }
    std::span<const double> node(int i) const { return {data_.data() + i * dim_, static_cast<size_t>(dim_)}; }
    void set_node(int i, std::span<const double> values);

    /// Linear interpolation between adjacent nodes; exact at the nodes.
    /// Throws InvalidInputError when t lies outside the grid (no extrapolation).
    void sample_linear(double t, std::span<double> out) const;

    bool all_finite() const;
    double min_value() const;
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    TimeGrid grid_;
    int dim_;
    std::vector<double> data_;
};

using VectorField = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Classical fourth-order Runge-Kutta, forward in time. Throws DivergenceError
/// with the offending step index when a non-finite value appears.
Trajectory rk4_forward(const VectorField& field, std::span<const double> y0, const TimeGrid& grid);

/// Classical RK4 integrated from t1 down to t0 with step -dt. The result is
/// stored in forward time order; the node at t1 equals yT exactly. Frozen
/// trajectories consumed by the field must live on the same grid.
Trajectory rk4_backward(const VectorField& field, std::span<const double> yT, const TimeGrid& grid,
                        std::initializer_list<const Trajectory*> frozen = {});

} // namespace tbctl

#endif
