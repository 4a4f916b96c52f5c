#include "tbctl/econ.hpp"
#include "tbctl/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tbctl {

namespace {

double infected_total(std::span<const double> node) {
    return node[1] + node[2] + node[3]; // Tl + Td + Tt
}

/// Trapezoid integral of f(node) over [t0, t_end]; the last cell may be
/// fractional, in which case the integrand is interpolated linearly.
template <typename F>
double trapezoid_until(const Trajectory& traj, double t_end, F&& f) {
    const TimeGrid& g = traj.grid();
    const double dt = g.dt();
    const double span = t_end - g.t0;
    if (span <= 0.0) throw InvalidInputError("trapezoid_until: empty window");
    if (t_end > g.t1 + 1e-9 * (g.t1 - g.t0)) {
        throw InvalidInputError("trapezoid_until: window exceeds the trajectory");
    }
    const double s = std::min(span / dt, static_cast<double>(g.n_steps));
    const int whole = static_cast<int>(std::floor(s + 1e-12));
    double sum = 0.0;
    double prev = f(traj.node(0));
    for (int i = 1; i <= whole; ++i) {
        const double cur = f(traj.node(i));
        sum += 0.5 * (prev + cur) * dt;
        prev = cur;
    }
    const double frac = s - whole;
    if (frac > 1e-12) {
        const double next = f(traj.node(whole + 1));
        const double at_end = prev + frac * (next - prev);
        sum += 0.5 * (prev + at_end) * frac * dt;
    }
    return sum;
}

template <typename F>
double window_average(const Trajectory& traj, double t_begin, double t_end, F&& f) {
    const double upto_end = trapezoid_until(traj, t_end, f);
    const double upto_begin =
        t_begin > traj.grid().t0 ? trapezoid_until(traj, t_begin, f) : 0.0;
    return (upto_end - upto_begin) / (t_end - t_begin);
}

void require_states(const Trajectory& t) {
    if (t.dim() != 5) throw InvalidInputError("expected a 5-component state trajectory");
}

} // namespace

std::vector<double> pseudo_prevalence(const Trajectory& states, double n0) {
    require_states(states);
    if (!(n0 > 0.0) || !std::isfinite(n0)) throw DomainError("pseudo_prevalence: n0 must be positive");
    std::vector<double> out(states.grid().n_nodes());
    for (int i = 0; i < states.grid().n_nodes(); ++i) {
        out[i] = infected_total(states.node(i)) / n0;
    }
    return out;
}

std::vector<double> pseudo_prevalence_yearly(const Trajectory& states, double n0) {
    const auto per_node = pseudo_prevalence(states, n0);
    const TimeGrid& g = states.grid();
    std::vector<double> out;
    const int years = static_cast<int>(std::floor((g.t1 - g.t0) / kMonthsPerYear + 1e-9));
    for (int y = 1; y <= years; ++y) {
        const double t = g.t0 + y * kMonthsPerYear;
        std::array<double, 5> buf{};
        states.sample_linear(t, buf);
        out.push_back((buf[1] + buf[2] + buf[3]) / n0);
    }
    return out;
}

double incidence(const Trajectory& states, const ModelParams& p, double n0, int year_index,
                 double days_per_year) {
    require_states(states);
    p.require_valid();
    if (!(n0 > 0.0)) throw DomainError("incidence: n0 must be positive");
    if (!(days_per_year > 0.0)) throw DomainError("incidence: day count must be positive");
    if (year_index < 0) throw InvalidInputError("incidence: year index must be nonnegative");
    const TimeGrid& g = states.grid();
    const double t_begin = g.t0 + year_index * kMonthsPerYear;
    const double t_end = t_begin + kMonthsPerYear;
    if (t_end > g.t1 + 1e-9 * (g.t1 - g.t0)) {
        throw InvalidInputError("incidence: trajectory does not span the requested year");
    }

    // Gross inflows into Tl, Td, Tt (persons per month).
    const auto inflow = [&p](std::span<const double> s) {
        const double into_tl = p.lambda2 * s[1] * s[0];
        const double into_td = p.lambda1 * s[0] + p.lambda3 * s[1] + p.lambda6 * s[3] + p.lambda7 * s[4];
        const double into_tt = p.lambda4 * s[2];
        return into_tl + into_td + into_tt;
    };
    const double new_cases = window_average(states, t_begin, t_end, inflow) * kMonthsPerYear;
    return new_cases / n0 * 1e5 / days_per_year;
}

double averted_cases(const Trajectory& baseline, const Trajectory& scenario) {
    return averted_cases_until(baseline, scenario, baseline.grid().t1);
}

double averted_cases_until(const Trajectory& baseline, const Trajectory& scenario, double t_end) {
    require_states(baseline);
    require_states(scenario);
    if (!(baseline.grid() == scenario.grid())) {
        throw InvalidInputError("averted_cases: trajectories must share one grid");
    }
    const double base = window_average(baseline, baseline.grid().t0, t_end, infected_total);
    const double scen = window_average(scenario, scenario.grid().t0, t_end, infected_total);
    return base - scen;
}

double recovered_final_year(const Trajectory& states) {
    require_states(states);
    const TimeGrid& g = states.grid();
    const double t_begin = g.t1 - kMonthsPerYear;
    if (t_begin < g.t0 - 1e-9) {
        throw InvalidInputError("recovered_final_year: trajectory shorter than one year");
    }
    return window_average(states, std::max(t_begin, g.t0), g.t1,
                          [](std::span<const double> s) { return s[4]; });
}

std::vector<std::array<double, 5>> yearly_compartment_averages(const Trajectory& states) {
    require_states(states);
    const TimeGrid& g = states.grid();
    const int years = static_cast<int>(std::floor((g.t1 - g.t0) / kMonthsPerYear + 1e-9));
    std::vector<std::array<double, 5>> rows;
    for (int y = 0; y < years; ++y) {
        const double a = g.t0 + y * kMonthsPerYear;
        const double b = a + kMonthsPerYear;
        std::array<double, 5> row{};
        for (int c = 0; c < 5; ++c) {
            row[c] = window_average(states, a, b, [c](std::span<const double> s) { return s[c]; });
        }
        rows.push_back(row);
    }
    return rows;
}

double acer(const InterventionOutcome& o) {
    if (!(o.averted_cases > 0.0)) {
        throw UndefinedRatioError("acer: averted cases must be positive for '" + o.scenario + "'");
    }
    return o.total_cost / o.averted_cases;
}

double air(const InterventionOutcome& o) {
    if (!(o.recovered_cases > 0.0)) {
        throw UndefinedRatioError("air: recovered cases must be positive for '" + o.scenario + "'");
    }
    return o.averted_cases / o.recovered_cases;
}

namespace {

std::vector<InterventionOutcome> sorted_by_averted(std::vector<InterventionOutcome> outcomes) {
    if (outcomes.empty()) throw InvalidInputError("icer_chain: need at least one outcome");
    std::sort(outcomes.begin(), outcomes.end(),
              [](const auto& a, const auto& b) { return a.averted_cases < b.averted_cases; });
    for (size_t i = 1; i < outcomes.size(); ++i) {
        if (outcomes[i].averted_cases == outcomes[i - 1].averted_cases) {
            throw TieError("icer_chain: tied averted cases between '" + outcomes[i - 1].scenario +
                           "' and '" + outcomes[i].scenario + "'");
        }
    }
    return outcomes;
}

std::vector<double> chain_icers(const std::vector<InterventionOutcome>& sorted) {
    std::vector<double> icers(sorted.size());
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (i == 0) {
            if (sorted[i].averted_cases == 0.0) {
                throw UndefinedRatioError("icer_chain: first entry has zero averted cases");
            }
            icers[i] = sorted[i].total_cost / sorted[i].averted_cases;
        } else {
            icers[i] = (sorted[i].total_cost - sorted[i - 1].total_cost) /
                       (sorted[i].averted_cases - sorted[i - 1].averted_cases);
        }
    }
    return icers;
}

} // namespace

std::vector<std::pair<std::string, double>> icer_chain(std::vector<InterventionOutcome> outcomes) {
    const auto sorted = sorted_by_averted(std::move(outcomes));
    const auto icers = chain_icers(sorted);
    std::vector<std::pair<std::string, double>> result;
    for (size_t i = 0; i < sorted.size(); ++i) result.emplace_back(sorted[i].scenario, icers[i]);
    return result;
}

std::vector<InterventionOutcome> scale_outcomes(const std::vector<InterventionOutcome>& outcomes) {
    if (outcomes.empty()) throw InvalidInputError("scale_outcomes: need at least one outcome");
    double min_cost = outcomes[0].total_cost;
    double min_averted = outcomes[0].averted_cases;
    for (const auto& o : outcomes) {
        min_cost = std::min(min_cost, o.total_cost);
        min_averted = std::min(min_averted, o.averted_cases);
    }
    if (!(min_cost > 0.0) || !(min_averted > 0.0)) {
        throw DomainError("scale_outcomes: minimum cost and averted cases must be positive");
    }
    std::vector<InterventionOutcome> scaled = outcomes;
    for (auto& o : scaled) {
        o.total_cost /= min_cost;
        o.averted_cases /= min_averted;
    }
    return scaled;
}

CeaClassification cea_classify(const std::vector<InterventionOutcome>& scaled, double cet) {
    if (scaled.empty()) throw InvalidInputError("cea_classify: need at least one point");
    for (size_t i = 1; i < scaled.size(); ++i) {
        if (scaled[i].averted_cases < scaled[i - 1].averted_cases) {
            throw InvalidInputError("cea_classify: points must be sorted ascending by averted cases");
        }
    }
    const auto sorted = sorted_by_averted(scaled); // also rejects ties
    const auto icers = chain_icers(sorted);

    CeaClassification out;
    for (size_t i = 0; i < sorted.size(); ++i) {
        CeaPoint pt;
        pt.scenario = sorted[i].scenario;
        pt.scaled_cost = sorted[i].total_cost;
        pt.scaled_averted = sorted[i].averted_cases;
        pt.icer = icers[i];
        pt.cost_effective = icers[i] <= cet;
        out.points.push_back(pt);
    }

    double px = 0.0, py = 0.0;
    for (const auto& pt : out.points) {
        out.frontier_segments.push_back({px, py, pt.scaled_averted, pt.scaled_cost});
        px = pt.scaled_averted;
        py = pt.scaled_cost;
    }

    // Strictly dominated: some other point costs no more and averts no less,
    // with at least one strict inequality. Never recommend such a point.
    const auto dominated = [&](size_t i) {
        for (size_t j = 0; j < out.points.size(); ++j) {
            if (j == i) continue;
            const bool no_worse = out.points[j].scaled_cost <= out.points[i].scaled_cost &&
                                  out.points[j].scaled_averted >= out.points[i].scaled_averted;
            const bool strictly = out.points[j].scaled_cost < out.points[i].scaled_cost ||
                                  out.points[j].scaled_averted > out.points[i].scaled_averted;
            if (no_worse && strictly) return true;
        }
        return false;
    };

    int best = -1;
    for (size_t i = 0; i < out.points.size(); ++i) {
        if (!out.points[i].cost_effective || dominated(i)) continue;
        if (best < 0 || out.points[i].icer >= out.points[best].icer) {
            best = static_cast<int>(i); // ties resolve to the larger averted count
        }
    }
    if (best >= 0) out.recommended = out.points[best].scenario;
    return out;
}

} // namespace tbctl
