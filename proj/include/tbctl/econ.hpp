#ifndef TBCTL_ECON_HPP
#define TBCTL_ECON_HPP

#include "tbctl/integrate.hpp"
#include "tbctl/model.hpp"

#include <array>
#include <string>
#include <vector>

namespace tbctl {

inline constexpr double kMonthsPerYear = 12.0;

/// Per-scenario cost and health outcomes; the input row for ACER/AIR/ICER.
struct InterventionOutcome {
    std::string scenario;
    double total_cost = 0.0;
    double averted_cases = 0.0;
    double recovered_cases = 0.0;
};

struct CeaPoint {
    std::string scenario;
    double scaled_cost = 0.0;
    double scaled_averted = 0.0;
    double icer = 0.0;
    bool cost_effective = false;
};

struct CeaClassification {
    std::vector<CeaPoint> points; ///< ascending by scaled averted cases
    /// Frontier segments (x0, y0, x1, y1) in (averted, cost) coordinates,
    /// consecutive in sorted order starting from the origin.
    std::vector<std::array<double, 4>> frontier_segments;
    std::string recommended; ///< highest ICER at or below the threshold, dominated points excluded
};

/// (Tl + Td + Tt) / n0 at each node.
std::vector<double> pseudo_prevalence(const Trajectory& states, double n0);

/// Node values of pseudo_prevalence at each full-year boundary (12 months),
/// excluding t0.
std::vector<double> pseudo_prevalence_yearly(const Trajectory& states, double n0);

/// New entries into the infected compartments over one year (time-integral of
/// the gross inflow terms), per 100,000 of n0, divided by the day-count
/// convention. year_index is zero based.
double incidence(const Trajectory& states, const ModelParams& p, double n0, int year_index,
                 double days_per_year = 365.0);

/// Time-average over the horizon of the infected-compartment gap between the
/// baseline and the scenario.
double averted_cases(const Trajectory& baseline, const Trajectory& scenario);

/// Same gap averaged over the window [t0, t_end]; the cumulative per-year value.
double averted_cases_until(const Trajectory& baseline, const Trajectory& scenario, double t_end);

/// Time-average of R over the final simulated year.
double recovered_final_year(const Trajectory& states);

/// Time-average of each compartment over year windows of 12 months; one row
/// of 5 values per year.
std::vector<std::array<double, 5>> yearly_compartment_averages(const Trajectory& states);

double acer(const InterventionOutcome& o); ///< total_cost / averted_cases
double air(const InterventionOutcome& o);  ///< averted_cases / recovered_cases

/// Incremental ratios in ascending order of averted cases: the first entry is
/// cost/averted, each following entry is delta-cost / delta-averted against
/// its predecessor. Tied averted values are an error.
std::vector<std::pair<std::string, double>> icer_chain(std::vector<InterventionOutcome> outcomes);

/// Divide every cost by the minimum cost and every averted count by the
/// minimum averted count. Idempotent.
std::vector<InterventionOutcome> scale_outcomes(const std::vector<InterventionOutcome>& outcomes);

/// Flag each point cost-effective iff its chain ICER is at most cet, build the
/// frontier, and recommend the highest-ICER point at or below cet that is not
/// strictly dominated. Input must be sorted ascending by averted cases.
CeaClassification cea_classify(const std::vector<InterventionOutcome>& scaled, double cet);

} // namespace tbctl

#endif
