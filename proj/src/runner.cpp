#include "tbctl/runner.hpp"
#include "tbctl/control.hpp"
#include "tbctl/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

namespace tbctl {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

/// A small tabular result; serialized as CSV or as a columns/rows JSON
/// object depending on the configured format.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<ordered_json>> rows;

    void add_row(std::vector<ordered_json> row) { rows.push_back(std::move(row)); }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

std::string table_to_csv(const Table& t) {
    std::ostringstream out;
    for (size_t c = 0; c < t.columns.size(); ++c) {
        out << t.columns[c] << (c + 1 < t.columns.size() ? "," : "\n");
    }
    for (const auto& row : t.rows) {
        for (size_t c = 0; c < row.size(); ++c) {
            const auto& cell = row[c];
            if (cell.is_string()) {
                out << cell.get<std::string>();
            } else if (cell.is_number_float()) {
                out << fmt_full(cell.get<double>());
            } else {
                out << cell.dump();
            }
            out << (c + 1 < row.size() ? "," : "\n");
        }
    }
    return out.str();
}

std::string table_to_json(const Table& t) {
    ordered_json j;
    j["columns"] = t.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
        ordered_json r = ordered_json::array();
        for (const auto& cell : row) r.push_back(cell);
        rows.push_back(r);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

void write_table(const RunConfig& config, const fs::path& out_dir, const std::string& stem,
                 const Table& t) {
    if (config.output.format == "json") {
        write_text(out_dir / (stem + ".json"), table_to_json(t));
    } else {
        write_text(out_dir / (stem + ".csv"), table_to_csv(t));
    }
}

void prepare_out_dir(const RunConfig& config, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    write_text(out_dir / "resolved_config.json", resolved_config_json(config));
}

Trajectory simulate_uncontrolled(const RunConfig& config) {
    const auto& p = config.params;
    const VectorField field = [&p](double, std::span<const double> y, std::span<double> dydt) {
        const StateVec d = base_rhs(p, StateVec::from_array(y));
        const auto da = d.to_array();
        std::copy(da.begin(), da.end(), dydt.begin());
    };
    return rk4_forward(field, config.initial_state.to_array(), config.grid());
}

Table state_table(const Trajectory& traj) {
    Table t;
    t.columns = {"t", "U", "T_l", "T_d", "T_t", "R", "N"};
    for (int i = 0; i < traj.grid().n_nodes(); ++i) {
        const auto n = traj.node(i);
        t.add_row({traj.grid().time_at(i), n[0], n[1], n[2], n[3], n[4],
                   n[0] + n[1] + n[2] + n[3] + n[4]});
    }
    return t;
}

struct ScenarioRun {
    ScenarioMask mask;
    OcSolution solution;
};

std::vector<ScenarioRun> solve_scenarios(const RunConfig& config) {
    std::vector<ScenarioRun> runs;
    for (const auto& mask : config.masks) {
        const ControlBounds bounds = config.control_bounds.masked(mask);
        OcSolution sol = forward_backward_sweep(config.params, config.cost_weights, bounds, mask,
                                                config.grid(), config.initial_state, config.fbs);
        runs.push_back({mask, std::move(sol)});
    }
    return runs;
}

ordered_json scenario_summary(const ScenarioRun& run) {
    const auto yearly = yearly_compartment_averages(run.solution.states);
    ordered_json j;
    j["scenario"] = run.mask.label();
    j["token"] = run.mask.token();
    j["converged"] = run.solution.converged;
    j["iterations"] = run.solution.iterations;
    j["objective"] = run.solution.objective;
    j["objective_history"] = run.solution.objective_history;
    ordered_json years = ordered_json::array();
    for (const auto& row : yearly) {
        years.push_back({{"U", row[0]}, {"T_l", row[1]}, {"T_d", row[2]}, {"T_t", row[3]},
                         {"R", row[4]}});
    }
    j["yearly_averages"] = years;
    return j;
}

void write_scenario_files(const RunConfig& config, const fs::path& out_dir,
                          const ScenarioRun& run) {
    const auto& sol = run.solution;
    const std::string token = run.mask.token();

    Table t;
    t.columns = {"t", "U", "T_l", "T_d", "T_t", "R"};
    for (const char* name : kControlNames) t.columns.push_back(name);
    for (const char* name : {"lam_U", "lam_T_l", "lam_T_d", "lam_T_t", "lam_R"}) {
        t.columns.push_back(name);
    }
    for (int i = 0; i < sol.states.grid().n_nodes(); ++i) {
        std::vector<ordered_json> row = {sol.states.grid().time_at(i)};
        for (double v : sol.states.node(i)) row.push_back(v);
        for (double v : sol.controls.node(i)) row.push_back(v);
        for (double v : sol.adjoints.node(i)) row.push_back(v);
        t.add_row(std::move(row));
    }
    write_table(config, out_dir, "solution_" + token, t);

    const Trajectory agg = aggregate_controls(sol.controls);
    Table a;
    a.columns = {"t", "mu_T", "mu_M", "mu_D", "mu_total"};
    for (int i = 0; i < agg.grid().n_nodes(); ++i) {
        const auto n = agg.node(i);
        a.add_row({agg.grid().time_at(i), n[0], n[1], n[2], n[3]});
    }
    write_table(config, out_dir, "aggregated_controls_" + token, a);

    Table y;
    y.columns = {"year", "U", "T_l", "T_d", "T_t", "R"};
    const auto yearly = yearly_compartment_averages(sol.states);
    for (size_t k = 0; k < yearly.size(); ++k) {
        y.add_row({static_cast<int>(k + 1), yearly[k][0], yearly[k][1], yearly[k][2], yearly[k][3],
                   yearly[k][4]});
    }
    write_table(config, out_dir, "yearly_averages_" + token, y);
}

} // namespace

int run_simulate(const RunConfig& config, const fs::path& out_dir) {
    prepare_out_dir(config, out_dir);
    const Trajectory traj = simulate_uncontrolled(config);
    write_table(config, out_dir, "trajectory", state_table(traj));

    ordered_json summary;
    summary["r0_closed_form"] = r0_closed_form(config.params);
    summary["r0_next_generation"] = r0_next_generation(config.params);
    summary["feasible_bound"] = feasible_bound(config.params);
    summary["min_state_component"] = traj.min_value();
    const auto last = traj.node(traj.grid().n_nodes() - 1);
    summary["final_state"] = {{"U", last[0]}, {"T_l", last[1]}, {"T_d", last[2]},
                              {"T_t", last[3]}, {"R", last[4]}};
    summary["pseudo_prevalence_yearly"] =
        pseudo_prevalence_yearly(traj, config.population_n0);
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    return kExitOk;
}

int run_optimize(const RunConfig& config, const fs::path& out_dir) {
    prepare_out_dir(config, out_dir);
    const auto runs = solve_scenarios(config);

    ordered_json summary = ordered_json::array();
    bool all_converged = true;
    for (const auto& run : runs) {
        write_scenario_files(config, out_dir, run);
        summary.push_back(scenario_summary(run));
        all_converged = all_converged && run.solution.converged;
    }
    write_text(out_dir / "summary.json", summary.dump(2) + "\n");
    return all_converged ? kExitOk : kExitNoConvergence;
}

int run_sensitivity(const RunConfig& config, const fs::path& out_dir) {
    prepare_out_dir(config, out_dir);
    const PrccResult res =
        prcc_r0(config.params, config.sensitivity.ranges, config.sensitivity.n_samples, config.seed);

    Table t;
    t.columns = {"parameter", "prcc"};
    for (size_t i = 0; i < res.names.size(); ++i) {
        t.add_row({res.names[i], res.coefficients[i]});
    }
    write_table(config, out_dir, "prcc", t);

    ordered_json j;
    j["n_samples"] = res.n_samples;
    j["seed"] = res.seed;
    ordered_json coeffs;
    for (size_t i = 0; i < res.names.size(); ++i) coeffs[res.names[i]] = res.coefficients[i];
    j["prcc"] = coeffs;
    write_text(out_dir / "prcc.json", j.dump(2) + "\n");
    return kExitOk;
}

std::vector<InterventionOutcome> load_outcomes_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config error: cannot open outcomes file '" + path.string() + "'");
    std::vector<InterventionOutcome> outcomes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.back() == '\r') {
            if (!line.empty()) line.pop_back();
            if (line.empty()) continue;
        }
        if (line_no == 1 && line.rfind("scenario", 0) == 0) continue; // header
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 3 || cells.size() > 4) {
            throw ConfigError("config error in " + path.string() + " at line " +
                              std::to_string(line_no) +
                              ": expected scenario,total_cost,averted_cases[,recovered_cases]");
        }
        InterventionOutcome o;
        o.scenario = cells[0];
        try {
            o.total_cost = std::stod(cells[1]);
            o.averted_cases = std::stod(cells[2]);
            o.recovered_cases = cells.size() == 4 ? std::stod(cells[3]) : 0.0;
        } catch (const std::exception&) {
            throw ConfigError("config error in " + path.string() + " at line " +
                              std::to_string(line_no) + ": malformed number");
        }
        outcomes.push_back(std::move(o));
    }
    if (outcomes.empty()) {
        throw ConfigError("config error: outcomes file '" + path.string() + "' holds no rows");
    }
    return outcomes;
}

int run_cea(const RunConfig& config, const fs::path& out_dir) {
    prepare_out_dir(config, out_dir);

    std::vector<InterventionOutcome> outcomes;
    bool any_nonconverged = false;
    std::vector<std::pair<std::string, std::vector<double>>> yearly_averted;

    if (config.outcomes_file) {
        outcomes = load_outcomes_file(*config.outcomes_file);
    } else {
        // The no-intervention run is the baseline for averted cases even when
        // it is not among the requested masks.
        RunConfig work = config;
        bool has_none = false;
        for (const auto& m : work.masks) has_none = has_none || !m.any();
        if (!has_none) work.masks.insert(work.masks.begin(), ScenarioMask{});
        const auto runs = solve_scenarios(work);

        const Trajectory* baseline = nullptr;
        for (const auto& r : runs) {
            if (!r.mask.any()) baseline = &r.solution.states;
            any_nonconverged = any_nonconverged || !r.solution.converged;
        }
        const int years = static_cast<int>(std::floor(config.horizon_months / kMonthsPerYear + 1e-9));
        for (const auto& r : runs) {
            if (!r.mask.any()) continue;
            InterventionOutcome o;
            o.scenario = r.mask.label();
            o.total_cost = r.solution.objective;
            o.averted_cases = averted_cases(*baseline, r.solution.states);
            o.recovered_cases = recovered_final_year(r.solution.states);
            outcomes.push_back(o);

            std::vector<double> cumulative;
            for (int y = 1; y <= years; ++y) {
                cumulative.push_back(
                    averted_cases_until(*baseline, r.solution.states, y * kMonthsPerYear));
            }
            yearly_averted.emplace_back(o.scenario, std::move(cumulative));
        }
    }

    Table outcome_table;
    outcome_table.columns = {"scenario", "total_cost", "averted_cases", "recovered_cases"};
    for (const auto& o : outcomes) {
        outcome_table.add_row({o.scenario, o.total_cost, o.averted_cases, o.recovered_cases});
    }
    write_table(config, out_dir, "outcomes", outcome_table);

    if (!yearly_averted.empty()) {
        Table y;
        y.columns = {"scenario", "year", "cumulative_averted"};
        for (const auto& [label, values] : yearly_averted) {
            for (size_t k = 0; k < values.size(); ++k) {
                y.add_row({label, static_cast<int>(k + 1), values[k]});
            }
        }
        write_table(config, out_dir, "averted_yearly", y);
    }

    // ACER / AIR, undefined ratios surfaced per row.
    bool any_undefined = false;
    Table acer_table, air_table;
    acer_table.columns = {"scenario", "acer"};
    air_table.columns = {"scenario", "air"};
    ordered_json acer_json = ordered_json::array();
    ordered_json air_json = ordered_json::array();
    for (const auto& o : outcomes) {
        ordered_json acer_cell, air_cell;
        try {
            acer_cell = acer(o);
        } catch (const UndefinedRatioError&) {
            acer_cell = nullptr;
            any_undefined = true;
        }
        try {
            air_cell = air(o);
        } catch (const UndefinedRatioError&) {
            air_cell = nullptr;
            any_undefined = true;
        }
        acer_table.add_row({o.scenario, acer_cell.is_null() ? ordered_json("undefined")
                                                            : ordered_json(round2(acer_cell.get<double>()))});
        air_table.add_row({o.scenario, air_cell.is_null() ? ordered_json("undefined")
                                                          : ordered_json(round2(air_cell.get<double>()))});
        acer_json.push_back({{"scenario", o.scenario},
                             {"acer", acer_cell}});
        air_json.push_back({{"scenario", o.scenario}, {"air", air_cell}});
    }
    write_table(config, out_dir, "acer", acer_table);
    write_table(config, out_dir, "air", air_table);

    const auto scaled = scale_outcomes(outcomes);
    auto sorted = scaled;
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.averted_cases < b.averted_cases; });
    const CeaClassification cls = cea_classify(sorted, config.cet);

    Table icer_table;
    icer_table.columns = {"scenario", "icer"};
    for (const auto& pt : cls.points) icer_table.add_row({pt.scenario, round2(pt.icer)});
    write_table(config, out_dir, "icer", icer_table);

    Table plane;
    plane.columns = {"scenario", "scaled_cost", "scaled_averted", "icer", "cost_effective"};
    for (const auto& pt : cls.points) {
        plane.add_row({pt.scenario, pt.scaled_cost, pt.scaled_averted, pt.icer,
                       pt.cost_effective ? 1 : 0});
    }
    write_table(config, out_dir, "cea_plane", plane);

    Table frontier;
    frontier.columns = {"averted_from", "cost_from", "averted_to", "cost_to"};
    for (const auto& seg : cls.frontier_segments) {
        frontier.add_row({seg[0], seg[1], seg[2], seg[3]});
    }
    write_table(config, out_dir, "cea_frontier", frontier);

    ordered_json summary;
    summary["cet"] = config.cet;
    ordered_json rows = ordered_json::array();
    for (const auto& pt : cls.points) {
        rows.push_back({{"scenario", pt.scenario},
                        {"scaled_cost", pt.scaled_cost},
                        {"scaled_averted", pt.scaled_averted},
                        {"icer", pt.icer},
                        {"cost_effective", pt.cost_effective}});
    }
    summary["points"] = rows;
    summary["acer"] = acer_json;
    summary["air"] = air_json;
    summary["recommended"] = cls.recommended;
    write_text(out_dir / "cea.json", summary.dump(2) + "\n");

    if (any_nonconverged) return kExitNoConvergence;
    return any_undefined ? kExitUndefinedRatio : kExitOk;
}

} // namespace tbctl
