#include "tbctl/config.hpp"
#include "tbctl/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tbctl {

using nlohmann::ordered_json;

namespace {

/// Convert a byte offset from a parse error into line:column.
std::string position_of(const std::string& text, size_t byte) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void reject_unknown_keys(const ordered_json& obj, const std::set<std::string>& known,
                         const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        if (!known.count(key)) {
            throw ConfigError("config error at " + path + ": unknown key '" + key + "'");
        }
    }
}

double get_number(const ordered_json& obj, const std::string& key, double fallback,
                  const std::string& path) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        throw ConfigError("config error at " + path + "." + key + ": expected a number");
    }
    return obj[key].get<double>();
}

} // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    // Baseline initial compartment sizes, in units of 1e6 persons. The
    // published absolute counts make the infection term stiffer than any
    // practical fixed-step integration; this scale keeps the dynamics, the
    // reproduction number and every rate constant unchanged.
    c.initial_state = {755.7, 344.3, 23.10, 1.892, 0.16082};
    c.population_n0 = c.initial_state.total();
    c.masks.assign(ScenarioMask::all().begin(), ScenarioMask::all().end());
    c.sensitivity.ranges = default_r0_ranges(c.params, 0.5);
    return c;
}

void RunConfig::validate() const {
    if (!params.valid()) {
        throw ConfigError("config error at $.params: rates must be finite and nonnegative");
    }
    if (!(params.b > 0.0)) throw ConfigError("config error at $.params.b: must be positive");
    for (const auto& [name, v] : {std::pair{"mu1", params.mu1}, {"mu2", params.mu2},
                                  {"mu3", params.mu3}, {"mu4", params.mu4}, {"mu5", params.mu5}}) {
        if (!(v > 0.0)) {
            throw ConfigError(std::string("config error at $.params.") + name + ": must be positive");
        }
    }
    if (!initial_state.all_finite() || !initial_state.nonnegative()) {
        throw ConfigError("config error at $.initial_state: components must be finite and nonnegative");
    }
    if (!(horizon_months > 0.0) || !std::isfinite(horizon_months)) {
        throw ConfigError("config error at $.horizon_months: must be positive");
    }
    if (steps < 1) throw ConfigError("config error at $.steps: must be >= 1");
    try {
        control_bounds.validate();
        cost_weights.validate();
        fbs.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config error: ") + e.what());
    }
    if (masks.empty()) throw ConfigError("config error at $.masks: need at least one scenario");
    if (!(cet > 0.0) || !std::isfinite(cet)) {
        throw ConfigError("config error at $.cet: must be positive");
    }
    if (!(population_n0 > 0.0)) {
        throw ConfigError("config error at $.population_n0: must be positive");
    }
    if (sensitivity.n_samples < 2) {
        throw ConfigError("config error at $.sensitivity.n_samples: must be >= 2");
    }
    for (const auto& r : sensitivity.ranges) {
        if (!(r.low < r.high)) {
            throw ConfigError("config error at $.sensitivity.ranges." + r.name +
                              ": low must be below high");
        }
    }
    if (output.format != "csv" && output.format != "json") {
        throw ConfigError("config error at $.output.format: must be 'csv' or 'json'");
    }
}

namespace {

void apply_params(const ordered_json& obj, ModelParams& p) {
    static const std::set<std::string> keys = {"lambda1", "lambda2", "lambda3", "lambda4",
                                               "lambda5", "lambda6", "lambda7", "b", "sigma",
                                               "mu1", "mu2", "mu3", "mu4", "mu5"};
    reject_unknown_keys(obj, keys, "$.params");
    p.lambda1 = get_number(obj, "lambda1", p.lambda1, "$.params");
    p.lambda2 = get_number(obj, "lambda2", p.lambda2, "$.params");
    p.lambda3 = get_number(obj, "lambda3", p.lambda3, "$.params");
    p.lambda4 = get_number(obj, "lambda4", p.lambda4, "$.params");
    p.lambda5 = get_number(obj, "lambda5", p.lambda5, "$.params");
    p.lambda6 = get_number(obj, "lambda6", p.lambda6, "$.params");
    p.lambda7 = get_number(obj, "lambda7", p.lambda7, "$.params");
    p.b = get_number(obj, "b", p.b, "$.params");
    p.sigma = get_number(obj, "sigma", p.sigma, "$.params");
    p.mu1 = get_number(obj, "mu1", p.mu1, "$.params");
    p.mu2 = get_number(obj, "mu2", p.mu2, "$.params");
    p.mu3 = get_number(obj, "mu3", p.mu3, "$.params");
    p.mu4 = get_number(obj, "mu4", p.mu4, "$.params");
    p.mu5 = get_number(obj, "mu5", p.mu5, "$.params");
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config error in " + origin + " at " + position_of(text, e.byte) + ": " +
                          e.what());
    }
    if (!j.is_object()) throw ConfigError("config error in " + origin + ": expected a JSON object");

    static const std::set<std::string> top = {
        "params",       "initial_state", "horizon_months", "steps",
        "control_bounds", "cost_weights", "fbs",            "masks",
        "seed",         "cet",           "population_n0",  "sensitivity",
        "output",       "outcomes_file"};
    reject_unknown_keys(j, top, "$");

    RunConfig c = RunConfig::defaults();
    bool n0_given = false;

    if (j.contains("params")) apply_params(j["params"], c.params);
    if (j.contains("initial_state")) {
        const auto& s = j["initial_state"];
        reject_unknown_keys(s, {"U", "T_l", "T_d", "T_t", "R"}, "$.initial_state");
        c.initial_state.U = get_number(s, "U", c.initial_state.U, "$.initial_state");
        c.initial_state.Tl = get_number(s, "T_l", c.initial_state.Tl, "$.initial_state");
        c.initial_state.Td = get_number(s, "T_d", c.initial_state.Td, "$.initial_state");
        c.initial_state.Tt = get_number(s, "T_t", c.initial_state.Tt, "$.initial_state");
        c.initial_state.R = get_number(s, "R", c.initial_state.R, "$.initial_state");
    }
    c.horizon_months = get_number(j, "horizon_months", c.horizon_months, "$");
    if (j.contains("steps")) {
        if (!j["steps"].is_number_integer()) {
            throw ConfigError("config error at $.steps: expected an integer");
        }
        c.steps = j["steps"].get<int>();
    }
    if (j.contains("control_bounds")) {
        const auto& bjson = j["control_bounds"];
        std::set<std::string> keys(kControlNames.begin(), kControlNames.end());
        reject_unknown_keys(bjson, keys, "$.control_bounds");
        for (int i = 0; i < 9; ++i) {
            c.control_bounds.upper[i] =
                get_number(bjson, kControlNames[i], c.control_bounds.upper[i], "$.control_bounds");
        }
    }
    if (j.contains("cost_weights")) {
        const auto& wj = j["cost_weights"];
        reject_unknown_keys(wj, {"A1", "A2", "A3"}, "$.cost_weights");
        c.cost_weights.A1 = get_number(wj, "A1", c.cost_weights.A1, "$.cost_weights");
        c.cost_weights.A2 = get_number(wj, "A2", c.cost_weights.A2, "$.cost_weights");
        c.cost_weights.A3 = get_number(wj, "A3", c.cost_weights.A3, "$.cost_weights");
    }
    if (j.contains("fbs")) {
        const auto& f = j["fbs"];
        reject_unknown_keys(f, {"rel_tol", "abs_tol", "relaxation", "max_iterations"}, "$.fbs");
        c.fbs.rel_tol = get_number(f, "rel_tol", c.fbs.rel_tol, "$.fbs");
        c.fbs.abs_tol = get_number(f, "abs_tol", c.fbs.abs_tol, "$.fbs");
        c.fbs.relaxation = get_number(f, "relaxation", c.fbs.relaxation, "$.fbs");
        if (f.contains("max_iterations")) c.fbs.max_iterations = f["max_iterations"].get<int>();
    }
    if (j.contains("masks")) {
        if (!j["masks"].is_array()) throw ConfigError("config error at $.masks: expected an array");
        c.masks.clear();
        for (const auto& m : j["masks"]) {
            try {
                c.masks.push_back(ScenarioMask::parse(m.get<std::string>()));
            } catch (const std::exception& e) {
                throw ConfigError(std::string("config error at $.masks: ") + e.what());
            }
        }
    }
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    c.cet = get_number(j, "cet", c.cet, "$");
    if (j.contains("population_n0")) {
        c.population_n0 = get_number(j, "population_n0", c.population_n0, "$");
        n0_given = true;
    }
    if (j.contains("sensitivity")) {
        const auto& s = j["sensitivity"];
        reject_unknown_keys(s, {"n_samples", "half_width_fraction", "ranges"}, "$.sensitivity");
        if (s.contains("n_samples")) c.sensitivity.n_samples = s["n_samples"].get<int>();
        if (s.contains("half_width_fraction") && s.contains("ranges")) {
            throw ConfigError("config error at $.sensitivity: give either half_width_fraction or ranges");
        }
        if (s.contains("half_width_fraction")) {
            c.sensitivity.ranges =
                default_r0_ranges(c.params, s["half_width_fraction"].get<double>());
        } else if (s.contains("ranges")) {
            c.sensitivity.ranges.clear();
            for (const auto& r : s["ranges"]) {
                reject_unknown_keys(r, {"name", "low", "high"}, "$.sensitivity.ranges[]");
                c.sensitivity.ranges.push_back({r.at("name").get<std::string>(),
                                                r.at("low").get<double>(),
                                                r.at("high").get<double>()});
            }
        } else {
            c.sensitivity.ranges = default_r0_ranges(c.params, 0.5);
        }
    } else {
        c.sensitivity.ranges = default_r0_ranges(c.params, 0.5);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        reject_unknown_keys(o, {"dir", "format"}, "$.output");
        if (o.contains("dir")) c.output.dir = o["dir"].get<std::string>();
        if (o.contains("format")) c.output.format = o["format"].get<std::string>();
    }
    if (j.contains("outcomes_file") && !j["outcomes_file"].is_null()) {
        c.outcomes_file = j["outcomes_file"].get<std::string>();
    }

    // Parameters or the initial state may have changed the derived defaults.
    if (!n0_given) c.population_n0 = c.initial_state.total();

    c.validate();
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config error: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

std::string resolved_config_json(const RunConfig& config) {
    ordered_json j;
    j["params"] = {{"lambda1", config.params.lambda1}, {"lambda2", config.params.lambda2},
                   {"lambda3", config.params.lambda3}, {"lambda4", config.params.lambda4},
                   {"lambda5", config.params.lambda5}, {"lambda6", config.params.lambda6},
                   {"lambda7", config.params.lambda7}, {"b", config.params.b},
                   {"sigma", config.params.sigma},     {"mu1", config.params.mu1},
                   {"mu2", config.params.mu2},         {"mu3", config.params.mu3},
                   {"mu4", config.params.mu4},         {"mu5", config.params.mu5}};
    j["initial_state"] = {{"U", config.initial_state.U},
                          {"T_l", config.initial_state.Tl},
                          {"T_d", config.initial_state.Td},
                          {"T_t", config.initial_state.Tt},
                          {"R", config.initial_state.R}};
    j["horizon_months"] = config.horizon_months;
    j["steps"] = config.steps;
    ordered_json bounds;
    for (int i = 0; i < 9; ++i) bounds[kControlNames[i]] = config.control_bounds.upper[i];
    j["control_bounds"] = bounds;
    j["cost_weights"] = {{"A1", config.cost_weights.A1},
                         {"A2", config.cost_weights.A2},
                         {"A3", config.cost_weights.A3}};
    j["fbs"] = {{"rel_tol", config.fbs.rel_tol},
                {"abs_tol", config.fbs.abs_tol},
                {"relaxation", config.fbs.relaxation},
                {"max_iterations", config.fbs.max_iterations}};
    ordered_json masks = ordered_json::array();
    for (const auto& m : config.masks) masks.push_back(m.token());
    j["masks"] = masks;
    j["seed"] = config.seed;
    j["cet"] = config.cet;
    j["population_n0"] = config.population_n0;
    ordered_json ranges = ordered_json::array();
    for (const auto& r : config.sensitivity.ranges) {
        ranges.push_back({{"name", r.name}, {"low", r.low}, {"high", r.high}});
    }
    j["sensitivity"] = {{"n_samples", config.sensitivity.n_samples}, {"ranges", ranges}};
    j["output"] = {{"dir", config.output.dir}, {"format", config.output.format}};
    if (config.outcomes_file) {
        j["outcomes_file"] = *config.outcomes_file;
    } else {
        j["outcomes_file"] = nullptr;
    }
    return j.dump(2) + "\n";
}

} // namespace tbctl
