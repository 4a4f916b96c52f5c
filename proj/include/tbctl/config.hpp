#ifndef TBCTL_CONFIG_HPP
#define TBCTL_CONFIG_HPP

#include "tbctl/control.hpp"
#include "tbctl/model.hpp"
#include "tbctl/sensitivity.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbctl {

/// A configuration file or CLI value is invalid. The message carries a
/// line:column position for parse errors and a field path otherwise.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SensitivityConfig {
    int n_samples = 1000;
    std::vector<ParamRange> ranges; ///< resolved explicit ranges
};

struct OutputConfig {
    std::string dir = "out";
    std::string format = "csv"; ///< "csv" or "json"
};

/// Fully resolved run configuration. Defaults reproduce the baseline
/// simulation study setup.
struct RunConfig {
    ModelParams params = ModelParams::baseline();
    StateVec initial_state;
    double horizon_months = 60.0;
    int steps = 1200;
    ControlBounds control_bounds = ControlBounds::uniform(1.0);
    CostWeights cost_weights;
    FbsConfig fbs;
    std::vector<ScenarioMask> masks; ///< default: all 8 scenarios
    std::uint64_t seed = 7;
    double cet = 1.190;
    double population_n0 = 0.0; ///< denominator for prevalence and incidence
    SensitivityConfig sensitivity;
    OutputConfig output;
    std::optional<std::string> outcomes_file;

    TimeGrid grid() const { return {0.0, horizon_months, steps}; }

    static RunConfig defaults();
    void validate() const; // throws ConfigError
};

/// Parse and validate a configuration JSON file. Unknown keys are rejected.
RunConfig load_config_file(const std::string& path);

/// Parse and validate configuration JSON text (used by the file loader and tests).
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// Serialize the fully resolved configuration; reloading the result
/// reproduces the run exactly.
std::string resolved_config_json(const RunConfig& config);

} // namespace tbctl

#endif
