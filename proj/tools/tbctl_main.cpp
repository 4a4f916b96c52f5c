#include "tbctl/config.hpp"
#include "tbctl/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> steps;
    std::optional<double> horizon;
    std::optional<std::string> masks;
    std::optional<double> cet;
    std::optional<std::string> format;
    std::optional<std::string> outcomes_file;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_path, "Configuration JSON file");
    cmd->add_option("--out-dir", o.out_dir, "Output directory (overrides the config)");
    cmd->add_option("--seed", o.seed, "Random seed (overrides the config)");
    cmd->add_option("--steps", o.steps, "Integration steps over the horizon");
    cmd->add_option("--horizon", o.horizon, "Horizon in months");
    cmd->add_option("--masks", o.masks,
                    "Comma-separated scenario tokens, e.g. none,tpt,mn+d,tpt+mn+d (or 'all')");
    cmd->add_option("--cet", o.cet, "Cost-effectiveness threshold");
    cmd->add_option("--format", o.format, "Output table format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--outcomes-file", o.outcomes_file,
                    "CSV of scenario,total_cost,averted_cases[,recovered_cases] fed to the CEA");
}

tbctl::RunConfig resolve_config(const CliOverrides& o) {
    tbctl::RunConfig config =
        o.config_path.empty() ? tbctl::RunConfig::defaults() : tbctl::load_config_file(o.config_path);
    if (o.seed) config.seed = *o.seed;
    if (o.steps) config.steps = *o.steps;
    if (o.horizon) config.horizon_months = *o.horizon;
    if (o.masks) {
        config.masks.clear();
        if (*o.masks == "all") {
            config.masks.assign(tbctl::ScenarioMask::all().begin(),
                                tbctl::ScenarioMask::all().end());
        } else {
            std::string rest = *o.masks;
            size_t pos = 0;
            while (pos <= rest.size()) {
                size_t next = rest.find(',', pos);
                if (next == std::string::npos) next = rest.size();
                const std::string token = rest.substr(pos, next - pos);
                if (!token.empty()) config.masks.push_back(tbctl::ScenarioMask::parse(token));
                pos = next + 1;
            }
        }
    }
    if (o.cet) config.cet = *o.cet;
    if (o.format) config.output.format = *o.format;
    if (o.outcomes_file) config.outcomes_file = *o.outcomes_file;
    if (!o.out_dir.empty()) config.output.dir = o.out_dir;
    config.validate();
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compartmental TB intervention toolkit: simulation, optimal control, "
                 "sensitivity and cost-effectiveness pipelines"};
    app.require_subcommand(1);

    CliOverrides o;
    CLI::App* simulate = app.add_subcommand("simulate", "Uncontrolled forward simulation");
    CLI::App* optimize = app.add_subcommand("optimize", "Forward-backward sweep per scenario");
    CLI::App* sensitivity = app.add_subcommand("sensitivity", "LHS + PRCC of the reproduction number");
    CLI::App* cea = app.add_subcommand("cea", "Cost-effectiveness analysis");
    for (CLI::App* cmd : {simulate, optimize, sensitivity, cea}) add_common_flags(cmd, o);

    CLI11_PARSE(app, argc, argv);

    try {
        const tbctl::RunConfig config = resolve_config(o);
        const std::filesystem::path out_dir = config.output.dir;
        if (simulate->parsed()) return tbctl::run_simulate(config, out_dir);
        if (optimize->parsed()) return tbctl::run_optimize(config, out_dir);
        if (sensitivity->parsed()) return tbctl::run_sensitivity(config, out_dir);
        if (cea->parsed()) return tbctl::run_cea(config, out_dir);
    } catch (const tbctl::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return tbctl::kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
