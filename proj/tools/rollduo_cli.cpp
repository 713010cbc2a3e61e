#include "rollduo/scenario.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

using namespace rollduo;

namespace {

struct Common {
    std::string scenario;
    std::string preset;
    std::string format;
    std::string out;
    double unit_mb = 0.0;
    int jobs = 0;
    std::string mechanisms;
};

void add_common(CLI::App* cmd, Common& c) {
    auto* src = cmd->add_option("--scenario", c.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "Bundled scenario name")->excludes(src);
    cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--out", c.out, "Output path (default: stdout)");
    cmd->add_option("--unit-mb", c.unit_mb, "Data unit in MB (overrides the scenario)")->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--mechanisms", c.mechanisms, "Force both mechanisms, e.g. TT")
        ->check(CLI::IsMember({"TT", "TR", "RT", "RR"}));
}

Scenario resolve(const Common& c) {
    if (c.scenario.empty() && c.preset.empty()) throw ScenarioError("pass --scenario <path> or --preset <name>");
    Scenario s = c.scenario.empty() ? preset_scenario(c.preset) : load_scenario(c.scenario);
    if (c.unit_mb > 0.0) s = with_unit_mb(s, c.unit_mb);
    return s;
}

RunOptions run_options(const Common& c) {
    RunOptions o;
    o.jobs = c.jobs;
    if (!c.mechanisms.empty()) o.force_mechanisms = c.mechanisms;
    return o;
}

void write(const std::vector<SweepRow>& rows, const Scenario& s, const Common& c) {
    emit(rows, c.format.empty() ? s.format : c.format, c.out.empty() ? s.output : c.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Duopoly rollover data-plan equilibrium solver"};
    app.require_subcommand(1);

    Common solve_opt, sweep_opt, map_opt;
    long long seed = -1;
    auto* solve = app.add_subcommand("solve", "Solve one point at the scenario's parameters");
    add_common(solve, solve_opt);
    solve->add_option("--seed", seed, "Run a Monte Carlo check of the rollover overage with this seed")
        ->check(CLI::NonNegativeNumber);
    auto* sweep = app.add_subcommand("sweep", "Evaluate the scenario's sweep grid");
    add_common(sweep, sweep_opt);
    auto* regimes = app.add_subcommand("regimes", "Evaluate the scenario's 2-D map");
    add_common(regimes, map_opt);
    std::string show;
    auto* presets = app.add_subcommand("presets", "List bundled scenarios");
    presets->add_option("--show", show, "Print the named preset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*presets) {
            if (!show.empty()) {
                std::cout << preset_text(show) << '\n';
            } else {
                for (const auto& n : preset_names()) std::cout << n << '\n';
            }
            return 0;
        }
        if (*solve) {
            const Scenario s = resolve(solve_opt);
            write(solve_point(s, run_options(solve_opt)), s, solve_opt);
            if (seed >= 0) {
                for (const auto& mc : monte_carlo_checks(s, static_cast<std::uint64_t>(seed))) {
                    const double z = mc.std_error > 0.0 ? (mc.simulated - mc.analytic) / mc.std_error : 0.0;
                    std::fprintf(stderr, "monte-carlo Q=%d units: A_R analytic=%.9g simulated=%.9g se=%.3g z=%.2f\n",
                                 mc.cap_units, mc.analytic, mc.simulated, mc.std_error, z);
                }
            }
            return 0;
        }
        if (*sweep) {
            const Scenario s = resolve(sweep_opt);
            write(run_sweep(s, run_options(sweep_opt)), s, sweep_opt);
            return 0;
        }
        if (*regimes) {
            const Scenario s = resolve(map_opt);
            write(run_regime_map(s, run_options(map_opt)), s, map_opt);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
