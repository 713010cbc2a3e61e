#pragma once

#include "rollduo/demand.hpp"
#include "rollduo/mechanism_game.hpp"
#include "rollduo/valuation.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rollduo {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class MoneyUnits { RmbPerGb, Native };

struct DemandSpec {
    std::string kind = "lognormal";  // lognormal | uniform | pointmass | table
    double mean_gb = 1.0;
    double max_gb = 10.0;
    double sigma_log = 1.0;
    double lo_gb = 0.0;
    double hi_gb = 0.0;
    double d_gb = 0.0;
    std::vector<double> pmf;  // table: probability per data unit
    std::string table_csv;    // table: path to "d_units,prob" CSV
};

struct ValuationSpec {
    std::string kind = "gamma";  // gamma | uniform
    double theta_max = 1.0;      // uniform, in the scenario's money units
    double k = 4.5;
    double scale = 0.11;
    double scale_factor = 100.0;  // gamma scale in money units = scale * scale_factor
    double trunc_quantile = 0.9999;
};

struct OperatorSpec {
    double rho = 1.0;
    double cost = 0.0;    // scenario money units
    double cap_gb = 1.0;  // in data units when the scenario is native
    std::optional<Mechanism> mechanism;
};

struct Axis {
    std::string var;  // c1 | c2 | rho1 | rho2 | beta | psi1 | psi2
    std::vector<double> values;
};

struct NumericsSpec {
    double undercut_step_rel = 1e-6;
    double fixed_point_tol = 1e-13;
    double consistency_tol = 1e-8;
    double nash_eps_rel = 1e-9;
    long long mc_months = 1000000;
};

struct Scenario {
    std::string name;
    MoneyUnits units = MoneyUnits::RmbPerGb;
    double unit_mb = 10.0;
    double beta = 0.8;
    DemandSpec demand;
    ValuationSpec valuation;
    std::vector<OperatorSpec> operators;
    std::optional<std::array<double, 2>> strengths;  // rho V per operator, bypasses the demand model
    bool fixed_mechanisms = false;
    std::optional<Axis> sweep;
    std::optional<std::array<Axis, 2>> map;  // x, y
    NumericsSpec numerics;
    std::string format = "csv";
    std::string output;  // empty: stdout
};

Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario(const std::string& path);

std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);
Scenario preset_scenario(const std::string& name);

// Demand, valuation and usage resolved into money per data unit.
struct ResolvedModel {
    std::optional<DemandModel> demand;  // absent when strengths are given
    std::optional<ValuationDistribution> dist;
    double money = 1.0;  // scenario money unit -> money per data unit
    std::vector<int> caps;
    std::vector<UsagePair> usage;  // at the scenario's beta
};

ResolvedModel resolve_model(const Scenario& s);

// Scenario with the money unit rescaled (unit_mb changed); labels must not move.
Scenario with_unit_mb(Scenario s, double unit_mb);

struct SweepRow {
    double x = 0.0;                 // swept value
    std::optional<double> y;        // second coordinate of a 2-D map
    std::string eq_label;
    std::string kappa1 = "-";
    std::string kappa2 = "-";
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    std::optional<double> theta_tilde;
    double W1 = 0.0;
    double W2 = 0.0;
    std::string regime;
    std::string flags;

    bool operator==(const SweepRow&) const = default;
};

struct RunOptions {
    int jobs = 0;  // 0 = hardware threads
    std::optional<std::string> force_mechanisms;  // e.g. "TT"
};

// Single point at the scenario's own parameters.
std::vector<SweepRow> solve_point(const Scenario& s, const RunOptions& opt = {});
std::vector<SweepRow> run_sweep(const Scenario& s, const RunOptions& opt = {});
std::vector<SweepRow> run_regime_map(const Scenario& s, const RunOptions& opt = {});

struct MonteCarloCheck {
    int cap_units = 0;
    double analytic = 0.0;
    double simulated = 0.0;
    double std_error = 0.0;
};

std::vector<MonteCarloCheck> monte_carlo_checks(const Scenario& s, std::uint64_t seed);

// Numbers are written with 12 significant digits. 2-D map rows carry an extra
// second_var column.
std::string format_rows(const std::vector<SweepRow>& rows, const std::string& format);
// Writes to path, or to stdout when path is empty.
void emit(const std::vector<SweepRow>& rows, const std::string& format, const std::string& path);
std::vector<SweepRow> rows_from_json(const std::string& text);

}  // namespace rollduo
