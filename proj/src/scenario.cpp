#include "rollduo/scenario.hpp"

#include "rollduo/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace rollduo {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
    throw ScenarioError("field '" + field + "': " + what);
}

double num(const json& j, const std::string& key, const std::string& path) {
    const std::string f = path.empty() ? key : path + "." + key;
    if (!j.contains(key)) fail(f, "missing");
    if (!j.at(key).is_number()) fail(f, "must be a number");
    const double v = j.at(key).get<double>();
    if (!std::isfinite(v)) fail(f, "must be finite");
    return v;
}

double num_or(const json& j, const std::string& key, const std::string& path, double fallback) {
    return j.contains(key) ? num(j, key, path) : fallback;
}

std::string str_or(const json& j, const std::string& key, const std::string& path, const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_string()) fail(path.empty() ? key : path + "." + key, "must be a string");
    return j.at(key).get<std::string>();
}

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) fail(field, what);
}

Mechanism parse_mechanism(const std::string& s, const std::string& field) {
    if (s == "T") return Mechanism::T;
    if (s == "R") return Mechanism::R;
    fail(field, "must be \"T\" or \"R\"");
}

bool known_var(const std::string& v) {
    static const char* vars[] = {"c1", "c2", "rho1", "rho2", "beta", "psi1", "psi2"};
    return std::any_of(std::begin(vars), std::end(vars), [&](const char* k) { return v == k; });
}

Axis parse_axis(const json& j, const std::string& path) {
    Axis a;
    a.var = str_or(j, "var", path, "");
    require(known_var(a.var), path + ".var", "must be one of c1, c2, rho1, rho2, beta, psi1, psi2");
    if (j.contains("values")) {
        require(j.at("values").is_array() && !j.at("values").empty(), path + ".values", "must be a non-empty array");
        for (const auto& v : j.at("values")) {
            require(v.is_number(), path + ".values", "entries must be numbers");
            a.values.push_back(v.get<double>());
        }
    } else {
        const double from = num(j, "from", path), to = num(j, "to", path);
        require(to >= from, path + ".to", "must not be below 'from'");
        if (j.contains("n")) {
            const double nd = num(j, "n", path);
            require(nd >= 1 && nd == std::floor(nd) && nd <= 1e6, path + ".n", "must be an integer in [1, 1e6]");
            const int n = static_cast<int>(nd);
            for (int i = 0; i < n; ++i) a.values.push_back(n == 1 ? from : from + (to - from) * i / (n - 1));
        } else {
            const double step = num(j, "step", path);
            require(step > 0.0, path + ".step", "must be positive");
            const double span = (to - from) / step;
            require(span <= 1e6, path + ".step", "grid too large");
            const long n = static_cast<long>(std::floor(span + 1e-9)) + 1;
            for (long i = 0; i < n; ++i) a.values.push_back(from + step * static_cast<double>(i));
        }
    }
    for (std::size_t i = 1; i < a.values.size(); ++i)
        require(a.values[i] > a.values[i - 1], path, "grid must be strictly increasing");
    return a;
}

double money_factor(const Scenario& s) { return s.units == MoneyUnits::RmbPerGb ? s.unit_mb / 1000.0 : 1.0; }

int gb_to_units(double gb, double unit_mb) { return static_cast<int>(std::lround(gb * 1000.0 / unit_mb)); }

DemandModel read_table_csv(const std::string& path, double unit_mb) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open demand table '" + path + "'");
    std::map<int, double> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        int d = 0;
        double p = 0.0;
        if (std::sscanf(line.c_str(), "%d,%lf", &d, &p) != 2) {
            if (lineno == 1) continue;  // header
            throw ScenarioError("demand table '" + path + "' line " + std::to_string(lineno) + ": expected d_units,prob");
        }
        if (d < 0) throw ScenarioError("demand table line " + std::to_string(lineno) + ": negative demand");
        entries[d] += p;
    }
    if (entries.empty()) throw ScenarioError("demand table '" + path + "' is empty");
    std::vector<double> pmf(static_cast<std::size_t>(entries.rbegin()->first) + 1, 0.0);
    for (const auto& [d, p] : entries) pmf[static_cast<std::size_t>(d)] = p;
    return make_demand_from_pmf(std::move(pmf), unit_mb);
}



struct PointParams {
    double rho[2] = {1.0, 1.0};
    double cost[2] = {0.0, 0.0};  // money per data unit
    double beta = 0.8;
    std::optional<double> psi[2];
};

PointParams base_params(const Scenario& s, const ResolvedModel& m) {
    PointParams p;
    for (std::size_t i = 0; i < s.operators.size() && i < 2; ++i) {
        p.rho[i] = s.operators[i].rho;
        p.cost[i] = s.operators[i].cost * m.money;
    }
    p.beta = s.beta;
    return p;
}

void apply(PointParams& p, const std::string& var, double value, double money) {
    if (var == "c1") p.cost[0] = value * money;
    else if (var == "c2") p.cost[1] = value * money;
    else if (var == "rho1") p.rho[0] = value;
    else if (var == "rho2") p.rho[1] = value;
    else if (var == "beta") p.beta = value;
    else if (var == "psi1") p.psi[0] = value * money;
    else if (var == "psi2") p.psi[1] = value * money;
}

std::string join_flags(const std::vector<std::string>& f) {
    std::string out;
    for (const auto& s : f) {
        if (s.empty()) continue;
        if (!out.empty()) out += ';';
        out += s;
    }
    return out;
}

SweepRow pricing_row(const PricingEquilibrium& eq, double money) {
    SweepRow r;
    r.sigma1 = eq.sigma1 / money;
    r.sigma2 = eq.sigma2 / money;
    if (eq.partition.neutral) r.theta_tilde = *eq.partition.neutral / money;
    r.W1 = eq.W1;
    r.W2 = eq.W2;
    r.regime = to_string(eq.regime);
    std::vector<std::string> f;
    if (eq.swapped) f.push_back("swapped");
    if (eq.bertrand) f.push_back("bertrand");
    if (eq.used_fallback) f.push_back("fallback");
    if (!eq.consistent) f.push_back("inconsistent");
    r.flags = join_flags(f);
    return r;
}

std::vector<SweepRow> evaluate(const Scenario& s, const ResolvedModel& m, const PointParams& p, const RunOptions& opt) {
    const auto& dist = *m.dist;
    PricingOptions po;
    po.undercut_step_rel = s.numerics.undercut_step_rel;
    po.fixed_point_tol = s.numerics.fixed_point_tol;
    po.consistency_tol = s.numerics.consistency_tol;

    auto usage_of = [&](std::size_t i) {
        if (p.beta == s.beta) return m.usage[i];
        return make_usage_pair(*m.demand, m.caps[i], p.beta);
    };
    auto psi = [&](std::size_t i) { return p.psi[i] ? *p.psi[i] : p.cost[i] / p.rho[i]; };

    if (s.operators.size() == 1) {
        const UsagePair u = usage_of(0);
        const double ps = psi(0);
        std::vector<SweepRow> rows;
        double best = -1.0;
        Mechanism chosen = Mechanism::R;
        for (Mechanism k : {Mechanism::T, Mechanism::R}) {
            SweepRow r;
            r.kappa1 = std::string(1, to_char(k));
            const double sg = monopoly_threshold(ps, dist);
            r.sigma1 = sg / m.money;
            r.W1 = monopoly_profit(p.rho[0] * u.of(k), ps, sg, dist);
            r.regime = "MP";
            if (r.W1 > best) {
                best = r.W1;
                chosen = k;
            }
            rows.push_back(r);
        }
        for (auto& r : rows) {
            r.eq_label = std::string(1, to_char(chosen));
            if (r.kappa1 == r.eq_label) r.flags = "chosen";
        }
        return rows;
    }

    std::optional<std::pair<Mechanism, Mechanism>> fixed;
    if (opt.force_mechanisms) {
        fixed = std::pair{parse_mechanism(opt.force_mechanisms->substr(0, 1), "--mechanisms"),
                          parse_mechanism(opt.force_mechanisms->substr(1, 1), "--mechanisms")};
    } else if (s.fixed_mechanisms) {
        fixed = std::pair{*s.operators[0].mechanism, *s.operators[1].mechanism};
    }

    if (s.strengths || fixed) {
        double a1 = 0.0, a2 = 0.0;
        std::string label = "-";
        if (s.strengths) {
            a1 = (*s.strengths)[0];
            a2 = (*s.strengths)[1];
        } else {
            a1 = p.rho[0] * usage_of(0).of(fixed->first);
            a2 = p.rho[1] * usage_of(1).of(fixed->second);
            label = to_string(*fixed);
        }
        const auto eq = solve_pricing(a1, psi(0), a2, psi(1), dist, po);
        SweepRow r = pricing_row(eq, m.money);
        r.eq_label = s.strengths ? r.regime : label;
        if (fixed) {
            r.kappa1 = std::string(1, to_char(fixed->first));
            r.kappa2 = std::string(1, to_char(fixed->second));
        }
        return {r};
    }

    const UsagePair u1 = usage_of(0), u2 = usage_of(1);
    OperatorProfile op1{p.rho[0], psi(0) * p.rho[0], m.caps[0], Mechanism::T};
    OperatorProfile op2{p.rho[1], psi(1) * p.rho[1], m.caps[1], Mechanism::T};
    ClassifyOptions co;
    co.matrix.concurrent_cells = false;
    co.matrix.pricing = po;
    MechanismEquilibrium me = classify_mechanism_equilibrium(op1, u1, op2, u2, dist, co);
    const double eps = s.numerics.nash_eps_rel * me.matrix.max_profit();
    if (s.numerics.nash_eps_rel != 1e-9) {
        const bool sw = me.swapped;
        auto redo = nash_pure(me.matrix, eps);
        me.equilibria = redo.equilibria;
        me.label = redo.label;
        me.swapped = sw;
    }

    std::vector<std::string> common;
    common.push_back("mode=" + to_string(me.mode));
    if (me.mode != me.nash_mode) common.push_back("mode_mismatch");
    if (me.qos_flip) common.push_back("qos_flip");
    if (!me.consistent) common.push_back("diagnostic");
    std::vector<SweepRow> rows;
    if (me.equilibria.empty()) {
        SweepRow r;
        r.eq_label = me.label;
        r.flags = join_flags(common);
        rows.push_back(r);
        return rows;
    }
    for (const auto& pr : me.equilibria) {
        const auto& cell = me.matrix.at(pr.first, pr.second);
        SweepRow r = pricing_row(cell.eq, m.money);
        r.eq_label = me.label;
        r.kappa1 = std::string(1, to_char(pr.first));
        r.kappa2 = std::string(1, to_char(pr.second));
        std::vector<std::string> f = common;
        f.push_back(r.flags);
        r.flags = join_flags(f);
        rows.push_back(r);
    }
    return rows;
}

std::vector<SweepRow> guarded(const Scenario& s, const ResolvedModel& m, const PointParams& p, const RunOptions& opt) {
    try {
        return evaluate(s, m, p, opt);
    } catch (const std::exception& e) {
        SweepRow r;
        r.eq_label = "error";
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ' ');
        std::replace(msg.begin(), msg.end(), ';', ' ');
        r.flags = "error:" + msg;
        return {r};
    }
}

std::string fmt12(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    return std::stod(fmt12(v));
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

const char* kPresetFig = R"({
  "name": "%NAME%",
  "units": "rmb_per_gb",
  "unit_mb": 10,
  "beta": 0.8,
  "demand": {"kind": "lognormal", "mean_gb": 1, "max_gb": 10, "sigma_log": %SIGMA%},
  "valuation": {"kind": "gamma", "k": 4.5, "scale": 0.11, "scale_factor": %SCALE%, "trunc_quantile": 0.9999},
  "operators": [
    {"rho": 1.0, "cost": 30, "cap_gb": 1},
    {"rho": %RHO2%, "cost": 40, "cap_gb": 1}
  ],
  "sweep": {"var": "c1", "from": 10, "to": 60, "step": 0.5},
  "output": {"format": "csv"}
})";

const char* kPresetMonopoly = R"({
  "name": "monopoly",
  "units": "rmb_per_gb",
  "unit_mb": 10,
  "beta": 0.8,
  "demand": {"kind": "lognormal", "mean_gb": 1, "max_gb": 10, "sigma_log": %SIGMA%},
  "valuation": {"kind": "gamma", "k": 4.5, "scale": 0.11, "scale_factor": %SCALE%, "trunc_quantile": 0.9999},
  "operators": [{"rho": 1.0, "cost": 30, "cap_gb": 1}],
  "sweep": {"var": "c1", "from": 10, "to": 100, "step": 5},
  "output": {"format": "csv"}
})";

const char* kPresetRegimes = R"({
  "name": "regimes",
  "units": "native",
  "beta": 0.8,
  "valuation": {"kind": "uniform", "theta_max": 1.0},
  "operators": [{"rho": 1.0, "cost": 0.1}, {"rho": 1.0, "cost": 0.2}],
  "strengths": [1.0, 0.5],
  "map": {"x": {"var": "psi1", "from": 0.01, "to": 0.99, "n": 50},
          "y": {"var": "psi2", "from": 0.01, "to": 0.99, "n": 50}},
  "output": {"format": "csv"}
})";

// Calibration of the two shape knobs the experiment leaves open: the lognormal
// spread and the gamma scale multiplier (see README).
constexpr const char* kSigmaLog = "1.0";
constexpr const char* kScaleFactor = "100";

std::string substitute(std::string t, const std::map<std::string, std::string>& vars) {
    for (const auto& [k, v] : vars) {
        const std::string key = "%" + k + "%";
        for (std::size_t pos; (pos = t.find(key)) != std::string::npos;) t.replace(pos, key.size(), v);
    }
    return t;
}

}  // namespace

ResolvedModel resolve_model(const Scenario& s) {
    ResolvedModel m;
    m.money = money_factor(s);
    const auto& v = s.valuation;
    if (v.kind == "gamma") {
        m.dist = make_truncated_gamma(v.k, v.scale * v.scale_factor * m.money, v.trunc_quantile);
    } else {
        m.dist = make_uniform(v.theta_max * m.money);
    }
    if (s.strengths) return m;
    const auto& d = s.demand;
    const double u = s.unit_mb;
    if (d.kind == "lognormal") {
        m.demand = make_truncated_lognormal_demand(d.mean_gb * 1000.0 / u, gb_to_units(d.max_gb, u), d.sigma_log, u);
    } else if (d.kind == "uniform") {
        m.demand = make_uniform_demand(gb_to_units(d.lo_gb, u), gb_to_units(d.hi_gb, u), u);
    } else if (d.kind == "pointmass") {
        m.demand = make_point_mass_demand(gb_to_units(d.d_gb, u), gb_to_units(d.max_gb, u), u);
    } else if (!d.table_csv.empty()) {
        m.demand = read_table_csv(d.table_csv, u);
    } else {
        m.demand = make_demand_from_pmf(d.pmf, u);
    }
    for (const auto& op : s.operators) {
        const int q = gb_to_units(op.cap_gb, u);
        if (q < 1) throw ScenarioError("field 'operators.cap_gb': cap rounds to zero data units");
        if (q >= m.demand->max_units()) throw ScenarioError("field 'operators.cap_gb': cap must lie below the maximal demand");
        m.caps.push_back(q);
        m.usage.push_back(make_usage_pair(*m.demand, q, s.beta));
    }
    return m;
}

Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    Scenario s;
    s.name = str_or(j, "name", "", "scenario");
    const std::string units = str_or(j, "units", "", "rmb_per_gb");
    require(units == "rmb_per_gb" || units == "native", "units", "must be \"rmb_per_gb\" or \"native\"");
    s.units = units == "native" ? MoneyUnits::Native : MoneyUnits::RmbPerGb;
    s.unit_mb = num_or(j, "unit_mb", "", 10.0);
    require(s.unit_mb > 0.0, "unit_mb", "must be positive");
    s.beta = num(j, "beta", "");
    require(s.beta > 0.0 && s.beta <= 1.0, "beta", "must lie in (0, 1]");

    if (j.contains("strengths")) {
        const auto& a = j.at("strengths");
        require(a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number(), "strengths",
                "must be two numbers");
        s.strengths = std::array<double, 2>{a[0].get<double>(), a[1].get<double>()};
        require((*s.strengths)[0] > 0.0 && (*s.strengths)[1] > 0.0, "strengths", "must be positive");
    }

    if (!s.strengths) {
        require(j.contains("demand") && j.at("demand").is_object(), "demand", "missing");
        const auto& d = j.at("demand");
        auto& ds = s.demand;
        ds.kind = str_or(d, "kind", "demand", "lognormal");
        if (ds.kind == "lognormal") {
            ds.mean_gb = num(d, "mean_gb", "demand");
            ds.max_gb = num(d, "max_gb", "demand");
            ds.sigma_log = num_or(d, "sigma_log", "demand", 1.0);
            require(ds.mean_gb > 0.0 && ds.mean_gb < ds.max_gb, "demand.mean_gb", "must lie in (0, max_gb)");
            require(ds.sigma_log > 0.0, "demand.sigma_log", "must be positive");
        } else if (ds.kind == "uniform") {
            ds.lo_gb = num(d, "lo_gb", "demand");
            ds.hi_gb = num(d, "hi_gb", "demand");
            require(ds.lo_gb >= 0.0 && ds.hi_gb > ds.lo_gb, "demand.hi_gb", "need 0 <= lo_gb < hi_gb");
        } else if (ds.kind == "pointmass") {
            ds.d_gb = num(d, "d_gb", "demand");
            ds.max_gb = num(d, "max_gb", "demand");
            require(ds.d_gb >= 0.0 && ds.d_gb <= ds.max_gb && ds.max_gb > 0.0, "demand.d_gb", "must lie in [0, max_gb]");
        } else if (ds.kind == "table") {
            if (d.contains("csv")) {
                ds.table_csv = str_or(d, "csv", "demand", "");
            } else {
                require(d.contains("pmf") && d.at("pmf").is_array(), "demand.pmf", "table needs 'pmf' or 'csv'");
                for (const auto& v : d.at("pmf")) {
                    require(v.is_number(), "demand.pmf", "entries must be numbers");
                    ds.pmf.push_back(v.get<double>());
                }
            }
        } else {
            fail("demand.kind", "must be lognormal, uniform, pointmass or table");
        }
    }

    require(j.contains("valuation") && j.at("valuation").is_object(), "valuation", "missing");
    {
        const auto& v = j.at("valuation");
        auto& vs = s.valuation;
        vs.kind = str_or(v, "kind", "valuation", "gamma");
        if (vs.kind == "gamma") {
            vs.k = num(v, "k", "valuation");
            vs.scale = num(v, "scale", "valuation");
            vs.scale_factor = num_or(v, "scale_factor", "valuation", 100.0);
            vs.trunc_quantile = num_or(v, "trunc_quantile", "valuation", 0.9999);
            require(vs.k > 0.0, "valuation.k", "must be positive");
            require(vs.scale > 0.0 && vs.scale_factor > 0.0, "valuation.scale", "scale and scale_factor must be positive");
            require(vs.trunc_quantile > 0.99 && vs.trunc_quantile < 1.0, "valuation.trunc_quantile",
                    "must lie in (0.99, 1)");
        } else if (vs.kind == "uniform") {
            vs.theta_max = num(v, "theta_max", "valuation");
            require(vs.theta_max > 0.0, "valuation.theta_max", "must be positive");
        } else {
            fail("valuation.kind", "must be gamma or uniform");
        }
    }

    require(j.contains("operators") && j.at("operators").is_array(), "operators", "missing");
    const auto& ops = j.at("operators");
    require(ops.size() == 1 || ops.size() == 2, "operators", "need one (monopoly) or two operators");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const std::string path = "operators[" + std::to_string(i) + "]";
        OperatorSpec o;
        o.rho = num(ops[i], "rho", path);
        o.cost = num(ops[i], "cost", path);
        o.cap_gb = num_or(ops[i], "cap_gb", path, 1.0);
        require(o.rho > 0.0 && o.rho <= 1.0, path + ".rho", "must lie in (0, 1]");
        require(o.cost >= 0.0, path + ".cost", "must be non-negative");
        require(o.cap_gb > 0.0, path + ".cap_gb", "must be positive");
        if (ops[i].contains("mechanism"))
            o.mechanism = parse_mechanism(str_or(ops[i], "mechanism", path, ""), path + ".mechanism");
        s.operators.push_back(o);
    }
    if (s.strengths) require(s.operators.size() == 2, "strengths", "needs two operators");

    const std::string mode = str_or(j, "mode", "", "mechanism");
    require(mode == "mechanism" || mode == "fixed", "mode", "must be \"mechanism\" or \"fixed\"");
    s.fixed_mechanisms = mode == "fixed";
    if (s.fixed_mechanisms)
        for (std::size_t i = 0; i < s.operators.size(); ++i)
            require(s.operators[i].mechanism.has_value(), "operators[" + std::to_string(i) + "].mechanism",
                    "required when mode is \"fixed\"");

    if (j.contains("sweep")) s.sweep = parse_axis(j.at("sweep"), "sweep");
    if (j.contains("map")) {
        const auto& mp = j.at("map");
        require(mp.contains("x") && mp.contains("y"), "map", "needs 'x' and 'y' axes");
        s.map = std::array<Axis, 2>{parse_axis(mp.at("x"), "map.x"), parse_axis(mp.at("y"), "map.y")};
    }
    auto check_psi = [&](const Axis& a, const std::string& f) {
        if (a.var == "psi1" || a.var == "psi2")
            require(s.operators.size() == 2 && (s.strengths || s.fixed_mechanisms), f,
                    "psi axes need two operators with fixed mechanisms or strengths");
        if ((a.var == "c2" || a.var == "rho2") && s.operators.size() < 2) fail(f, "needs a second operator");
    };
    if (s.sweep) check_psi(*s.sweep, "sweep.var");
    if (s.map) {
        check_psi((*s.map)[0], "map.x.var");
        check_psi((*s.map)[1], "map.y.var");
    }

    if (j.contains("numerics")) {
        const auto& n = j.at("numerics");
        auto& ns = s.numerics;
        ns.undercut_step_rel = num_or(n, "undercut_step_rel", "numerics", ns.undercut_step_rel);
        ns.fixed_point_tol = num_or(n, "fixed_point_tol", "numerics", ns.fixed_point_tol);
        ns.consistency_tol = num_or(n, "consistency_tol", "numerics", ns.consistency_tol);
        ns.nash_eps_rel = num_or(n, "nash_eps_rel", "numerics", ns.nash_eps_rel);
        ns.mc_months = static_cast<long long>(num_or(n, "mc_months", "numerics", static_cast<double>(ns.mc_months)));
        require(ns.undercut_step_rel >= 0.0, "numerics.undercut_step_rel", "must be non-negative");
        require(ns.fixed_point_tol > 0.0, "numerics.fixed_point_tol", "must be positive");
        require(ns.consistency_tol > 0.0, "numerics.consistency_tol", "must be positive");
        require(ns.nash_eps_rel >= 0.0, "numerics.nash_eps_rel", "must be non-negative");
        require(ns.mc_months >= 1000, "numerics.mc_months", "must be at least 1000");
    }
    if (j.contains("output")) {
        const auto& o = j.at("output");
        s.format = str_or(o, "format", "output", "csv");
        s.output = str_or(o, "path", "output", "");
        require(s.format == "csv" || s.format == "json", "output.format", "must be csv or json");
    }
    return s;
}

Scenario parse_scenario_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    return parse_scenario(j);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

std::vector<std::string> preset_names() { return {"fig8", "fig12", "fig14", "monopoly", "regimes"}; }

std::string preset_text(const std::string& name) {
    const std::map<std::string, std::string> common{{"SIGMA", kSigmaLog}, {"SCALE", kScaleFactor}};
    auto fig = [&](const char* rho2) {
        auto vars = common;
        vars["NAME"] = name;
        vars["RHO2"] = rho2;
        return substitute(kPresetFig, vars);
    };
    if (name == "fig8") return fig("0.91");
    if (name == "fig12") return fig("0.95");
    if (name == "fig14") return fig("0.99");
    if (name == "monopoly") return substitute(kPresetMonopoly, common);
    if (name == "regimes") return kPresetRegimes;
    throw ScenarioError("unknown preset '" + name + "'");
}

Scenario preset_scenario(const std::string& name) { return parse_scenario_text(preset_text(name)); }

Scenario with_unit_mb(Scenario s, double unit_mb) {
    if (!(unit_mb > 0.0)) throw ScenarioError("unit_mb must be positive");
    s.unit_mb = unit_mb;
    return s;
}

std::vector<SweepRow> solve_point(const Scenario& s, const RunOptions& opt) {
    const ResolvedModel m = resolve_model(s);
    auto rows = guarded(s, m, base_params(s, m), opt);
    for (auto& r : rows) r.x = s.operators[0].cost;
    return rows;
}

std::vector<SweepRow> run_sweep(const Scenario& s, const RunOptions& opt) {
    if (!s.sweep) throw ScenarioError("scenario has no 'sweep' block");
    const ResolvedModel m = resolve_model(s);
    const auto& axis = *s.sweep;
    std::vector<std::vector<SweepRow>> out(axis.values.size());
    parallel_for(axis.values.size(), opt.jobs, [&](std::size_t i) {
        PointParams p = base_params(s, m);
        apply(p, axis.var, axis.values[i], m.money);
        out[i] = guarded(s, m, p, opt);
        for (auto& r : out[i]) r.x = axis.values[i];
    });
    std::vector<SweepRow> rows;
    for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

std::vector<SweepRow> run_regime_map(const Scenario& s, const RunOptions& opt) {
    if (!s.map) throw ScenarioError("scenario has no 'map' block");
    const ResolvedModel m = resolve_model(s);
    const auto& [ax, ay] = *s.map;
    const std::size_t nx = ax.values.size(), ny = ay.values.size();
    std::vector<std::vector<SweepRow>> out(nx * ny);
    parallel_for(nx * ny, opt.jobs, [&](std::size_t k) {
        const std::size_t iy = k / nx, ix = k % nx;
        PointParams p = base_params(s, m);
        apply(p, ax.var, ax.values[ix], m.money);
        apply(p, ay.var, ay.values[iy], m.money);
        out[k] = guarded(s, m, p, opt);
        for (auto& r : out[k]) {
            r.x = ax.values[ix];
            r.y = ay.values[iy];
        }
    });
    std::vector<SweepRow> rows;
    for (auto& v : out) rows.insert(rows.end(), v.begin(), v.end());
    return rows;
}

std::vector<MonteCarloCheck> monte_carlo_checks(const Scenario& s, std::uint64_t seed) {
    const ResolvedModel m = resolve_model(s);
    if (!m.demand) throw ScenarioError("Monte Carlo check needs a demand model");
    std::vector<MonteCarloCheck> out;
    std::vector<int> caps = m.caps;
    std::sort(caps.begin(), caps.end());
    caps.erase(std::unique(caps.begin(), caps.end()), caps.end());
    for (int q : caps) {
        const auto mc = simulate_rollover(*m.demand, q, s.numerics.mc_months, seed);
        out.push_back({q, expected_overage(*m.demand, q, Mechanism::R), mc.mean_overage, mc.std_error});
    }
    return out;
}

std::string format_rows(const std::vector<SweepRow>& rows, const std::string& format) {
    const bool two_d = std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.y.has_value(); });
    std::ostringstream os;
    if (format == "csv") {
        os << "swept_var,";
        if (two_d) os << "second_var,";
        os << "eq_label,kappa1,kappa2,sigma1,sigma2,theta_tilde,W1,W2,regime,flags\n";
        for (const auto& r : rows) {
            os << fmt12(r.x) << ',';
            if (two_d) os << (r.y ? fmt12(*r.y) : "") << ',';
            os << csv_field(r.eq_label) << ',' << r.kappa1 << ',' << r.kappa2 << ',' << fmt12(r.sigma1) << ','
               << fmt12(r.sigma2) << ',' << (r.theta_tilde ? fmt12(*r.theta_tilde) : "") << ',' << fmt12(r.W1)
               << ',' << fmt12(r.W2) << ',' << csv_field(r.regime) << ',' << csv_field(r.flags) << '\n';
        }
        return os.str();
    }
    if (format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
            json o;
            o["swept_var"] = round12(r.x);
            if (r.y) o["second_var"] = round12(*r.y);
            o["eq_label"] = r.eq_label;
            o["kappa1"] = r.kappa1;
            o["kappa2"] = r.kappa2;
            o["sigma1"] = round12(r.sigma1);
            o["sigma2"] = round12(r.sigma2);
            o["theta_tilde"] = r.theta_tilde ? json(round12(*r.theta_tilde)) : json(nullptr);
            o["W1"] = round12(r.W1);
            o["W2"] = round12(r.W2);
            o["regime"] = r.regime;
            o["flags"] = r.flags;
            arr.push_back(std::move(o));
        }
        return arr.dump(1) + "\n";
    }
    throw ScenarioError("unknown output format '" + format + "'");
}

void emit(const std::vector<SweepRow>& rows, const std::string& format, const std::string& path) {
    if (rows.empty()) throw ScenarioError("emit: no rows");
    const std::string text = format_rows(rows, format);
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ScenarioError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ScenarioError("write failed for '" + path + "'");
}

std::vector<SweepRow> rows_from_json(const std::string& text) {
    const json arr = json::parse(text);
    std::vector<SweepRow> rows;
    for (const auto& o : arr) {
        SweepRow r;
        r.x = o.at("swept_var").get<double>();
        if (o.contains("second_var")) r.y = o.at("second_var").get<double>();
        r.eq_label = o.at("eq_label").get<std::string>();
        r.kappa1 = o.at("kappa1").get<std::string>();
        r.kappa2 = o.at("kappa2").get<std::string>();
        r.sigma1 = o.at("sigma1").get<double>();
        r.sigma2 = o.at("sigma2").get<double>();
        if (!o.at("theta_tilde").is_null()) r.theta_tilde = o.at("theta_tilde").get<double>();
        r.W1 = o.at("W1").get<double>();
        r.W2 = o.at("W2").get<double>();
        r.regime = o.at("regime").get<std::string>();
        r.flags = o.at("flags").get<std::string>();
        rows.push_back(r);
    }
    return rows;
}

}  // namespace rollduo
