#include "barankin/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "barankin/errors.hpp"

namespace barankin {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double get_number(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> get_numbers(const json& j, const char* key) {
    const json& v = j.at(key);
    if (!v.is_array()) throw ConfigError(std::string("'") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(std::string("'") + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<double> scaled(std::vector<double> v, double k) {
    for (auto& x : v) x *= k;
    return v;
}

}  // namespace

ExperimentKind parse_kind(const std::string& s) {
    if (s == "snr-sweep") return ExperimentKind::SnrSweep;
    if (s == "angle-sweep") return ExperimentKind::AngleSweep;
    if (s == "bounds-only") return ExperimentKind::BoundsOnly;
    if (s == "verify") return ExperimentKind::Verify;
    throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SnrSweep: return "snr-sweep";
        case ExperimentKind::AngleSweep: return "angle-sweep";
        case ExperimentKind::BoundsOnly: return "bounds-only";
        case ExperimentKind::Verify: return "verify";
    }
    return "?";
}

DoaGrid ExperimentConfig::grid() const {
    DoaGrid g = h_nu_points.empty() ? standard_grid(h_nu_grid_size, h_nu_local) : DoaGrid{};
    if (!h_nu_points.empty()) g.h_nu = h_nu_points;
    g.h_phi = h_phi_set;
    g.h_alpha = {h_alpha};
    return g;
}

BoundSettings ExperimentConfig::bound_settings() const {
    BoundSettings b;
    b.grid = grid();
    b.include_cbtb = include_cbtb;
    if (low_complexity) {
        DoaGrid lc = low_complexity_grid(low_complexity_h_nu);
        lc.h_phi = h_phi_set;
        lc.h_alpha = {h_alpha};
        b.low_complexity = lc;
    }
    return b;
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("configuration must be an object");
    ExperimentConfig c;
    try {
        reject_unknown(j, {"experiment", "constraint", "scenario", "snr_list_db", "angle_list",
                           "angle_list_over_pi", "grid", "low_complexity", "include_cbtb",
                           "estimator", "trials", "seed", "output", "verify"},
                       "configuration");
        if (j.contains("experiment")) c.kind = parse_kind(j.at("experiment").get<std::string>());
        if (j.contains("constraint") && j.at("constraint").get<std::string>() != "doa-cm")
            throw ConfigError("experiments support only the 'doa-cm' constraint");
        if (j.contains("scenario")) {
            const json& s = j.at("scenario");
            reject_unknown(s, {"q_sensors", "zeta", "sigma2", "alpha", "phase", "doa_angle",
                               "doa_angle_over_pi", "phase_set"},
                           "scenario");
            if (s.contains("q_sensors")) c.scenario.q_sensors = s.at("q_sensors").get<int>();
            if (s.contains("zeta")) c.scenario.zeta = get_number(s, "zeta");
            if (s.contains("sigma2")) c.scenario.noise_variance = get_number(s, "sigma2");
            if (s.contains("alpha")) c.scenario.amplitude = get_number(s, "alpha");
            if (s.contains("phase_set")) c.scenario.phase_set = get_numbers(s, "phase_set");
            if (s.contains("phase")) c.scenario.phase = get_number(s, "phase");
            if (s.contains("doa_angle") && s.contains("doa_angle_over_pi"))
                throw ConfigError("give doa_angle or doa_angle_over_pi, not both");
            if (s.contains("doa_angle")) c.scenario.doa_angle = get_number(s, "doa_angle");
            if (s.contains("doa_angle_over_pi"))
                c.scenario.doa_angle = M_PI * get_number(s, "doa_angle_over_pi");
        }
        if (j.contains("snr_list_db")) c.snr_list_db = get_numbers(j, "snr_list_db");
        if (j.contains("angle_list") && j.contains("angle_list_over_pi"))
            throw ConfigError("give angle_list or angle_list_over_pi, not both");
        if (j.contains("angle_list")) c.angle_list = get_numbers(j, "angle_list");
        if (j.contains("angle_list_over_pi"))
            c.angle_list = scaled(get_numbers(j, "angle_list_over_pi"), M_PI);
        if (j.contains("grid")) {
            const json& g = j.at("grid");
            reject_unknown(g, {"h_nu_grid_size", "h_nu_points", "h_nu_local", "h_phi_set", "h_alpha"},
                           "grid");
            if (g.contains("h_nu_grid_size")) c.h_nu_grid_size = g.at("h_nu_grid_size").get<int>();
            if (g.contains("h_nu_points")) c.h_nu_points = get_numbers(g, "h_nu_points");
            if (g.contains("h_nu_local")) {
                if (g.at("h_nu_local").is_null())
                    c.h_nu_local.reset();
                else
                    c.h_nu_local = get_number(g, "h_nu_local");
            }
            if (g.contains("h_phi_set")) c.h_phi_set = get_numbers(g, "h_phi_set");
            if (g.contains("h_alpha")) c.h_alpha = get_number(g, "h_alpha");
        }
        if (j.contains("low_complexity")) {
            const json& l = j.at("low_complexity");
            reject_unknown(l, {"enabled", "h_nu"}, "low_complexity");
            if (l.contains("enabled")) c.low_complexity = l.at("enabled").get<bool>();
            if (l.contains("h_nu")) c.low_complexity_h_nu = get_number(l, "h_nu");
        }
        if (j.contains("include_cbtb")) c.include_cbtb = j.at("include_cbtb").get<bool>();
        if (j.contains("estimator")) {
            const json& e = j.at("estimator");
            reject_unknown(e, {"angle_grid_size", "refine_tol"}, "estimator");
            if (e.contains("angle_grid_size"))
                c.estimator.angle_grid_size = e.at("angle_grid_size").get<int>();
            if (e.contains("refine_tol")) c.estimator.refine_tol = get_number(e, "refine_tol");
        }
        if (j.contains("trials")) {
            const long long t = j.at("trials").get<long long>();
            if (t < 2) throw ConfigError("trials must be >= 2");
            c.trials = static_cast<std::size_t>(t);
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output")) c.output = j.at("output").get<std::string>();
        if (j.contains("verify")) {
            const json& v = j.at("verify");
            reject_unknown(v, {"checks", "mc_scale", "gb_perturbation"}, "verify");
            if (v.contains("checks")) c.verify.checks = v.at("checks").get<std::vector<std::string>>();
            if (v.contains("mc_scale")) c.verify.mc_scale = get_number(v, "mc_scale");
            if (v.contains("gb_perturbation"))
                c.verify.gb_perturbation = get_number(v, "gb_perturbation");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid configuration value: ") + e.what());
    }
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ExperimentConfig& c) {
    try {
        c.scenario.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    if (c.h_nu_grid_size < 1) throw ConfigError("h_nu_grid_size must be >= 1");
    if (c.h_phi_set.empty()) throw ConfigError("h_phi_set is empty");
    for (double h : c.h_phi_set)
        if (std::abs(wrap_angle(h)) < 1e-12) throw ConfigError("h_phi = 0 is not a valid candidate");
    if (!(c.scenario.amplitude + c.h_alpha > 0.0) || c.h_alpha == 0.0)
        throw ConfigError("h_alpha must be nonzero and keep the amplitude positive");
    if (c.estimator.angle_grid_size < 1) throw ConfigError("angle_grid_size must be >= 1");
    if (!(c.estimator.refine_tol > 0.0)) throw ConfigError("refine_tol must be positive");
    if (c.trials < 2) throw ConfigError("trials must be >= 2");
    if (!(c.verify.mc_scale > 0.0)) throw ConfigError("mc_scale must be positive");
    for (double v : c.snr_list_db)
        if (!std::isfinite(v)) throw ConfigError("non-finite SNR value");
    for (double v : c.angle_list)
        if (!std::isfinite(v)) throw ConfigError("non-finite angle value");
    if (c.kind == ExperimentKind::SnrSweep && c.snr_list_db.empty())
        throw ConfigError("snr-sweep needs a nonempty snr_list_db");
    if (c.kind == ExperimentKind::AngleSweep && c.angle_list.empty())
        throw ConfigError("angle-sweep needs a nonempty angle_list");
}

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        item = item.substr(b, item.find_last_not_of(" \t") - b + 1);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw ConfigError("bad number '" + item + "' in list");
        }
        if (pos != item.size()) throw ConfigError("bad number '" + item + "' in list");
        out.push_back(v);
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

struct SweepPoint {
    double x;
    DoaScenario s;
};

// Sweep variable chosen by experiment kind; bounds-only follows whichever
// list is present and falls back to the configured amplitude.
std::pair<std::string, std::vector<SweepPoint>> sweep_points(const ExperimentConfig& c) {
    std::vector<SweepPoint> pts;
    const bool by_angle = c.kind == ExperimentKind::AngleSweep ||
                          (c.kind != ExperimentKind::SnrSweep && c.snr_list_db.empty() &&
                           !c.angle_list.empty());
    if (by_angle) {
        for (double a : c.angle_list) {
            DoaScenario s = c.scenario;
            s.doa_angle = wrap_angle(a);
            pts.push_back({a, s});
        }
        return {"doa_angle", pts};
    }
    if (c.snr_list_db.empty()) {
        pts.push_back({10.0 * std::log10(c.scenario.snr()), c.scenario});
    } else {
        for (double snr : c.snr_list_db) pts.push_back({snr, with_snr_db(c.scenario, snr)});
    }
    return {"snr_db", pts};
}

void append_row(std::string& out, const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (i) out += ',';
        out += format_number(vals[i]);
    }
    out += '\n';
}

}  // namespace

std::string cmd_bounds(const ExperimentConfig& c) {
    validate_config(c);
    const auto [name, pts] = sweep_points(c);
    const BoundSettings bs = c.bound_settings();
    std::string out = name + ",lu_cbtb,cbtb,argmax_h_nu,argmax_h_phi,candidate_count,saturated_count";
    if (bs.low_complexity) out += ",low_complexity_lu_cbtb";
    out += '\n';
    for (const auto& p : pts) {
        const BoundResult lu = lu_cbtb_closed_form(p.s, bs.grid);
        const BoundResult cb = cbtb_closed_form(p.s, bs.grid);
        std::vector<double> row{p.x, lu.value, cb.value, lu.argmax_params[0], lu.argmax_params[1],
                                static_cast<double>(lu.candidate_log.size()),
                                static_cast<double>(lu.saturated_count)};
        if (bs.low_complexity) row.push_back(lu_cbtb_closed_form(p.s, *bs.low_complexity).value);
        append_row(out, row);
    }
    return out;
}

std::string cmd_simulate(const ExperimentConfig& c) {
    validate_config(c);
    const BoundSettings bs = c.bound_settings();
    std::vector<SweepRecord> recs;
    std::string name;
    if (c.kind == ExperimentKind::AngleSweep) {
        name = "doa_angle";
        recs = angle_sweep(c.scenario, c.angle_list, c.estimator, c.trials, c.seed, bs);
    } else if (c.kind == ExperimentKind::SnrSweep) {
        name = "snr_db";
        recs = snr_sweep(c.scenario, c.snr_list_db, c.estimator, c.trials, c.seed, bs);
    } else {
        throw ConfigError("simulate needs an snr-sweep or angle-sweep experiment");
    }
    std::string out = name +
                      ",cml_wmse,cml_wmse_se,bias_norm,bias_norm_se,c_bias_norm,c_bias_norm_se,lu_cbtb";
    if (bs.include_cbtb) out += ",cbtb";
    if (bs.low_complexity) out += ",low_complexity_lu_cbtb";
    out += '\n';
    for (const auto& r : recs) {
        std::vector<double> row{r.x,
                                r.stats.wmse,
                                r.stats.wmse_se,
                                r.stats.bias_norm,
                                r.stats.bias_norm_se,
                                r.stats.c_bias_norm,
                                r.stats.c_bias_norm_se,
                                r.lu_cbtb};
        if (bs.include_cbtb) row.push_back(*r.cbtb);
        if (bs.low_complexity) row.push_back(*r.low_complexity_lu_cbtb);
        append_row(out, row);
    }
    return out;
}

}  // namespace barankin
