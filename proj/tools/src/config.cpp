#include "config.hpp"

#include <fstream>
#include <sstream>

#include "foliate/presets.hpp"

namespace foliate::cli {

using nlohmann::json;

const json& Config::defaults() {
    static const json d = {
        {"seed", 1},
        {"threads", 0},
        {"out", "foliate_out"},
        // geometry
        {"geometry", "disk"},
        {"metric", "euclidean"},
        {"kappa", 0.3},
        {"eps", 0.1},
        {"c", 0.3},
        {"theta", 0.0},
        {"chart", json::array()},
        {"weight", "constant"},
        {"weight_amplitude", 0.2},
        {"weight_wave", {3.0, 2.0}},
        // normal operator and symbols
        {"chi", "gaussian"},
        {"chi_C", 1.0},
        {"chi_tail", 1e-10},
        {"F", 1.0},
        {"lambda_step", 1.0 / 64.0},
        {"t_step", 2e-3},
        {"frame_points", 4},
        {"symbol_y", {0.0}},
        {"symbol_r_min", 4.0},
        {"symbol_r_max", 64.0},
        {"symbol_radii", 9},
        {"symbol_angles", 32},
        {"cone_aperture", 1.0},
        // transform and inversion grids
        {"ray_n", 32},
        {"ray_nl", 8},
        {"ray_C", 1.0},
        {"h", 5e-3},
        {"ray_z", json::array()},
        {"ray_v", json::array()},
        {"profile_nodes", 64},
        {"mu", -1.0},
        {"max_iterations", 1000},
        {"tolerance", 1e-10},
        {"inversion_F", 0.005},
        {"c_ladder", {0.3, 0.2, 0.1}},
        {"slabs", 2},
        {"family", 20},
        {"refine", true},
        // phantoms and data
        {"phantom", "gaussian-bump"},
        {"phantom_amplitude", 1.0},
        {"phantom_center", nullptr},
        {"phantom_width", nullptr},
        {"phantom_knots", json::array()},
        {"phantom_values", json::array()},
        {"phantom_mollify", 0.02},
        {"disk_center", {0.0, 0.0}},
        {"disk_radius", 1.0},
        {"data", ""},
        {"noise", 0.0},
        // pass thresholds
        {"max_error", 0.05},
        {"max_slab_error", 0.08},
        {"max_drift", 0.3},
        {"max_deviation", 1e-5},
        {"calibration_tol", 0.02},
    };
    return d;
}

Config::Config() : values_(defaults()) {}

Config Config::for_command(const std::string& command) {
    Config c;
    if (command == "normal-op") c.set("chi", "compact");
    return c;
}

void Config::set(const std::string& key, json value) {
    if (!values_.contains(key)) throw UsageError("unknown configuration key '" + key + "'");
    values_[key] = std::move(value);
}

void Config::merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file '" + path + "'");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    for (auto& [k, v] : j.items()) set(k, v);
}

void Config::set_override(const std::string& assignment) {
    std::string s = assignment;
    if (s.rfind("--", 0) == 0) s = s.substr(2);
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("override '" + assignment + "' is not --key=value");
    std::string key = s.substr(0, eq), text = s.substr(eq + 1);
    json v;
    try {
        v = json::parse(text);
    } catch (const json::parse_error&) {
        v = text;
    }
    set(key, std::move(v));
}

const json& Config::at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw UsageError("unknown configuration key '" + key + "'");
    return *it;
}

double Config::num(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw UsageError("configuration key '" + key + "' must be a number");
    return v.get<double>();
}

int Config::integer(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_integer()) throw UsageError("configuration key '" + key + "' must be an integer");
    return v.get<int>();
}

bool Config::flag(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw UsageError("configuration key '" + key + "' must be true or false");
    return v.get<bool>();
}

std::string Config::str(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw UsageError("configuration key '" + key + "' must be a string");
    return v.get<std::string>();
}

std::vector<double> Config::list(const std::string& key) const {
    const json& v = at(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw UsageError("configuration key '" + key + "' must be a list of numbers");
    std::vector<double> out;
    for (auto& e : v) {
        if (!e.is_number()) throw UsageError("configuration key '" + key + "' must be a list of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

bool Config::is_null(const std::string& key) const { return at(key).is_null(); }

Geometry make_geometry(const Config& cfg) {
    const std::string kind = cfg.str("geometry"), metric = cfg.str("metric");
    const double c = cfg.num("c");
    if (!(c > 0.0)) throw UsageError("c must be positive");
    if (kind == "disk") {
        if (metric != "euclidean" && metric != "conformal")
            throw UsageError("unknown metric preset '" + metric + "' (euclidean, conformal)");
        return disk_geometry(c, cfg.num("eps"), metric == "conformal" ? cfg.num("kappa") : 0.0);
    }
    if (kind == "halfplane") {
        if (metric != "euclidean") throw UsageError("the half-plane preset is Euclidean only");
        auto ch = cfg.list("chart");
        if (ch.empty()) return halfplane_geometry(c, cfg.num("theta"));
        if (ch.size() != 4) throw UsageError("chart must be [x_min, x_max, y_min, y_max]");
        return halfplane_geometry(c, cfg.num("theta"), {ch[0], ch[1], ch[2], ch[3]});
    }
    throw UsageError("unknown geometry preset '" + kind + "' (disk, halfplane)");
}

WeightSpec make_weight(const Config& cfg) {
    const std::string kind = cfg.str("weight");
    if (kind == "constant") return WeightSpec::constant();
    if (kind == "exit-point") {
        auto k = cfg.list("weight_wave");
        if (k.size() != 2) throw UsageError("weight_wave must have two entries");
        return WeightSpec::exit_point(cfg.num("weight_amplitude"), {k[0], k[1]});
    }
    throw UsageError("unknown weight preset '" + kind + "' (constant, exit-point)");
}

NormalOpConfig make_normal_op_config(const Config& cfg, const Geometry& geo) {
    NormalOpConfig n;
    n.F = cfg.num("F");
    n.lambda_step = cfg.num("lambda_step");
    n.t_step = cfg.num("t_step");
    const std::string chi = cfg.str("chi");
    if (chi == "gaussian") {
        if (!(n.F > 0.0)) throw UsageError("the Gaussian cutoff needs F > 0");
        n.chi = CutoffChi::gaussian(FoliationFrame(geo).alpha_boundary(0.0) / n.F, cfg.num("chi_tail"));
    } else if (chi == "compact") {
        n.chi = CutoffChi::compact(cfg.num("chi_C"));
    } else if (chi == "zero") {
        n.chi = CutoffChi::zero();
    } else {
        throw UsageError("unknown cutoff family '" + chi + "' (gaussian, compact, zero)");
    }
    n.validate();
    return n;
}

InversionConfig make_inversion_config(const Config& cfg) {
    InversionConfig i;
    i.mu = cfg.num("mu");
    i.max_iterations = cfg.integer("max_iterations");
    i.tolerance = cfg.num("tolerance");
    i.c_ladder = cfg.list("c_ladder");
    i.F = cfg.num("inversion_F");
    i.profile_nodes = cfg.integer("profile_nodes");
    i.validate();
    return i;
}

Scene make_cli_scene(const Config& cfg, int refine) {
    const int n = cfg.integer("ray_n"), nl = cfg.integer("ray_nl");
    if (n < 2 || nl < 1) throw UsageError("ray_n must be >= 2 and ray_nl >= 1");
    return make_scene(make_geometry(cfg), n * refine, nl * refine, cfg.num("ray_C"), cfg.num("h") / refine,
                      make_weight(cfg));
}

}  // namespace foliate::cli
