#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "foliate/io.hpp"
#include "foliate/parallel.hpp"
#include "foliate/symbols.hpp"
#include "phantom.hpp"

namespace foliate::cli {

namespace fs = std::filesystem;

namespace {

std::string out_path(const Config& cfg, const std::string& name) {
    fs::path dir = cfg.str("out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + ec.message(), dir.string());
    return (dir / name).string();
}

// Configuration without the keys that do not change results.
std::string echo(const Config& cfg) {
    nlohmann::json j = cfg.raw();
    j.erase("out");
    j.erase("threads");
    return j.dump();
}

void write_echo(const Config& cfg) {
    std::ofstream f(out_path(cfg, "config.json"));
    f << nlohmann::json::parse(echo(cfg)).dump(2) << "\n";
}

double rms_valid(const Sinogram& s) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s.valid[k]) {
            sum += s.values[k] * s.values[k];
            ++n;
        }
    return n ? std::sqrt(sum / n) : 0.0;
}

bool same_layout(const AdaptedProfile& u, const RayBundle& b) {
    return u.size() == b.nodes() && std::abs(u.s_min() - b.s_min()) <= 1e-12 &&
           std::abs(u.spacing() - b.spacing()) <= 1e-12;
}

// Data for the inversion commands: read from "data" or simulated from the phantom.
// `truth` is set only for simulated data.
Sinogram inversion_data(const Config& cfg, const Scene& scene, const RayBundle& bundle,
                        std::optional<AdaptedProfile>& truth) {
    const std::string path = cfg.str("data");
    if (!path.empty()) {
        if (!fs::exists(grid_base(path) + ".json"))
            throw UsageError("data file '" + path + "' not found");
        Sinogram s = read_sinogram(path);
        if (!same_axes(s.grid, scene.grid))
            throw UsageError("data file '" + path + "' is not on the configured ray grid (check ray_n, ray_nl, ray_C)");
        return s;
    }
    truth = make_phantom(cfg.str("phantom"), cfg, scene.c(), cfg.integer("profile_nodes"));
    Sinogram s = same_layout(*truth, bundle)
                     ? restricted_forward(*truth, bundle)
                     : sinogram(scene.geo, scene.weight, adapted_field(*truth, scene.geo.fol), scene.grid, scene.h);
    const double noise = cfg.num("noise");
    if (noise > 0.0) {
        const double sigma = noise * rms_valid(s);
        std::mt19937_64 rng(static_cast<std::uint64_t>(cfg.integer("seed")));
        std::normal_distribution<double> n01;
        for (std::size_t k = 0; k < s.size(); ++k)
            if (s.valid[k]) s.values[k] += sigma * n01(rng);
    }
    return s;
}

void write_residuals(const std::string& path, const std::vector<double>& res, const std::string& meta) {
    CsvWriter csv(path, {"iteration", "residual"}, meta);
    for (std::size_t i = 0; i < res.size(); ++i) {
        csv << static_cast<long long>(i) << res[i];
        csv.end_row();
    }
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"forward",     "normal-op", "symbol-check", "reconstruct",
                                                "layer-strip", "stability", "probe"};
    return names;
}

int cmd_forward(const Config& cfg, std::ostream& log) {
    Geometry geo = make_geometry(cfg);
    WeightSpec w = make_weight(cfg);
    const int nodes = cfg.integer("profile_nodes");
    ScalarField f = make_phantom_field(cfg, geo.fol, nodes);
    const std::string meta = echo(cfg);
    auto z = cfg.list("ray_z"), v = cfg.list("ray_v");
    if (!z.empty() || !v.empty()) {
        if (z.size() != 2 || v.size() != 2) throw UsageError("ray_z and ray_v need two entries each");
        XrayResult r = xray(geo, w, f, {z[0], z[1]}, {v[0], v[1]}, cfg.num("h"));
        CsvWriter csv(out_path(cfg, "summary.csv"), {"value", "time_capped", "exit_forward", "exit_backward"}, meta);
        csv << r.value << static_cast<long long>(r.time_capped) << to_string(r.exit_forward)
            << to_string(r.exit_backward);
        csv.end_row();
        log << "ray value " << r.value << (r.time_capped ? " (time capped)" : "") << "\n";
        write_echo(cfg);
        return kPass;
    }
    Scene scene = make_cli_scene(cfg);
    Sinogram s = sinogram(geo, w, f, scene.grid, scene.h);
    write_sinogram(out_path(cfg, "sinogram"), s, meta);
    std::size_t valid = 0;
    double lo = 0.0, hi = 0.0, l2 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (s.valid[k]) {
            lo = valid ? std::min(lo, s.values[k]) : s.values[k];
            hi = valid ? std::max(hi, s.values[k]) : s.values[k];
            l2 += s.values[k] * s.values[k];
            ++valid;
        }
    CsvWriter csv(out_path(cfg, "summary.csv"), {"entries", "valid", "capped", "min", "max", "l2"}, meta);
    csv << static_cast<long long>(s.size()) << static_cast<long long>(valid) << static_cast<long long>(s.capped) << lo
        << hi << std::sqrt(l2);
    csv.end_row();
    log << "sinogram " << valid << "/" << s.size() << " valid entries, " << s.capped << " capped, max " << hi << "\n";
    write_echo(cfg);
    return kPass;
}

int cmd_normal_op(const Config& cfg, std::ostream& log) {
    Geometry geo = make_geometry(cfg);
    WeightSpec w = make_weight(cfg);
    NormalOpConfig ncfg = make_normal_op_config(cfg, geo);
    ScalarField f = make_phantom_field(cfg, geo.fol, cfg.integer("profile_nodes"));
    const int n = cfg.integer("frame_points");
    if (n < 1) throw UsageError("frame_points must be >= 1");
    const double c = geo.fol.c;
    std::vector<Vec2> pts;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            double x = n == 1 ? 0.5 * c : c * (0.2 + 0.6 * i / (n - 1));
            double y = n == 1 ? 0.0 : -0.2 + 0.4 * j / (n - 1);
            pts.push_back({x, y});
        }
    AFResult a = apply_AF(f, ncfg, geo, w, pts);
    AFResult b = apply_AF_composed(f, ncfg, geo, w, pts);
    double amax = 0.0, dmax = 0.0;
    bool finite = true;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        finite = finite && std::isfinite(a.values[k]) && std::isfinite(b.values[k]);
        amax = std::max(amax, std::abs(a.values[k]));
        dmax = std::max(dmax, std::abs(a.values[k] - b.values[k]));
    }
    const double dev = !finite ? std::nan("") : amax > 0.0 ? dmax / amax : dmax;
    const std::string meta = echo(cfg);
    {
        CsvWriter csv(out_path(cfg, "normal_op.csv"), {"x", "y", "direct", "composed", "difference"}, meta);
        for (std::size_t k = 0; k < pts.size(); ++k) {
            csv << pts[k].x << pts[k].y << a.values[k] << b.values[k] << a.values[k] - b.values[k];
            csv.end_row();
        }
    }
    const bool pass = dev <= cfg.num("max_deviation") && a.dropped == 0 && b.dropped == 0;
    CsvWriter csv(out_path(cfg, "summary.csv"), {"points", "max_abs", "relative_deviation", "dropped", "status"}, meta);
    csv << static_cast<long long>(pts.size()) << amax << dev << static_cast<long long>(a.dropped + b.dropped)
        << std::string(pass ? "PASS" : "FAIL");
    csv.end_row();
    log << "normal operator routes: relative deviation " << dev << (pass ? " PASS" : " FAIL") << "\n";
    write_echo(cfg);
    return pass ? kPass : kFail;
}

int cmd_symbol_check(const Config& cfg, std::ostream& log) {
    Geometry geo = make_geometry(cfg);
    WeightSpec w = make_weight(cfg);
    NormalOpConfig ncfg = make_normal_op_config(cfg, geo);
    std::vector<Vec2> base;
    for (double y : cfg.list("symbol_y")) base.push_back({0.0, y});
    const double r_min = cfg.num("symbol_r_min");
    SymbolGrid grid = make_symbol_grid(base, r_min, cfg.num("symbol_r_max"), cfg.integer("symbol_radii"),
                                       cfg.integer("symbol_angles"));
    grid.values.assign(base.size() * grid.radii.size() * grid.angles.size(), 0.0);
    parallel_for(grid.values.size(), [&](std::size_t k) {
        std::size_t ia = k % grid.angles.size(), ir = (k / grid.angles.size()) % grid.radii.size(),
                    b = k / (grid.angles.size() * grid.radii.size());
        grid.values[grid.index(b, ir, ia)] = numeric_symbol(base[b], grid.xi(ir, ia), grid.eta(ir, ia), ncfg, geo, w);
    });
    ConeSpec cone{cfg.num("cone_aperture"), 0.0};
    cone.validate();
    EllipticityReport scan = ellipticity_scan(grid, cone, r_min);
    const std::string meta = echo(cfg);
    {
        CsvWriter csv(out_path(cfg, "certificate.csv"), {"base_y", "xi", "eta", "radius", "value", "status"}, meta);
        for (auto& r : scan.rows) {
            csv << base[r.base].y << r.xi << r.eta << r.radius << r.value << r.status;
            csv.end_row();
        }
    }

    // one-constant calibration against the closed form, Gaussian cutoff and constant weight only
    const bool calibrate = cfg.str("chi") == "gaussian" && w.kind() == WeightSpec::Kind::Constant;
    double constant = std::nan(""), max_rel = std::nan("");
    std::size_t in_cone = 0;
    if (calibrate) {
        FoliationFrame frame(geo);
        std::vector<cplx> num;
        std::vector<double> closed;
        struct Node {
            double y, xi, eta;
        };
        std::vector<Node> nodes;
        for (std::size_t b = 0; b < base.size(); ++b) {
            const double alpha = frame.alpha_boundary(base[b].y);
            for (std::size_t ir = 0; ir < grid.radii.size(); ++ir)
                for (std::size_t ia = 0; ia < grid.angles.size(); ++ia) {
                    double xi = grid.xi(ir, ia), eta = grid.eta(ir, ia);
                    if (!cone.contains(xi, eta) || grid.radii[ir] < r_min) continue;
                    num.push_back(grid.values[grid.index(b, ir, ia)]);
                    closed.push_back(boundary_symbol_closed(xi, eta, ncfg.F, alpha) * w.diagonal(geo, base[b], {1, 0}));
                    nodes.push_back({base[b].y, xi, eta});
                }
        }
        in_cone = num.size();
        if (in_cone > 0) {
            constant = calibrate_constant(num, closed);
            max_rel = 0.0;
            CsvWriter csv(out_path(cfg, "calibration.csv"),
                          {"base_y", "xi", "eta", "numeric_re", "numeric_im", "calibrated_closed", "relative_error"},
                          meta);
            for (std::size_t k = 0; k < num.size(); ++k) {
                double ref = constant * closed[k], rel = std::abs(num[k] - ref) / std::abs(ref);
                max_rel = std::max(max_rel, rel);
                csv << nodes[k].y << nodes[k].xi << nodes[k].eta << num[k].real() << num[k].imag() << ref << rel;
                csv.end_row();
            }
        }
    }
    const bool calib_ok = !calibrate || (in_cone > 0 && max_rel <= cfg.num("calibration_tol"));
    const bool pass = scan.certified() && calib_ok;
    CsvWriter csv(out_path(cfg, "summary.csv"),
                  {"min_value", "violations", "calibration_constant", "calibration_max_rel_error", "status"}, meta);
    csv << scan.min_value << static_cast<long long>(scan.violations.size()) << constant << max_rel
        << std::string(pass ? "PASS" : "FAIL");
    csv.end_row();
    log << "ellipticity min " << scan.min_value << ", violations " << scan.violations.size();
    if (calibrate) log << ", calibration constant " << constant << " max rel error " << max_rel;
    log << (pass ? " PASS" : " FAIL") << "\n";
    write_echo(cfg);
    return pass ? kPass : kFail;
}

int cmd_reconstruct(const Config& cfg, std::ostream& log) {
    Scene scene = make_cli_scene(cfg);
    InversionConfig icfg = make_inversion_config(cfg);
    RayBundle bundle(scene, icfg.profile_nodes);
    std::optional<AdaptedProfile> truth;
    Sinogram data = inversion_data(cfg, scene, bundle, truth);
    auto [u, rep] = local_reconstruct(data, bundle, scene, icfg, truth ? &*truth : nullptr);
    const std::string meta = echo(cfg);
    write_profile(out_path(cfg, "profile"), u, meta);
    write_residuals(out_path(cfg, "residuals.csv"), rep.residuals, meta);
    const bool pass = !truth || rep.relative_error <= cfg.num("max_error");
    CsvWriter csv(out_path(cfg, "report.csv"),
                  {"relative_error", "stability_ratio", "condition_estimate", "mu", "iterations", "converged",
                   "stagnated", "status"},
                  meta);
    csv << rep.relative_error << rep.stability_ratio << rep.condition_estimate << rep.mu
        << static_cast<long long>(rep.iterations) << static_cast<long long>(rep.converged)
        << static_cast<long long>(rep.stagnated) << std::string(pass ? "PASS" : "FAIL");
    csv.end_row();
    log << "reconstruction: " << rep.iterations << " iterations";
    if (truth) log << ", relative error " << rep.relative_error;
    log << (rep.stagnated ? " (stagnated)" : "") << (pass ? " PASS" : " FAIL") << "\n";
    write_echo(cfg);
    return pass ? kPass : kFail;
}

int cmd_layer_strip(const Config& cfg, std::ostream& log) {
    Scene scene = make_cli_scene(cfg);
    InversionConfig icfg = make_inversion_config(cfg);
    RayBundle bundle(scene, icfg.profile_nodes);
    std::optional<AdaptedProfile> truth;
    Sinogram data = inversion_data(cfg, scene, bundle, truth);
    LayerStripResult res = layer_strip(data, bundle, scene, icfg, cfg.integer("slabs"), truth ? &*truth : nullptr);
    const std::string meta = echo(cfg);
    write_profile(out_path(cfg, "profile"), res.profile, meta);
    bool pass = true;
    CsvWriter csv(out_path(cfg, "layers.csv"),
                  {"slab", "s_lo", "s_hi", "relative_error", "rays", "iterations", "stagnated", "status"}, meta);
    for (std::size_t k = 0; k < res.layers.size(); ++k) {
        const auto& l = res.layers[k];
        bool ok = !truth || l.relative_error <= cfg.num("max_slab_error");
        pass = pass && ok;
        csv << static_cast<long long>(k) << l.s_lo << l.s_hi << l.relative_error
            << static_cast<long long>(l.rays_used) << static_cast<long long>(l.iterations)
            << static_cast<long long>(l.stagnated) << std::string(ok ? "PASS" : "FAIL");
        csv.end_row();
        log << "slab " << k << " [" << l.s_lo << ", " << l.s_hi << "]";
        if (truth) log << " relative error " << l.relative_error;
        log << (ok ? " PASS" : " FAIL") << "\n";
    }
    write_echo(cfg);
    return pass ? kPass : kFail;
}

int cmd_stability(const Config& cfg, std::ostream& log) {
    InversionConfig icfg = make_inversion_config(cfg);
    const int count = cfg.integer("family");
    const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    StabilityReport coarse = stability_report(make_cli_scene(cfg, 1), icfg, count, seed);
    std::optional<StabilityReport> fine;
    if (cfg.flag("refine")) fine = stability_report(make_cli_scene(cfg, 2), icfg, count, seed);
    const double drift = fine ? std::abs(fine->max_ratio / coarse.max_ratio - 1.0) : 0.0;
    const bool alarm = coarse.alarm || (fine && fine->alarm);
    const bool pass = !alarm && std::isfinite(coarse.max_ratio) && (!fine || std::isfinite(fine->max_ratio)) &&
                      drift <= cfg.num("max_drift");
    const std::string meta = echo(cfg);
    {
        CsvWriter csv(out_path(cfg, "ratios.csv"), {"member", "ratio", "ratio_refined"}, meta);
        for (std::size_t k = 0; k < coarse.ratios.size(); ++k) {
            csv << static_cast<long long>(k) << coarse.ratios[k] << (fine ? fine->ratios[k] : std::nan(""));
            csv.end_row();
        }
    }
    CsvWriter csv(out_path(cfg, "summary.csv"),
                  {"members", "max_ratio", "median_ratio", "max_ratio_refined", "drift", "alarm", "status"}, meta);
    csv << static_cast<long long>(count) << coarse.max_ratio << coarse.median_ratio
        << (fine ? fine->max_ratio : std::nan("")) << drift << static_cast<long long>(alarm)
        << std::string(pass ? "PASS" : "FAIL");
    csv.end_row();
    log << "stability: max ratio " << coarse.max_ratio;
    if (fine) log << ", refined " << fine->max_ratio << ", drift " << drift;
    if (alarm) log << ", INJECTIVITY ALARM";
    log << (pass ? " PASS" : " FAIL") << "\n";
    write_echo(cfg);
    return pass ? kPass : kFail;
}

int cmd_probe(const Config& cfg, std::ostream& log) {
    InversionConfig icfg = make_inversion_config(cfg);
    auto table = contraction_probe(
        [&](double c) {
            Config local = cfg;
            local.set("c", c);
            return make_cli_scene(local);
        },
        icfg);
    bool pass = true;
    CsvWriter csv(out_path(cfg, "probe.csv"), {"c", "sigma_min", "sigma_max", "condition", "flagged"}, echo(cfg));
    for (auto& r : table) {
        pass = pass && !r.flagged;
        csv << r.c << r.sigma_min << r.sigma_max << r.condition << static_cast<long long>(r.flagged);
        csv.end_row();
        log << "c " << r.c << ": sigma_min " << r.sigma_min << ", condition " << r.condition
            << (r.flagged ? " (flagged)" : "") << "\n";
    }
    write_echo(cfg);
    return pass ? kPass : kFail;
}

int run_command(const std::string& name, const Config& cfg, std::ostream& log, std::ostream& err) {
    try {
        if (name == "forward") return cmd_forward(cfg, log);
        if (name == "normal-op") return cmd_normal_op(cfg, log);
        if (name == "symbol-check") return cmd_symbol_check(cfg, log);
        if (name == "reconstruct") return cmd_reconstruct(cfg, log);
        if (name == "layer-strip") return cmd_layer_strip(cfg, log);
        if (name == "stability") return cmd_stability(cfg, log);
        if (name == "probe") return cmd_probe(cfg, log);
        err << "error: unknown command '" << name << "'\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "error: " << e.what() << ": " << e.path() << "\n";
        return kUsage;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << "\n";
        return kFail;
    }
}

}  // namespace foliate::cli
