#include "phantom.hpp"

#include <cmath>
#include <numbers>

namespace foliate::cli {

namespace {

double centre(const Config& cfg, double c) { return cfg.is_null("phantom_center") ? -0.5 * c : cfg.num("phantom_center"); }
double width(const Config& cfg, double c) {
    double w = cfg.is_null("phantom_width") ? c / 7.5 : cfg.num("phantom_width");
    if (!(w > 0.0)) throw ValidationError("phantom_width must be positive");
    return w;
}

}  // namespace

double gaussian_bump_mass(const Config& cfg, double c) {
    const double a = cfg.num("phantom_amplitude"), s0 = centre(cfg, c), w = width(cfg, c);
    const double k = std::sqrt(2.0) * w;
    return a * w * std::sqrt(std::numbers::pi / 2.0) * (std::erf((0.0 - s0) / k) - std::erf((-c - s0) / k));
}

AdaptedProfile make_phantom(const std::string& kind, const Config& cfg, double c, int nodes) {
    using Out = AdaptedProfile::Outside;
    const double a = cfg.num("phantom_amplitude");
    if (kind == "zero") return AdaptedProfile::sampled(-c, 0.0, nodes, [](double) { return 0.0; }, Out::Zero);
    if (kind == "gaussian-bump") {
        const double s0 = centre(cfg, c), w = width(cfg, c);
        return AdaptedProfile::sampled(
            -c, 0.0, nodes, [&](double s) { return a * std::exp(-0.5 * (s - s0) * (s - s0) / (w * w)); }, Out::Zero);
    }
    if (kind == "piecewise-linear") {
        auto knots = cfg.list("phantom_knots"), vals = cfg.list("phantom_values");
        if (knots.empty() && vals.empty()) {
            knots = {-c, -0.5 * c, 0.0};
            vals = {1.75, 1.0, 1.6};
        }
        if (knots.size() != vals.size() || knots.size() < 2)
            throw ValidationError("phantom_knots and phantom_values need equal lengths >= 2");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (!(knots[i] > knots[i - 1])) throw ValidationError("phantom_knots must increase");
        return AdaptedProfile::sampled(-c, 0.0, nodes, [&](double s) {
            if (s <= knots.front()) return a * vals.front();
            if (s >= knots.back()) return a * vals.back();
            std::size_t i = 1;
            while (knots[i] < s) ++i;
            double t = (s - knots[i - 1]) / (knots[i] - knots[i - 1]);
            return a * ((1 - t) * vals[i - 1] + t * vals[i]);
        }, Out::Zero);
    }
    if (kind == "step") {
        const double d = cfg.num("phantom_mollify"), s0 = centre(cfg, c);
        if (!(d > 0.0)) throw ValidationError("step phantom needs a positive mollification width");
        return AdaptedProfile::sampled(
            -c, 0.0, nodes, [&](double s) { return 0.5 * a * (1.0 + std::erf((s - s0) / (std::sqrt(2.0) * d))); },
            Out::Zero);
    }
    if (kind == "deep-support") {
        // smooth bump on [-c, -c/2], flat to all orders at both ends
        const double mid = -0.75 * c, r = 0.25 * c;
        return AdaptedProfile::sampled(-c, -0.5 * c, nodes, [&](double s) {
            double q = (s - mid) / r;
            return std::abs(q) < 1.0 ? a * std::exp(1.0 - 1.0 / (1.0 - q * q)) : 0.0;
        }, Out::Zero);
    }
    throw UsageError("unknown phantom kind '" + kind +
                     "' (zero, gaussian-bump, piecewise-linear, step, deep-support, disk)");
}

ScalarField make_phantom_field(const Config& cfg, const FoliationSpec& fol, int nodes) {
    const std::string kind = cfg.str("phantom");
    if (kind == "disk") {
        auto ctr = cfg.list("disk_center");
        if (ctr.size() != 2) throw UsageError("disk_center must have two entries");
        const Vec2 z0{ctr[0], ctr[1]};
        const double r = cfg.num("disk_radius"), a = cfg.num("phantom_amplitude");
        return [z0, r, a](Vec2 z) {
            Vec2 d{z.x - z0.x, z.y - z0.y};
            return d.x * d.x + d.y * d.y <= r * r ? a : 0.0;
        };
    }
    AdaptedProfile u = make_phantom(kind, cfg, fol.c, nodes);
    return [u, &fol](Vec2 z) { return u(fol.xtilde(z).value); };
}

}  // namespace foliate::cli
