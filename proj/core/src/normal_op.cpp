#include "foliate/normal_op.hpp"

#include <cmath>

#include "foliate/error.hpp"
#include "foliate/parallel.hpp"

namespace foliate {

CutoffChi CutoffChi::compact(double C) {
    if (!(C > 0.0)) throw ValidationError("cutoff support radius must be positive");
    CutoffChi c;
    c.mode_ = Mode::Compact;
    c.radius_ = C;
    return c;
}

CutoffChi CutoffChi::gaussian(double nu, double tail_tol) {
    if (!(nu > 0.0)) throw ValidationError("gaussian cutoff needs nu > 0");
    if (!(tail_tol > 0.0 && tail_tol < 1.0)) throw ValidationError("tail tolerance must lie in (0, 1)");
    // erfc(R / sqrt(2 nu)) <= tail_tol
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (std::erfc(mid) > tail_tol ? lo : hi) = mid;
    }
    CutoffChi c;
    c.mode_ = Mode::Gaussian;
    c.nu_ = nu;
    c.radius_ = hi * std::sqrt(2.0 * nu);
    return c;
}

CutoffChi CutoffChi::zero() {
    CutoffChi c;
    c.mode_ = Mode::Zero;
    c.radius_ = 1.0;
    return c;
}

CutoffChi CutoffChi::truncated_at(double radius) const {
    if (!(radius > 0.0)) throw ValidationError("truncation radius must be positive");
    CutoffChi c = *this;
    c.radius_ = radius;
    return c;
}

double CutoffChi::operator()(double s) const {
    double a = std::abs(s);
    switch (mode_) {
        case Mode::Compact: {
            if (a >= radius_) return 0.0;
            double q = a / radius_;
            return std::exp(1.0 - 1.0 / (1.0 - q * q));
        }
        case Mode::Gaussian: return a > radius_ ? 0.0 : std::exp(-s * s / (2.0 * nu_));
        case Mode::Zero: return 0.0;
    }
    return 0.0;
}

void NormalOpConfig::validate() const {
    if (!(F > 0.0)) throw ValidationError("conjugation constant F must be positive");
    if (!(lambda_step > 0.0 && t_step > 0.0)) throw ValidationError("quadrature steps must be positive");
}

void NormalOpConfig::lambda_nodes(std::vector<double>& nodes, std::vector<double>& weights) const {
    const double R = chi.radius();
    int half = std::max(1, static_cast<int>(std::ceil(R / lambda_step)));
    double d = R / half;
    nodes.clear();
    weights.clear();
    for (int k = -half; k <= half; ++k) {
        nodes.push_back(k * d);
        weights.push_back(std::abs(k) == half ? 0.5 * d : d);
    }
}

double backproject_L(const RayFunctional& v, const FoliationFrame& frame, Vec2 z, const NormalOpConfig& cfg) {
    const FoliationSpec& fol = frame.geometry().fol;
    const double x = fol.depth(z);
    if (!(x > 0.0)) throw DomainError("backprojection needs x > 0");
    std::vector<double> nodes, weights;
    cfg.lambda_nodes(nodes, weights);
    double acc = 0.0;
    for (int omega : {1, -1}) {
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            double c = cfg.chi(nodes[k]);
            if (c == 0.0) continue;
            double lambda = x * nodes[k];
            RayLaunch L{x, z.y, lambda, static_cast<double>(omega), z, frame.tangent_to_chart(z, lambda, omega)};
            acc += weights[k] * x * c * v(L);
        }
    }
    return acc / (x * x);
}

namespace {

// Trapezoid over the two-sided segment in the t parameter of the launch vector.
struct SegmentIntegral {
    double value = 0.0;
    bool capped = false;
};

SegmentIntegral damped_segment(const Geometry& geo, const WeightSpec& w, const ScalarField& f, Vec2 z, Vec2 v,
                               double x, double F, double h) {
    ShootOptions opts = geo.shoot;
    opts.h = h;
    TwoSidedPath two = shoot_two_sided(geo.metric, geo.fol, z, v, opts);
    SegmentIntegral out;
    out.capped = two.forward.exit == ExitReason::TimeCap || two.backward.exit == ExitReason::TimeCap;
    std::vector<Vec2> pts;
    std::vector<double> ts;
    for (auto it = two.backward.samples.rbegin(); it != two.backward.samples.rend(); ++it) {
        pts.push_back(it->z);
        ts.push_back(-it->t);
    }
    for (std::size_t k = 1; k < two.forward.samples.size(); ++k) {
        pts.push_back(two.forward.samples[k].z);
        ts.push_back(two.forward.samples[k].t);
    }
    const std::size_t n = pts.size();
    std::vector<double> dt(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double d = 0.5 * (ts[k + 1] - ts[k]);
        dt[k] += d;
        dt[k + 1] += d;
    }
    std::vector<double> rho;
    if (w.per_ray()) rho.assign(n, w.ray_value(two));
    else rho = w.along(pts, dt);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double xp = geo.fol.depth(pts[k]);
        double fv = f(pts[k]);
        if (fv == 0.0 || !(xp > 0.0)) continue;
        double X = (xp - x) / (x * x);
        acc += dt[k] * std::exp(damping_exponent(F, x, X)) * fv * rho[k];
    }
    out.value = acc;
    return out;
}

}  // namespace

AFResult apply_AF(const ScalarField& f, const NormalOpConfig& cfg, const Geometry& geo, const WeightSpec& w,
                  const std::vector<Vec2>& frame_points) {
    cfg.validate();
    FoliationFrame frame(geo);
    std::vector<double> nodes, weights;
    cfg.lambda_nodes(nodes, weights);
    AFResult out;
    out.values.assign(frame_points.size(), 0.0);
    std::vector<int> dropped(frame_points.size(), 0);
    parallel_for(frame_points.size(), [&](std::size_t i) {
        const double x = frame_points[i].x;
        if (!(x > 0.0)) throw DomainError("A_F is evaluated only at x > 0");
        Vec2 z = frame.to_chart(x, frame_points[i].y);
        double acc = 0.0;
        for (int omega : {1, -1}) {
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                double c = cfg.chi(nodes[k]);
                if (c == 0.0) continue;
                Vec2 v = frame.tangent_to_chart(z, x * nodes[k], omega);
                auto seg = damped_segment(geo, w, f, z, v, x, cfg.F, cfg.t_step);
                if (seg.capped) {
                    ++dropped[i];
                    continue;
                }
                acc += weights[k] * x * c * seg.value;
            }
        }
        out.values[i] = acc / (x * x);
    });
    for (int d : dropped) out.dropped += d;
    return out;
}

AFResult apply_AF_composed(const ScalarField& f, const NormalOpConfig& cfg, const Geometry& geo,
                           const WeightSpec& w, const std::vector<Vec2>& frame_points) {
    cfg.validate();
    FoliationFrame frame(geo);
    const FoliationSpec& fol = geo.fol;
    const double F = cfg.F;
    ScalarField g = [&](Vec2 q) {
        double xq = fol.depth(q);
        double fv = f(q);
        return (fv != 0.0 && xq > 0.0) ? std::exp(F / xq) * fv : 0.0;
    };
    std::vector<double> nodes, weights;
    cfg.lambda_nodes(nodes, weights);
    AFResult out;
    out.values.assign(frame_points.size(), 0.0);
    std::vector<int> dropped(frame_points.size(), 0);
    parallel_for(frame_points.size(), [&](std::size_t i) {
        const double x = frame_points[i].x;
        if (!(x > 0.0)) throw DomainError("A_F is evaluated only at x > 0");
        Vec2 z = frame.to_chart(x, frame_points[i].y);
        double A = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            double c = cfg.chi(nodes[k]);
            if (c == 0.0) continue;
            Vec2 v = frame.tangent_to_chart(z, x * nodes[k], 1.0);
            double speed = metric_speed(geo.metric, z, v);
            // arc-length transform at matching nodes, converted to the t measure
            XrayResult r = xray(geo, w, g, z, v, cfg.t_step * speed);
            if (r.time_capped) {
                ++dropped[i];
                continue;
            }
            A += weights[k] * x * (c / x) * (r.value / speed);
        }
        out.values[i] = 2.0 * std::exp(-F / x) * A / x;
    });
    for (int d : dropped) out.dropped += d;
    return out;
}

double boundary_kernel(double X, double Y, double F, double alpha, const CutoffChi& chi, double rho_ff) {
    double s = (X - alpha * Y * Y) / std::abs(Y);
    return std::exp(-F * X) / std::abs(Y) * 0.5 * (chi(s) + chi(-s)) * rho_ff;
}

KernelSample kernel_flat(double x, double y, double X, double Y, const NormalOpConfig& cfg, const Geometry& geo,
                         const WeightSpec& w) {
    if (Y == 0.0) throw ArgumentError("kernel is evaluated off Y = 0");
    if (x < 0.0) throw DomainError("kernel needs x >= 0");
    FoliationFrame frame(geo);
    KernelSample ks;
    const double omega = Y > 0.0 ? 1.0 : -1.0;
    auto chi_even = [&](double s) { return 0.5 * (cfg.chi(s) + cfg.chi(-s)); };

    if (x == 0.0) {
        Vec2 z0 = frame.to_chart(0.0, y);
        ks.alpha = frame.alpha_boundary(y);
        ks.lambda_hat = (X - ks.alpha * Y * Y) / std::abs(Y);
        ks.J = 1.0;
        ks.t = 0.0;
        ks.reachable = true;
        double rho_ff = w.diagonal(geo, z0, frame.tangent_to_chart(z0, 0.0, 1.0));
        ks.value = boundary_kernel(X, Y, cfg.F, ks.alpha, cfg.chi, rho_ff);
        return ks;
    }

    Vec2 z = frame.to_chart(x, y);
    ks.alpha = frame.alpha_at(z, 0.0, omega);
    const double xt = x + x * x * X, yt = y + x * Y;
    double t = x * std::abs(Y);
    double lambda = (xt - x - ks.alpha * t * t) / t;

    ShootOptions opts = geo.shoot;
    // endpoint of gamma_{z, lambda, omega}(t) in frame coordinates; false when it leaves the region
    auto endpoint = [&](double tt, double lam, Vec2& pos, Vec2& vel) {
        opts.time_cap = tt;
        opts.h = std::min(cfg.t_step, tt / 64.0);
        GeodesicPath p = shoot_geodesic(geo.metric, geo.fol, z, frame.tangent_to_chart(z, lam, omega), opts);
        if (p.exit != ExitReason::TimeCap) return false;
        const PathSample& e = p.exit_sample();
        pos = frame.to_frame(e.z);
        vel = frame.tangent_to_frame(e.z, e.v);
        return true;
    };

    Vec2 pos, vel;
    double det = 0.0, scaled = 0.0;
    for (int it = 0; it < 40; ++it) {
        if (!(t > 0.0) || !endpoint(t, lambda, pos, vel)) return ks;
        double rx = pos.x - xt, ry = pos.y - yt;
        double dl = 1e-3 * x;
        Vec2 pp, pm, vd;
        if (!endpoint(t, lambda + dl, pp, vd) || !endpoint(t, lambda - dl, pm, vd)) return ks;
        double a11 = vel.x, a21 = vel.y;
        double a12 = (pp.x - pm.x) / (2 * dl), a22 = (pp.y - pm.y) / (2 * dl);
        det = a11 * a22 - a12 * a21;
        scaled = std::max(std::abs(rx) / (x * x), std::abs(ry) / x);
        if (scaled < 1e-11 || det == 0.0) break;
        t -= (a22 * rx - a12 * ry) / det;
        lambda -= (-a21 * rx + a11 * ry) / det;
    }
    bool converged = scaled < 1e-8 && det != 0.0;
    if (!converged) return ks;
    ks.reachable = true;
    ks.t = t;
    ks.lambda_hat = lambda / x;
    ks.J = std::abs(Y) * x / std::abs(det);
    double c = chi_even(ks.lambda_hat);
    if (c == 0.0) return ks;
    Vec2 zt = frame.to_chart(xt, yt);
    double rho = w.eval(geo, zt, z);
    ks.value = std::exp(damping_exponent(cfg.F, x, X)) * c / std::abs(Y) * ks.J * rho;
    return ks;
}

}  // namespace foliate
