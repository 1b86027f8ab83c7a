#include "foliate/transform.hpp"

#include <algorithm>
#include <limits>

#include "foliate/error.hpp"
#include "foliate/parallel.hpp"

namespace foliate {

WeightSpec WeightSpec::constant(double value) {
    if (!(value > 0.0)) throw ValidationError("weight must be strictly positive");
    WeightSpec w;
    w.kind_ = Kind::Constant;
    w.value_ = value;
    w.lower_ = w.upper_ = value;
    w.name_ = value == 1.0 ? "constant" : "constant(" + std::to_string(value) + ")";
    return w;
}

WeightSpec WeightSpec::exit_point(double amplitude, Vec2 wave) {
    if (!(amplitude >= 0.0 && amplitude < 1.0))
        throw ValidationError("exit-point weight amplitude must lie in [0, 1)");
    WeightSpec w;
    w.kind_ = Kind::ExitPoint;
    w.amplitude_ = amplitude;
    w.wave_ = wave;
    w.lower_ = 1.0 - amplitude;
    w.upper_ = 1.0 + amplitude;
    w.name_ = "exit-point";
    return w;
}

WeightSpec WeightSpec::averaged(Kernel kernel, double lower, double upper, std::string name) {
    if (!kernel) throw ArgumentError("averaged weight needs a kernel");
    if (!(lower > 0.0 && upper >= lower)) throw ValidationError("averaged weight bounds must satisfy 0 < C0 <= C1");
    WeightSpec w;
    w.kind_ = Kind::Averaged;
    w.kernel_ = std::move(kernel);
    w.lower_ = lower;
    w.upper_ = upper;
    w.name_ = std::move(name);
    return w;
}

double WeightSpec::ray_value(const TwoSidedPath& path) const {
    switch (kind_) {
        case Kind::Constant: return value_;
        case Kind::ExitPoint: {
            Vec2 e1 = path.forward.exit_sample().z, e2 = path.backward.exit_sample().z;
            return 1.0 + amplitude_ * 0.5 * (std::sin(dot(wave_, e1)) + std::sin(dot(wave_, e2)));
        }
        case Kind::Averaged: break;
    }
    throw ArgumentError("averaged weight has no single per-ray value");
}

std::vector<double> WeightSpec::along(const std::vector<Vec2>& pts, const std::vector<double>& ds) const {
    if (kind_ != Kind::Averaged) throw ArgumentError("along() is only defined for averaged weights");
    double total = 0.0;
    for (double d : ds) total += d;
    std::vector<double> out(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        double acc = 0.0;
        for (std::size_t q = 0; q < pts.size(); ++q) acc += ds[q] * kernel_(pts[q], pts[k]);
        out[k] = total > 0.0 ? acc / total : kernel_(pts[k], pts[k]);
    }
    return out;
}

double WeightSpec::diagonal(const Geometry& geo, Vec2 z, Vec2 dir) const {
    if (kind_ == Kind::Constant) return value_;
    if (!(norm(dir) > 0.0)) throw ArgumentError("direction must be nonzero");
    if (per_ray()) {
        Vec2 v = (1.0 / metric_speed(geo.metric, z, dir)) * dir;
        return ray_value(shoot_two_sided(geo.metric, geo.fol, z, v, geo.shoot));
    }
    RayNodes nodes = ray_nodes(geo, WeightSpec::constant(), z, dir, geo.shoot.h);
    double total = 0.0, acc = 0.0;
    for (std::size_t q = 0; q < nodes.z.size(); ++q) {
        total += nodes.weight[q];
        acc += nodes.weight[q] * kernel_(nodes.z[q], z);
    }
    return total > 0.0 ? acc / total : kernel_(z, z);
}

double WeightSpec::eval(const Geometry& geo, Vec2 z1, Vec2 z2, std::optional<Vec2> dir) const {
    if (norm(z1 - z2) < 1e-9) {
        if (!dir) throw ArgumentError("coincident points need a direction of approach");
        return diagonal(geo, z2, *dir);
    }
    if (kind_ == Kind::Constant) return value_;
    return diagonal(geo, z2, connect(geo, z2, z1));
}

Vec2 connect(const Geometry& geo, Vec2 from, Vec2 to) {
    const double dist = norm(to - from);
    if (!(dist > 0.0)) throw ArgumentError("connect needs distinct points");
    const double lmax = geo.metric.eigen_bounds().second;
    ShootOptions opts = geo.shoot;
    opts.stop_at_region = false;
    opts.h = std::min(opts.h, dist / 64.0);
    auto miss = [&](double theta, Vec2& v_out) {
        Vec2 d{std::cos(theta), std::sin(theta)};
        Vec2 v = (1.0 / metric_speed(geo.metric, from, d)) * d;
        v_out = v;
        opts.time_cap = 2.5 * dist * std::sqrt(lmax);
        GeodesicPath p = shoot_geodesic(geo.metric, geo.fol, from, v, opts);
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < p.samples.size(); ++k) {
            double e = norm(p.samples[k].z - to);
            if (e < bd) {
                bd = e;
                best = k;
            }
        }
        // Newton on the along-track offset using dense output
        double t = p.samples[best].t;
        for (int it = 0; it < 6; ++it) {
            PathSample s = p.at(t);
            double vv = dot(s.v, s.v);
            t += dot(to - s.z, s.v) / vv;
            t = std::clamp(t, 0.0, p.exit_time());
        }
        PathSample s = p.at(t);
        Vec2 u = (1.0 / norm(s.v)) * s.v;
        Vec2 r = to - s.z;
        return u.x * r.y - u.y * r.x;
    };
    Vec2 v;
    double th0 = std::atan2(to.y - from.y, to.x - from.x);
    double m0 = miss(th0, v);
    const double tol = 1e-13 * (1.0 + dist);
    if (std::abs(m0) < tol) return v;
    double th1 = th0 + 1e-3;
    double m1 = miss(th1, v);
    for (int it = 0; it < 40; ++it) {
        if (std::abs(m1) < tol) return v;
        if (m1 == m0) break;
        double th2 = th1 - m1 * (th1 - th0) / (m1 - m0);
        th0 = th1;
        m0 = m1;
        th1 = th2;
        m1 = miss(th1, v);
    }
    if (std::abs(m1) < 1e-10 * (1.0 + dist)) return v;
    throw DomainError("no geodesic connects the requested points");
}

double RayNodes::integrate(const ScalarField& f) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) acc += weight[k] * f(z[k]);
    return acc;
}

RayNodes ray_nodes(const Geometry& geo, const WeightSpec& w, Vec2 z0, Vec2 v0, double h) {
    if (!(h > 0.0)) throw ArgumentError("quadrature step must be positive");
    double speed = metric_speed(geo.metric, z0, v0);
    if (!(speed > 0.0)) throw ArgumentError("initial vector must be nonzero");
    ShootOptions opts = geo.shoot;
    opts.h = h;
    TwoSidedPath two = shoot_two_sided(geo.metric, geo.fol, z0, (1.0 / speed) * v0, opts);

    RayNodes out;
    out.exit_forward = two.forward.exit;
    out.exit_backward = two.backward.exit;
    const auto& fw = two.forward.samples;
    const auto& bw = two.backward.samples;
    const std::size_t n = fw.size() + bw.size() - 1;
    out.z.reserve(n);
    out.t.reserve(n);
    for (auto it = bw.rbegin(); it != bw.rend(); ++it) {
        out.z.push_back(it->z);
        out.t.push_back(-it->t);
    }
    for (std::size_t k = 1; k < fw.size(); ++k) {
        out.z.push_back(fw[k].z);
        out.t.push_back(fw[k].t);
    }
    std::vector<double> ds(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double d = 0.5 * (out.t[k + 1] - out.t[k]);
        ds[k] += d;
        ds[k + 1] += d;
    }
    out.weight = ds;
    if (w.per_ray()) {
        double r = w.ray_value(two);
        for (double& x : out.weight) x *= r;
    } else {
        auto r = w.along(out.z, ds);
        for (std::size_t k = 0; k < n; ++k) out.weight[k] *= r[k];
    }
    return out;
}

XrayResult xray(const Geometry& geo, const WeightSpec& w, const ScalarField& f, Vec2 z0, Vec2 v0,
                double h) {
    RayNodes nodes = ray_nodes(geo, w, z0, v0, h);
    XrayResult r;
    r.value = nodes.integrate(f);
    r.exit_forward = nodes.exit_forward;
    r.exit_backward = nodes.exit_backward;
    r.time_capped = nodes.capped();
    return r;
}

bool RayGrid::lambda_symmetric() const {
    const std::size_t n = lambda_hat.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(lambda_hat[i] + lambda_hat[n - 1 - i]) > 1e-14) return false;
    return true;
}

bool same_axes(const RayGrid& a, const RayGrid& b, double rel) {
    auto same = [rel](const std::vector<double>& u, const std::vector<double>& v) {
        if (u.size() != v.size()) return false;
        if (u.empty()) return true;
        const double tol = rel * std::max({std::abs(u.back() - u.front()), std::abs(u.front()), std::abs(u.back())});
        for (std::size_t i = 0; i < u.size(); ++i)
            if (std::abs(u[i] - v[i]) > tol) return false;
        return true;
    };
    return same(a.x, b.x) && same(a.y, b.y) && same(a.lambda_hat, b.lambda_hat);
}

RayGrid make_ray_grid(double c, int nx, double y_min, double y_max, int ny, double C, int nl) {
    if (nx < 1 || ny < 1 || nl < 1) throw ArgumentError("ray grid axes must be nonempty");
    RayGrid g;
    for (int i = 0; i < nx; ++i) g.x.push_back(c * (i + 0.5) / nx);
    for (int j = 0; j < ny; ++j)
        g.y.push_back(ny == 1 ? 0.5 * (y_min + y_max) : y_min + (y_max - y_min) * j / (ny - 1));
    for (int k = 0; k < nl; ++k) g.lambda_hat.push_back(nl == 1 ? 0.0 : -C + 2.0 * C * k / (nl - 1));
    return g;
}

std::optional<RayLaunch> launch(const FoliationFrame& frame, const RayGrid& grid, std::size_t ix,
                                std::size_t iy, std::size_t il, int omega) {
    const double x = grid.x[ix], y = grid.y[iy];
    if (!(x > 0.0)) return std::nullopt;
    Vec2 z;
    try {
        z = frame.to_chart(x, y);
    } catch (const DomainError&) {
        return std::nullopt;
    }
    const FoliationSpec& fol = frame.geometry().fol;
    if (!(fol.rho(z).value > 0.0)) return std::nullopt;
    double lambda = x * grid.lambda_hat[il];
    return RayLaunch{x, y, lambda, static_cast<double>(omega), z,
                     frame.tangent_to_chart(z, lambda, omega)};
}

Sinogram sinogram(const Geometry& geo, const WeightSpec& w, const ScalarField& f, const RayGrid& grid,
                  double h) {
    if (grid.launches() == 0) throw ArgumentError("empty ray grid");
    Sinogram s;
    s.grid = grid;
    s.h = h;
    s.weight = w.name();
    s.values.assign(grid.launches() * 2, 0.0);
    s.valid.assign(grid.launches() * 2, 0);
    const bool mirror = grid.symmetric && grid.lambda_symmetric();
    const std::size_t ny = grid.y.size(), nl = grid.lambda_hat.size();
    FoliationFrame frame(geo);
    std::vector<std::uint8_t> capped(grid.launches() * 2, 0);
    const int branches = mirror ? 1 : 2;
    parallel_for(grid.launches() * branches, [&](std::size_t flat) {
        int iw = static_cast<int>(flat % branches);
        std::size_t r = flat / branches;
        std::size_t il = r % nl, iy = (r / nl) % ny, ix = r / (nl * ny);
        auto L = launch(frame, grid, ix, iy, il, iw == 0 ? 1 : -1);
        if (!L) return;
        XrayResult x = xray(geo, w, f, L->z, L->v, h);
        std::size_t k = s.index(ix, iy, il, iw);
        s.values[k] = x.value;
        s.valid[k] = 1;
        capped[k] = x.time_capped;
    });
    if (mirror) {
        for (std::size_t ix = 0; ix < grid.x.size(); ++ix)
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t il = 0; il < nl; ++il) {
                    std::size_t src = s.index(ix, iy, nl - 1 - il, 0), dst = s.index(ix, iy, il, 1);
                    s.values[dst] = s.values[src];
                    s.valid[dst] = s.valid[src];
                    capped[dst] = capped[src];
                }
    }
    for (auto c : capped) s.capped += c;
    return s;
}

ScalarField adapted_field(const AdaptedProfile& u, const FoliationSpec& fol) {
    return [u, &fol](Vec2 z) { return u(fol.xtilde(z).value); };
}

GridField lift_adapted(const AdaptedProfile& u, const FoliationSpec& fol, Rect rect, int nx, int ny,
                       int* out_of_range, double tol) {
    GridField g(rect, nx, ny);
    int bad = 0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Vec2 z = g.node(i, j);
            double s = fol.xtilde(z).value;
            if (fol.in_region(z) && (s < u.s_min() - tol || s > u.s_max() + tol)) ++bad;
            g.at(i, j) = u(s);
        }
    if (out_of_range) *out_of_range = bad;
    return g;
}

}  // namespace foliate
