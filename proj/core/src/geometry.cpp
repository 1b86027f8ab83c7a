#include "foliate/geometry.hpp"

#include <limits>
#include <optional>
#include <sstream>

#include "foliate/error.hpp"

namespace foliate {

namespace {

std::pair<double, double> eigenvalues(const Sym2& g) {
    double m = 0.5 * (g.a11 + g.a22);
    double d = std::hypot(0.5 * (g.a11 - g.a22), g.a12);
    return {m - d, m + d};
}

double component(const Sym2& s, int a, int b) {
    if (a == 0 && b == 0) return s.a11;
    if (a == 1 && b == 1) return s.a22;
    return s.a12;
}

std::string point_str(Vec2 z) {
    std::ostringstream os;
    os << "(" << z.x << ", " << z.y << ")";
    return os.str();
}

}  // namespace

ChartMetric::ChartMetric(Rect domain, MetricFamily family, Evaluator eval, std::string name)
    : domain_(domain), family_(family), eval_(std::move(eval)), name_(std::move(name)) {
    if (!(domain_.x_max > domain_.x_min && domain_.y_max > domain_.y_min))
        throw ValidationError("chart rectangle is empty");
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    const int n = 33;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Vec2 z{domain_.x_min + (domain_.x_max - domain_.x_min) * i / (n - 1),
                   domain_.y_min + (domain_.y_max - domain_.y_min) * j / (n - 1)};
            std::pair<double, double> ev;
            try {
                ev = eigenvalues(sample(z).g);
            } catch (const IntegrationError&) {
                continue;  // reported when a path actually reaches the point
            }
            auto [a, b] = ev;
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    }
    bounds_ = {lo, hi};
}

ChartMetric ChartMetric::euclidean(Rect domain) {
    return ChartMetric(
        domain, MetricFamily::Euclidean,
        [](Vec2) { return MetricSample{{1.0, 0.0, 1.0}, {}, {}}; }, "euclidean");
}

ChartMetric ChartMetric::conformal(Rect domain, double kappa) {
    return ChartMetric(
        domain, MetricFamily::Conformal,
        [kappa](Vec2 z) {
            double e = std::exp(2.0 * kappa * z.x);
            return MetricSample{{e, 0.0, e}, {2.0 * kappa * e, 0.0, 2.0 * kappa * e}, {}};
        },
        "conformal");
}

ChartMetric ChartMetric::from_grid(Rect domain, int nx, int ny, std::vector<Sym2> nodes) {
    if (nx < 2 || ny < 2) throw ValidationError("grid metric needs at least 2x2 nodes");
    if (nodes.size() != static_cast<std::size_t>(nx) * ny)
        throw ShapeError("grid metric node count does not match dims");
    double dx = (domain.x_max - domain.x_min) / (nx - 1);
    double dy = (domain.y_max - domain.y_min) / (ny - 1);
    auto eval = [=, nodes = std::move(nodes)](Vec2 z) {
        double u = (z.x - domain.x_min) / dx, w = (z.y - domain.y_min) / dy;
        int i = std::clamp(static_cast<int>(std::floor(u)), 0, nx - 2);
        int j = std::clamp(static_cast<int>(std::floor(w)), 0, ny - 2);
        double s = u - i, t = w - j;
        const Sym2& g00 = nodes[j * nx + i];
        const Sym2& g10 = nodes[j * nx + i + 1];
        const Sym2& g01 = nodes[(j + 1) * nx + i];
        const Sym2& g11 = nodes[(j + 1) * nx + i + 1];
        auto mix = [&](auto field) {
            double a = g00.*field, b = g10.*field, c = g01.*field, d = g11.*field;
            double v = (1 - s) * (1 - t) * a + s * (1 - t) * b + (1 - s) * t * c + s * t * d;
            double vx = ((1 - t) * (b - a) + t * (d - c)) / dx;
            double vy = ((1 - s) * (c - a) + s * (d - b)) / dy;
            return std::array<double, 3>{v, vx, vy};
        };
        auto c11 = mix(&Sym2::a11), c12 = mix(&Sym2::a12), c22 = mix(&Sym2::a22);
        return MetricSample{{c11[0], c12[0], c22[0]}, {c11[1], c12[1], c22[1]}, {c11[2], c12[2], c22[2]}};
    };
    return ChartMetric(domain, MetricFamily::Grid, std::move(eval), "grid");
}

MetricSample ChartMetric::sample(Vec2 z) const {
    if (!domain_.contains(z)) throw DomainError("point " + point_str(z) + " outside chart");
    MetricSample s = eval_(z);
    if (std::isnan(s.g.a11) || std::isnan(s.g.a12) || std::isnan(s.g.a22) || std::isnan(s.dx.a11) ||
        std::isnan(s.dx.a12) || std::isnan(s.dx.a22) || std::isnan(s.dy.a11) || std::isnan(s.dy.a12) ||
        std::isnan(s.dy.a22))
        throw IntegrationError("metric evaluator returned NaN at " + point_str(z));
    if (!(s.g.a11 > 0.0 && s.g.det() > 0.0))
        throw ValidationError("metric not positive definite at " + point_str(z));
    return s;
}

std::pair<double, double> ChartMetric::eigen_bounds() const { return bounds_; }

Vec2 Christoffel::acceleration(Vec2 v) const {
    double vv[2] = {v.x, v.y};
    double a[2] = {0.0, 0.0};
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) a[k] -= gamma[k][i][j] * vv[i] * vv[j];
    return {a[0], a[1]};
}

Christoffel christoffel(const MetricSample& s) {
    const Sym2 ginv = s.g.inverse();
    const Sym2* d[2] = {&s.dx, &s.dy};
    // dg(m, a, b) = d_m g_ab
    auto dg = [&](int m, int a, int b) { return component(*d[m], a, b); };
    Christoffel c;
    for (int k = 0; k < 2; ++k) {
        for (int i = 0; i < 2; ++i) {
            for (int j = i; j < 2; ++j) {
                double acc = 0.0;
                for (int l = 0; l < 2; ++l)
                    acc += component(ginv, k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                c.gamma[k][i][j] = c.gamma[k][j][i] = 0.5 * acc;
            }
        }
    }
    return c;
}

Christoffel christoffel(const ChartMetric& metric, Vec2 z) { return christoffel(metric.sample(z)); }

BoundaryFunction BoundaryFunction::halfplane(Vec2 normal, double offset) {
    double n = norm(normal);
    if (!(n > 0.0)) throw ValidationError("half-plane normal must be nonzero");
    Vec2 u = (1.0 / n) * normal;
    return BoundaryFunction([u, offset](Vec2 z) { return Jet2{dot(u, z) + offset, u, {}}; }, "halfplane");
}

BoundaryFunction BoundaryFunction::disk(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw ValidationError("disk radius must be positive");
    return BoundaryFunction(
        [center, radius](Vec2 z) {
            Vec2 d = z - center;
            double r = norm(d);
            if (r < 1e-14) throw DomainError("disk boundary function is singular at its center");
            Vec2 u = (1.0 / r) * d;
            Sym2 h{-(1.0 - u.x * u.x) / r, u.x * u.y / r, -(1.0 - u.y * u.y) / r};
            return Jet2{radius - r, -u, h};
        },
        "disk");
}

Jet2 FoliationSpec::xtilde(Vec2 z) const {
    Jet2 r = rho(z);
    Vec2 d = z - p;
    return Jet2{-r.value - eps * dot(d, d), -r.grad - 2.0 * eps * d,
                {-r.hess.a11 - 2.0 * eps, -r.hess.a12, -r.hess.a22 - 2.0 * eps}};
}

bool FoliationSpec::in_region(Vec2 z) const { return rho(z).value >= 0.0 && depth(z) >= 0.0; }

FoliationSpec make_foliation(BoundaryFunction rho, Vec2 p, double eps, double c) {
    if (!(eps >= 0.0)) throw ValidationError("foliation curvature eps must be >= 0");
    if (!(c > 0.0)) throw ValidationError("foliation depth c must be > 0");
    Jet2 j = rho(p);
    if (std::abs(j.value) > 1e-9) throw ValidationError("center point p is not on the boundary rho = 0");
    if (!(norm(j.grad) > 0.0)) throw ValidationError("boundary defining function has zero gradient at p");
    return FoliationSpec{std::move(rho), p, eps, c};
}

Rect region_bounding_box(const FoliationSpec& fol, const Rect& chart, int n) {
    Rect box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    double dx = (chart.x_max - chart.x_min) / (n - 1), dy = (chart.y_max - chart.y_min) / (n - 1);
    bool any = false;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Vec2 z{chart.x_min + i * dx, chart.y_min + j * dy};
            if (!fol.in_region(z)) continue;
            if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
                throw DomainError("region {x~ >= -c, rho >= 0} reaches the chart edge");
            any = true;
            box.x_min = std::min(box.x_min, z.x - dx);
            box.x_max = std::max(box.x_max, z.x + dx);
            box.y_min = std::min(box.y_min, z.y - dy);
            box.y_max = std::max(box.y_max, z.y + dy);
        }
    }
    if (!any) throw DomainError("region {x~ >= -c, rho >= 0} is empty on the chart");
    return box;
}

const char* to_string(ExitReason r) {
    switch (r) {
        case ExitReason::Boundary: return "boundary";
        case ExitReason::ArtificialBoundary: return "artificial-boundary";
        case ExitReason::TimeCap: return "time-cap";
        case ExitReason::LeftChart: return "left-chart";
    }
    return "unknown";
}

PathSample GeodesicPath::at(double t) const {
    if (samples.empty()) throw DomainError("empty geodesic path");
    if (t <= samples.front().t) return samples.front();
    if (t >= samples.back().t) return samples.back();
    auto it = std::upper_bound(samples.begin(), samples.end(), t,
                               [](double v, const PathSample& s) { return v < s.t; });
    const PathSample& b = *it;
    const PathSample& a = *(it - 1);
    double dt = b.t - a.t;
    double s = (t - a.t) / dt;
    double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
    double d01 = -d00, d11 = 3 * s * s - 2 * s;
    PathSample out;
    out.t = t;
    out.z = h00 * a.z + (h10 * dt) * a.v + h01 * b.z + (h11 * dt) * b.v;
    out.v = (d00 / dt) * a.z + d10 * a.v + (d01 / dt) * b.z + d11 * b.v;
    return out;
}

double metric_speed(const ChartMetric& metric, Vec2 z, Vec2 v) {
    return std::sqrt(metric.sample(z).g.quad(v, v));
}

double default_time_cap(const ChartMetric& metric, Vec2 v0) {
    double min_speed = std::sqrt(metric.eigen_bounds().first) * norm(v0);
    if (!(min_speed > 0.0)) throw ArgumentError("initial vector must be nonzero");
    return 4.0 * metric.domain().diameter() / min_speed;
}

namespace {

struct State {
    Vec2 z, v;
};

std::optional<State> rk4_step(const ChartMetric& metric, const State& s, double h) {
    try {
        auto f = [&](const State& q) {
            return State{q.v, christoffel(metric, q.z).acceleration(q.v)};
        };
        State k1 = f(s);
        State k2 = f({s.z + (0.5 * h) * k1.z, s.v + (0.5 * h) * k1.v});
        State k3 = f({s.z + (0.5 * h) * k2.z, s.v + (0.5 * h) * k2.v});
        State k4 = f({s.z + h * k3.z, s.v + h * k3.v});
        State out{s.z + (h / 6.0) * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
                  s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
        if (!metric.domain().contains(out.z)) return std::nullopt;
        return out;
    } catch (const DomainError&) {
        return std::nullopt;
    }
}

// Which event fired at a state just past the crossing.
std::optional<ExitReason> event(const FoliationSpec& fol, bool region, const std::optional<State>& s) {
    if (!s) return ExitReason::LeftChart;
    if (region) {
        if (fol.rho(s->z).value < 0.0) return ExitReason::Boundary;
        if (fol.depth(s->z) < 0.0) return ExitReason::ArtificialBoundary;
    }
    return std::nullopt;
}

}  // namespace

GeodesicPath shoot_geodesic(const ChartMetric& metric, const FoliationSpec& fol, Vec2 z0, Vec2 v0,
                            const ShootOptions& opts) {
    if (!(opts.h > 0.0)) throw ArgumentError("geodesic step must be positive");
    if (!(norm(v0) > 0.0)) throw ArgumentError("initial vector must be nonzero");
    metric.sample(z0);
    GeodesicPath path;
    path.z0 = z0;
    path.v0 = v0;
    path.h = opts.h;
    path.time_cap = opts.time_cap > 0.0 ? opts.time_cap : default_time_cap(metric, v0);
    path.samples.push_back({0.0, z0, v0});
    State s{z0, v0};
    double t = 0.0;
    if (auto e = event(fol, opts.stop_at_region, s)) {
        path.exit = *e;
        return path;
    }
    const std::size_t max_steps = static_cast<std::size_t>(std::ceil(path.time_cap / opts.h)) + 2;
    path.samples.reserve(std::min<std::size_t>(max_steps, 1 << 20));
    while (t < path.time_cap) {
        double tau = std::min(opts.h, path.time_cap - t);
        auto next = rk4_step(metric, s, tau);
        if (next && (std::isnan(next->z.x) || std::isnan(next->v.x) || std::isnan(next->z.y) ||
                     std::isnan(next->v.y)))
            throw IntegrationError("geodesic state became NaN");
        auto e = event(fol, opts.stop_at_region, next);
        if (!e) {
            s = *next;
            t += tau;
            path.samples.push_back({t, s.z, s.v});
            continue;
        }
        double lo = 0.0, hi = tau;
        State inside = s;
        ExitReason reason = *e;
        while (hi - lo > opts.exit_tol) {
            double mid = 0.5 * (lo + hi);
            auto trial = rk4_step(metric, s, mid);
            auto em = event(fol, opts.stop_at_region, trial);
            if (em) {
                hi = mid;
                reason = *em;
            } else {
                lo = mid;
                inside = *trial;
            }
        }
        if (lo > 0.0) path.samples.push_back({t + lo, inside.z, inside.v});
        path.exit = reason;
        return path;
    }
    path.exit = ExitReason::TimeCap;
    return path;
}

TwoSidedPath shoot_two_sided(const ChartMetric& metric, const FoliationSpec& fol, Vec2 z0, Vec2 v0,
                             const ShootOptions& opts) {
    return {shoot_geodesic(metric, fol, z0, v0, opts), shoot_geodesic(metric, fol, z0, -v0, opts)};
}

double hess_xtilde(const ChartMetric& metric, const FoliationSpec& fol, Vec2 z, Vec2 v) {
    Jet2 x = fol.xtilde(z);
    Vec2 a = christoffel(metric, z).acceleration(v);  // -Gamma(v, v)
    return x.hess.quad(v, v) + dot(a, x.grad);
}

std::vector<Vec2> trace_level_set(const FoliationSpec& fol, const Rect& chart, double t, int n) {
    if (n < 1) throw ArgumentError("level set needs at least one sample");
    auto phi = [&](Vec2 z) { return fol.xtilde(z).value + t; };
    auto project = [&](Vec2 z) {
        for (int it = 0; it < 4; ++it) {
            Jet2 j = fol.xtilde(z);
            double g2 = dot(j.grad, j.grad);
            if (g2 == 0.0) break;
            z = z - ((j.value + t) / g2) * j.grad;
        }
        return z;
    };
    // start on the inward normal through p
    Vec2 start = fol.p;
    if (t > 0.0) {
        Vec2 d = fol.rho(fol.p).grad;
        d = (1.0 / norm(d)) * d;
        double ds = chart.diameter() / 2000.0;
        double s_prev = 0.0;
        bool found = false;
        for (int k = 1; k <= 4000; ++k) {
            double s = k * ds;
            Vec2 z = fol.p + s * d;
            if (!chart.contains(z)) break;
            if (phi(z) < 0.0) {
                double lo = s_prev, hi = s;
                for (int it = 0; it < 80; ++it) {
                    double mid = 0.5 * (lo + hi);
                    (phi(fol.p + mid * d) < 0.0 ? hi : lo) = mid;
                }
                start = fol.p + (0.5 * (lo + hi)) * d;
                found = true;
                break;
            }
            s_prev = s;
        }
        if (!found || fol.rho(start).value < 0.0) return {};
    } else if (t < 0.0) {
        return {};
    }

    auto tangent = [&](Vec2 z) {
        Vec2 g = fol.xtilde(z).grad;
        double m = norm(g);
        return Vec2{-g.y / m, g.x / m};
    };
    auto inside = [&](Vec2 z) { return chart.contains(z) && fol.rho(z).value >= 0.0; };

    const double ds = chart.diameter() / 4000.0;
    auto walk = [&](double sign) {
        std::vector<Vec2> pts;
        Vec2 z = start;
        for (int k = 0; k < 40000; ++k) {
            auto step = [&](Vec2 a, double h) {
                Vec2 k1 = tangent(a);
                Vec2 k2 = tangent(a + (0.5 * h * sign) * k1);
                Vec2 k3 = tangent(a + (0.5 * h * sign) * k2);
                Vec2 k4 = tangent(a + (h * sign) * k3);
                return project(a + (h * sign / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
            };
            Vec2 next;
            try {
                next = step(z, ds);
            } catch (const DomainError&) {
                break;
            }
            if (!inside(next)) {
                double lo = 0.0, hi = ds;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    Vec2 trial = step(z, mid);
                    (inside(trial) ? lo : hi) = mid;
                }
                if (lo > 0.0) pts.push_back(step(z, lo));
                break;
            }
            z = next;
            pts.push_back(z);
            if (k > 10 && norm(z - start) < ds) break;  // closed leaf
        }
        return pts;
    };
    if (!inside(start)) return {};
    std::vector<Vec2> back = walk(-1.0), fwd = walk(1.0);
    std::vector<Vec2> line(back.rbegin(), back.rend());
    line.push_back(start);
    line.insert(line.end(), fwd.begin(), fwd.end());
    if (line.size() == 1 || n == 1) return {start};

    std::vector<double> arc(line.size(), 0.0);
    for (std::size_t i = 1; i < line.size(); ++i) arc[i] = arc[i - 1] + norm(line[i] - line[i - 1]);
    std::vector<Vec2> out;
    out.reserve(n);
    std::size_t seg = 0;
    for (int k = 0; k < n; ++k) {
        double s = arc.back() * k / (n - 1);
        while (seg + 2 < arc.size() && arc[seg + 1] < s) ++seg;
        double len = arc[seg + 1] - arc[seg];
        double w = len > 0.0 ? (s - arc[seg]) / len : 0.0;
        Vec2 z = line[seg] + w * (line[seg + 1] - line[seg]);
        out.push_back(project(z));
    }
    return out;
}

ConvexityReport convexity_margin(const ChartMetric& metric, const FoliationSpec& fol, double t,
                                 int n_samples) {
    auto pts = trace_level_set(fol, metric.domain(), t, n_samples);
    if (pts.empty()) throw DomainError("leaf x~ = -t does not meet the region");
    ConvexityReport rep;
    rep.margin = std::numeric_limits<double>::infinity();
    for (Vec2 z : pts) {
        Vec2 g = fol.xtilde(z).grad;
        Vec2 v{-g.y, g.x};
        v = (1.0 / metric_speed(metric, z, v)) * v;
        double m = hess_xtilde(metric, fol, z, v);
        if (m < rep.margin) {
            rep.margin = m;
            rep.argmin_point = z;
            rep.argmin_direction = v;
        }
    }
    rep.samples = static_cast<int>(pts.size());
    rep.c1 = 0.5 * rep.margin;
    return rep;
}

ConvexityReport certify_convexity(const ChartMetric& metric, const FoliationSpec& fol, int n_leaves,
                                  int n_samples) {
    ConvexityReport worst;
    worst.margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_leaves; ++k) {
        double t = fol.c * k / std::max(1, n_leaves - 1);
        auto r = convexity_margin(metric, fol, t, n_samples);
        if (r.margin < worst.margin) worst = r;
    }
    return worst;
}

}  // namespace foliate
