#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace foliate {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Rect {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;

    bool contains(Vec2 z) const {
        return z.x >= x_min && z.x <= x_max && z.y >= y_min && z.y <= y_max;
    }
    // signed distance to the nearest edge, positive inside
    double margin(Vec2 z) const {
        return std::min(std::min(z.x - x_min, x_max - z.x), std::min(z.y - y_min, y_max - z.y));
    }
    double diameter() const { return std::hypot(x_max - x_min, y_max - y_min); }
};

// Symmetric 2x2 tensor (g11, g12, g22).
struct Sym2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a12; }
    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
    double quad(Vec2 u, Vec2 v) const { return dot(u, apply(v)); }
    Sym2 inverse() const {
        double d = det();
        return {a22 / d, -a12 / d, a11 / d};
    }
};

struct MetricSample {
    Sym2 g;
    Sym2 dx;  // partial derivative in the first chart coordinate
    Sym2 dy;
};

enum class MetricFamily { Euclidean, Conformal, Grid };

class ChartMetric {
public:
    using Evaluator = std::function<MetricSample(Vec2)>;

    ChartMetric(Rect domain, MetricFamily family, Evaluator eval, std::string name);

    static ChartMetric euclidean(Rect domain);
    // g = exp(2 kappa x) * identity
    static ChartMetric conformal(Rect domain, double kappa);
    // Bilinear interpolation of node tensors on an nx-by-ny lattice spanning the domain,
    // values in row-major order (x fastest).
    static ChartMetric from_grid(Rect domain, int nx, int ny, std::vector<Sym2> nodes);

    MetricSample sample(Vec2 z) const;  // throws DomainError outside the chart
    const Rect& domain() const { return domain_; }
    MetricFamily family() const { return family_; }
    const std::string& name() const { return name_; }

    // Smallest and largest eigenvalue of g over a 33x33 sampling of the chart.
    std::pair<double, double> eigen_bounds() const;

private:
    Rect domain_;
    MetricFamily family_;
    Evaluator eval_;
    std::string name_;
    std::pair<double, double> bounds_;
};

// gamma[k][i][j] = Gamma^k_ij
struct Christoffel {
    std::array<std::array<std::array<double, 2>, 2>, 2> gamma{};

    double operator()(int k, int i, int j) const { return gamma[k][i][j]; }
    // -Gamma(v, v): the geodesic acceleration
    Vec2 acceleration(Vec2 v) const;
};

Christoffel christoffel(const ChartMetric& metric, Vec2 z);
Christoffel christoffel(const MetricSample& s);

// Value, gradient and Hessian of a scalar function on the chart.
struct Jet2 {
    double value = 0.0;
    Vec2 grad;
    Sym2 hess;
};

class BoundaryFunction {
public:
    using Evaluator = std::function<Jet2(Vec2)>;

    BoundaryFunction(Evaluator eval, std::string name) : eval_(std::move(eval)), name_(std::move(name)) {}

    // rho = n.z + offset, n normalized
    static BoundaryFunction halfplane(Vec2 normal, double offset = 0.0);
    // rho = R - |z - center|
    static BoundaryFunction disk(Vec2 center, double radius);

    Jet2 operator()(Vec2 z) const { return eval_(z); }
    const std::string& name() const { return name_; }

private:
    Evaluator eval_;
    std::string name_;
};

struct FoliationSpec {
    BoundaryFunction rho;
    Vec2 p;
    double eps = 0.1;
    double c = 0.3;

    // x~ = -rho - eps |z - p|^2
    Jet2 xtilde(Vec2 z) const;
    double depth(Vec2 z) const { return xtilde(z).value + c; }
    bool in_region(Vec2 z) const;
};

// Checks rho(p) = 0, grad rho(p) != 0, eps >= 0, c > 0.
FoliationSpec make_foliation(BoundaryFunction rho, Vec2 p, double eps, double c);

// Bounding box of the sampled region {x~ >= -c, rho >= 0} inside the chart.
// Throws DomainError when the region touches the chart edge (unbounded at chart scale).
Rect region_bounding_box(const FoliationSpec& fol, const Rect& chart, int n = 257);

enum class ExitReason { Boundary, ArtificialBoundary, TimeCap, LeftChart };

const char* to_string(ExitReason r);

struct PathSample {
    double t = 0.0;
    Vec2 z;
    Vec2 v;
};

struct GeodesicPath {
    Vec2 z0, v0;
    double h = 0.0;
    double time_cap = 0.0;
    std::vector<PathSample> samples;
    ExitReason exit = ExitReason::TimeCap;

    double exit_time() const { return samples.back().t; }
    const PathSample& exit_sample() const { return samples.back(); }
    // cubic Hermite dense output
    PathSample at(double t) const;
};

struct ShootOptions {
    double h = 1e-3;
    double time_cap = 0.0;  // 0: default 4 * diameter / min speed
    double exit_tol = 1e-10;
    bool stop_at_region = true;  // stop on rho = 0 and x~ = -c
};

double default_time_cap(const ChartMetric& metric, Vec2 v0);

GeodesicPath shoot_geodesic(const ChartMetric& metric, const FoliationSpec& fol, Vec2 z0, Vec2 v0,
                            const ShootOptions& opts = {});

// Both branches through z0: the backward one is shot with -v0.
struct TwoSidedPath {
    GeodesicPath forward;
    GeodesicPath backward;
};

TwoSidedPath shoot_two_sided(const ChartMetric& metric, const FoliationSpec& fol, Vec2 z0, Vec2 v0,
                             const ShootOptions& opts = {});

double metric_speed(const ChartMetric& metric, Vec2 z, Vec2 v);

// Covariant Hessian of x~ applied to (v, v).
double hess_xtilde(const ChartMetric& metric, const FoliationSpec& fol, Vec2 z, Vec2 v);

// Points of the leaf {x~ = -t} inside {rho >= 0} and the chart, evenly spaced in
// Euclidean arc length. Empty when the leaf misses the region.
std::vector<Vec2> trace_level_set(const FoliationSpec& fol, const Rect& chart, double t, int n);

struct ConvexityReport {
    double margin = 0.0;  // min of d^2/ds^2 (x~ o gamma) over unit-speed geodesics tangent to the leaf
    Vec2 argmin_point;
    Vec2 argmin_direction;
    double c1 = 0.0;  // margin / 2, lower bound for alpha
    int samples = 0;
};

ConvexityReport convexity_margin(const ChartMetric& metric, const FoliationSpec& fol, double t,
                                 int n_samples);

// Minimum convexity margin over leaves t in {0, c/8, ..., c}.
ConvexityReport certify_convexity(const ChartMetric& metric, const FoliationSpec& fol,
                                  int n_leaves = 9, int n_samples = 64);

}  // namespace foliate
