#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "foliate/frame.hpp"
#include "foliate/grid_field.hpp"
#include "foliate/profile.hpp"

namespace foliate {

using ScalarField = std::function<double(Vec2)>;

// Weight rho(z', z), constant in z' along each geodesic through z.
class WeightSpec {
public:
    enum class Kind { Constant, ExitPoint, Averaged };
    // kernel(q, z): start-dependent weight to be averaged over q on the geodesic through z
    using Kernel = std::function<double(Vec2, Vec2)>;

    static WeightSpec constant(double value = 1.0);
    // 1 + a (sin(k.e1) + sin(k.e2)) / 2 over the two exit points of the geodesic
    static WeightSpec exit_point(double amplitude, Vec2 wave);
    static WeightSpec averaged(Kernel kernel, double lower, double upper, std::string name);

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    // true when the weight is one number per geodesic
    bool per_ray() const { return kind_ != Kind::Averaged; }

    // Value for the geodesic through z in chart direction dir.
    double diagonal(const Geometry& geo, Vec2 z, Vec2 dir) const;
    // w(z1, z2) with z1 on the geodesic through z2. Points closer than 1e-9 need the
    // chart direction of approach.
    double eval(const Geometry& geo, Vec2 z1, Vec2 z2, std::optional<Vec2> dir = std::nullopt) const;

    // Per-ray value from an already shot geodesic (per_ray() kinds only).
    double ray_value(const TwoSidedPath& path) const;
    // Averaged kind: weight at each point of a sampled geodesic, arc-length trapezoid average.
    std::vector<double> along(const std::vector<Vec2>& pts, const std::vector<double>& ds) const;

private:
    Kind kind_ = Kind::Constant;
    std::string name_ = "constant";
    double value_ = 1.0, amplitude_ = 0.0;
    Vec2 wave_;
    Kernel kernel_;
    double lower_ = 1.0, upper_ = 1.0;
};

// Geodesic through two distinct points: initial chart direction at `from`, unit metric speed.
Vec2 connect(const Geometry& geo, Vec2 from, Vec2 to);

// Quadrature nodes of one full two-sided geodesic segment, unit metric speed.
struct RayNodes {
    std::vector<Vec2> z;
    std::vector<double> weight;  // rho * trapezoid arc-length weight
    std::vector<double> t;       // signed arc length from the launch point
    ExitReason exit_forward = ExitReason::TimeCap;
    ExitReason exit_backward = ExitReason::TimeCap;

    bool capped() const {
        return exit_forward == ExitReason::TimeCap || exit_backward == ExitReason::TimeCap;
    }
    double integrate(const ScalarField& f) const;
};

RayNodes ray_nodes(const Geometry& geo, const WeightSpec& w, Vec2 z0, Vec2 v0, double h);

struct XrayResult {
    double value = 0.0;
    bool time_capped = false;  // partial value
    ExitReason exit_forward = ExitReason::TimeCap;
    ExitReason exit_backward = ExitReason::TimeCap;
};

// Integral of rho f along the full geodesic segment through z0, trapezoid in arc length at step h.
XrayResult xray(const Geometry& geo, const WeightSpec& w, const ScalarField& f, Vec2 z0, Vec2 v0,
                double h);

// Launch grid in frame coordinates: depth x, horizontal y, normalized slope lambda/x.
struct RayGrid {
    std::vector<double> x, y, lambda_hat;
    bool symmetric = true;  // fill omega = -1 from the reversed omega = +1 segment

    std::size_t launches() const { return x.size() * y.size() * lambda_hat.size(); }
    bool lambda_symmetric() const;
};

// Axes equal up to rel times each axis span; file headers store axes as (min, max, count).
bool same_axes(const RayGrid& a, const RayGrid& b, double rel = 1e-12);

// x at cell centres of (0, c), y uniform in [y_min, y_max], lambda_hat uniform in [-C, C].
RayGrid make_ray_grid(double c, int nx, double y_min, double y_max, int ny, double C, int nl);

struct RayLaunch {
    double x, y, lambda, omega;
    Vec2 z, v;  // chart point and chart vector
};

// Launch data for grid entry; nullopt when the launch point is outside the region.
std::optional<RayLaunch> launch(const FoliationFrame& frame, const RayGrid& grid, std::size_t ix,
                                std::size_t iy, std::size_t il, int omega);

struct Sinogram {
    RayGrid grid;
    double h = 0.0;
    std::string weight;
    std::vector<double> values;   // index(ix, iy, il, iw), iw = 0 for omega = +1
    std::vector<std::uint8_t> valid;
    int capped = 0;

    std::size_t index(std::size_t ix, std::size_t iy, std::size_t il, int iw) const {
        return ((ix * grid.y.size() + iy) * grid.lambda_hat.size() + il) * 2 + iw;
    }
    std::size_t size() const { return values.size(); }
};

Sinogram sinogram(const Geometry& geo, const WeightSpec& w, const ScalarField& f, const RayGrid& grid,
                  double h);

// f(z) = u(x~(z)).
ScalarField adapted_field(const AdaptedProfile& u, const FoliationSpec& fol);
// Tabulated on a chart grid; counts nodes whose x~ falls outside the profile range by > tol.
GridField lift_adapted(const AdaptedProfile& u, const FoliationSpec& fol, Rect rect, int nx, int ny,
                       int* out_of_range = nullptr, double tol = 1e-9);

}  // namespace foliate
