#include "foliate/presets.hpp"

#include "foliate/error.hpp"

namespace foliate {

Geometry disk_geometry(double c, double eps, double kappa) {
    Rect chart{-0.3, 1.9, -1.4, 1.4};
    ChartMetric metric = kappa == 0.0 ? ChartMetric::euclidean(chart) : ChartMetric::conformal(chart, kappa);
    auto fol = make_foliation(BoundaryFunction::disk({1.0, 0.0}, 1.0), {0.0, 0.0}, eps, c);
    return Geometry{std::move(metric), std::move(fol), ShootOptions{}};
}

Geometry halfplane_geometry(double c, double theta, Rect chart) {
    auto fol = make_foliation(BoundaryFunction::halfplane({std::cos(theta), std::sin(theta)}), {0.0, 0.0},
                              0.0, c);
    return Geometry{ChartMetric::euclidean(chart), std::move(fol), ShootOptions{}};
}

Geometry named_geometry(const std::string& name, double c, double eps) {
    if (name == "euclidean") return disk_geometry(c, eps, 0.0);
    if (name == "conformal") return disk_geometry(c, eps, 0.3);
    throw ValidationError("unknown geometry preset '" + name + "'");
}

}  // namespace foliate
