#pragma once

#include <string>

#include "foliate/frame.hpp"

namespace foliate {

// Disk of radius 1 centred at (1, 0), p at the origin, on a chart that holds Omega_c.
Geometry disk_geometry(double c = 0.3, double eps = 0.1, double kappa = 0.0);

// Half-plane rho = n.z with n at angle theta from the first axis, eps = 0.
Geometry halfplane_geometry(double c, double theta = 0.0, Rect chart = {-1.0, 2.0, -2.0, 2.0});

// "euclidean" or "conformal" (kappa = 0.3) disk presets.
Geometry named_geometry(const std::string& name, double c = 0.3, double eps = 0.1);

}  // namespace foliate
