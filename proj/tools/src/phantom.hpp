#pragma once

#include <string>

#include "config.hpp"
#include "foliate/profile.hpp"
#include "foliate/transform.hpp"

namespace foliate::cli {

// Adapted phantoms on [-c, 0] (deep-support: on [-c, -c/2]), zero outside their range.
// Kinds: zero, gaussian-bump, piecewise-linear, step, deep-support.
AdaptedProfile make_phantom(const std::string& kind, const Config& cfg, double c, int nodes);

// Analytic integral of the configured Gaussian bump over [-c, 0].
double gaussian_bump_mass(const Config& cfg, double c);

// Scalar field for the forward command: adapted kinds are lifted through x~,
// "disk" is the indicator of a chart disk.
ScalarField make_phantom_field(const Config& cfg, const FoliationSpec& fol, int nodes);

}  // namespace foliate::cli
