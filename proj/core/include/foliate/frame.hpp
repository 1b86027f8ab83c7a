#pragma once

#include "foliate/geometry.hpp"

namespace foliate {

// Metric, foliation and integrator settings travel together everywhere downstream.
struct Geometry {
    ChartMetric metric;
    FoliationSpec fol;
    ShootOptions shoot;
};

// Scattering coordinates (x, y) = (x~(z) + c, z.y) near p.
class FoliationFrame {
public:
    explicit FoliationFrame(const Geometry& geo) : geo_(&geo) {}

    const Geometry& geometry() const { return *geo_; }

    Vec2 to_frame(Vec2 z) const { return {geo_->fol.depth(z), z.y}; }
    // Chart point with depth x on the horizontal line z.y = y, nearest to p
    // among roots inside the region. Throws DomainError when there is none.
    Vec2 to_chart(double x, double y) const;

    // Chart vector whose frame components are (lambda, omega).
    Vec2 tangent_to_chart(Vec2 z, double lambda, double omega) const;
    // Frame components of a chart vector.
    Vec2 tangent_to_frame(Vec2 z, Vec2 v) const;

    // alpha at a chart point for frame direction (lambda, omega): half the second
    // derivative of x along the geodesic.
    double alpha_at(Vec2 z, double lambda, double omega) const;
    // alpha(0, y, 0, omega) on the artificial boundary x = 0; even in omega.
    double alpha_boundary(double y) const;

private:
    const Geometry* geo_;
};

}  // namespace foliate
