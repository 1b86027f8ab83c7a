#pragma once

#include <vector>

#include "foliate/geometry.hpp"

namespace foliate {

// Node-centred scalar samples on a rectangle; nodes include the edges.
// values[j * nx + i] sits at (x_min + i dx, y_min + j dy).
struct GridField {
    Rect rect;
    int nx = 0, ny = 0;
    std::vector<double> values;

    GridField() = default;
    GridField(Rect r, int nx_, int ny_, double fill = 0.0);

    double dx() const { return (rect.x_max - rect.x_min) / (nx - 1); }
    double dy() const { return (rect.y_max - rect.y_min) / (ny - 1); }
    Vec2 node(int i, int j) const { return {rect.x_min + i * dx(), rect.y_min + j * dy()}; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(j) * nx + i]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }

    // Catmull-Rom bicubic; reproduces node values exactly. Throws DomainError outside.
    double sample(Vec2 z) const;
    double l2_norm() const;  // discrete, with cell area
};

template <class F>
GridField tabulate(Rect r, int nx, int ny, F&& f) {
    GridField g(r, nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) g.at(i, j) = f(g.node(i, j));
    return g;
}

}  // namespace foliate
