#include "foliate/grid_field.hpp"

#include "foliate/error.hpp"

namespace foliate {

GridField::GridField(Rect r, int nx_, int ny_, double fill) : rect(r), nx(nx_), ny(ny_) {
    if (nx < 2 || ny < 2) throw ShapeError("grid field needs at least 2x2 nodes");
    values.assign(static_cast<std::size_t>(nx) * ny, fill);
}

namespace {

// cubic convolution weights, a = -1/2
void catmull_rom(double t, double w[4]) {
    double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}

}  // namespace

double GridField::sample(Vec2 z) const {
    const double tol = 1e-12 * (1.0 + rect.diameter());
    if (z.x < rect.x_min - tol || z.x > rect.x_max + tol || z.y < rect.y_min - tol ||
        z.y > rect.y_max + tol)
        throw DomainError("sample point outside grid field");
    double u = (z.x - rect.x_min) / dx(), v = (z.y - rect.y_min) / dy();
    int i = std::clamp(static_cast<int>(std::floor(u)), 0, nx - 2);
    int j = std::clamp(static_cast<int>(std::floor(v)), 0, ny - 2);
    double wx[4], wy[4];
    catmull_rom(u - i, wx);
    catmull_rom(v - j, wy);
    double acc = 0.0;
    for (int b = 0; b < 4; ++b) {
        int jj = std::clamp(j - 1 + b, 0, ny - 1);
        double row = 0.0;
        for (int a = 0; a < 4; ++a) row += wx[a] * at(std::clamp(i - 1 + a, 0, nx - 1), jj);
        acc += wy[b] * row;
    }
    return acc;
}

double GridField::l2_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s * dx() * dy());
}

}  // namespace foliate
