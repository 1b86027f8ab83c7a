#include "foliate/frame.hpp"

#include <limits>

#include "foliate/error.hpp"

namespace foliate {

Vec2 FoliationFrame::to_chart(double x, double y) const {
    const FoliationSpec& fol = geo_->fol;
    const Rect& dom = geo_->metric.domain();
    if (y < dom.y_min || y > dom.y_max) throw DomainError("frame y outside the chart");
    auto f = [&](double u) { return fol.depth({u, y}) - x; };

    const int n = 128;
    const double du = (dom.x_max - dom.x_min) / n;
    Vec2 best{};
    double best_dist = std::numeric_limits<double>::infinity();
    bool best_inside = false;
    double fa = f(dom.x_min);
    for (int k = 0; k < n; ++k) {
        double a = dom.x_min + k * du, b = (k + 1 == n) ? dom.x_max : a + du;
        double fb = f(b);
        if (fa == 0.0 || (fa < 0.0) != (fb < 0.0)) {
            double lo = a, hi = b, flo = fa;
            if (fa != 0.0) {
                for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
                    double mid = 0.5 * (lo + hi);
                    double fm = f(mid);
                    if ((fm < 0.0) == (flo < 0.0)) {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
            } else {
                hi = lo;
            }
            Vec2 z{0.5 * (lo + hi), y};
            // Newton polish keeps the root exact to rounding
            for (int it = 0; it < 2; ++it) {
                Jet2 j = fol.xtilde(z);
                if (j.grad.x == 0.0) break;
                double zn = z.x - (j.value + fol.c - x) / j.grad.x;
                if (zn >= a && zn <= b) z.x = zn;
            }
            bool inside = fol.rho(z).value >= -1e-12;
            double dist = norm(z - fol.p);
            if ((inside && !best_inside) || (inside == best_inside && dist < best_dist)) {
                best = z;
                best_dist = dist;
                best_inside = inside;
            }
        }
        fa = fb;
    }
    if (!std::isfinite(best_dist)) throw DomainError("no chart point at requested frame coordinates");
    return best;
}

Vec2 FoliationFrame::tangent_to_chart(Vec2 z, double lambda, double omega) const {
    Vec2 g = geo_->fol.xtilde(z).grad;
    if (g.x == 0.0) throw DomainError("depth is stationary along the first chart axis");
    return {(lambda - g.y * omega) / g.x, omega};
}

Vec2 FoliationFrame::tangent_to_frame(Vec2 z, Vec2 v) const {
    return {dot(geo_->fol.xtilde(z).grad, v), v.y};
}

double FoliationFrame::alpha_at(Vec2 z, double lambda, double omega) const {
    return 0.5 * hess_xtilde(geo_->metric, geo_->fol, z, tangent_to_chart(z, lambda, omega));
}

double FoliationFrame::alpha_boundary(double y) const {
    Vec2 z = to_chart(0.0, y);
    return alpha_at(z, 0.0, 1.0);
}

}  // namespace foliate
