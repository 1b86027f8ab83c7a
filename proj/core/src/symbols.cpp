#include "foliate/symbols.hpp"

#include <cmath>
#include <numbers>

#include "foliate/error.hpp"
#include "foliate/parallel.hpp"

namespace foliate {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Half-width in t_hat beyond which exp(-F alpha t^2) int chi(s) e^{F |s t|} ds is below 1e-16 of its peak.
double t_hat_extent(double F, double alpha, const CutoffChi& chi) {
    const double R = chi.radius();
    const int ns = 200;
    auto bound = [&](double t) {
        double acc = 0.0;
        for (int k = 0; k <= ns; ++k) {
            double s = -R + 2.0 * R * k / ns;
            acc += chi(s) * std::exp(F * std::abs(s * t) - F * alpha * t * t);
        }
        return acc;
    };
    const double b0 = bound(0.0);
    if (!(b0 > 0.0)) return 0.0;
    double t = 0.25;
    while (t < 1e4 && bound(t) > 1e-16 * b0) t += 0.25;
    return t;
}

double chi_mass(const CutoffChi& chi) {
    const double R = chi.radius();
    const int ns = 400;
    double acc = 0.0;
    for (int k = 0; k <= ns; ++k) acc += chi(-R + 2.0 * R * k / ns);
    return acc * 2.0 * R / ns;
}

// int chi(s) e^{c s} ds over [-R, R] by trapezoid with a geometric recurrence, refined until two
// successive levels agree to tol times the absolute mass or to abs_tol.
cplx inner_lambda(cplx c, const CutoffChi& chi, double omega_scale, double abs_tol, const SymbolOptions& opts) {
    const double R = chi.radius();
    int n = std::max(16, static_cast<int>(std::ceil(2.0 * R * (omega_scale + 20.0) / kTwoPi)));
    double h = 2.0 * R / n;
    auto sweep = [&](double start, double step, int count, double& l1) {
        cplx r = std::exp(c * step), e = std::exp(c * start), acc = 0.0;
        for (int k = 0; k < count; ++k) {
            double s = start + k * step;
            double v = chi(s);
            acc += v * e;
            l1 += std::abs(v) * std::abs(e);
            e *= r;
        }
        return acc;
    };
    double l1 = 0.0;
    // endpoints carry chi(+-R) ~ 0; include them with half weight
    cplx sum = sweep(-R, h, n + 1, l1);
    sum -= 0.5 * (chi(-R) * std::exp(-c * R) + chi(R) * std::exp(c * R));
    cplx S = sum * h;
    for (int level = 0; level < opts.max_levels; ++level) {
        double l1_odd = 0.0;
        cplx odd = sweep(-R + 0.5 * h, h, n, l1_odd);
        l1 += l1_odd;
        sum += odd;
        n *= 2;
        h *= 0.5;
        cplx S2 = sum * h;
        if (std::abs(S2 - S) <= std::max(opts.tol * l1 * h, abs_tol)) return S2;
        S = S2;
    }
    throw AccuracyError("inner lambda quadrature did not settle", S.real(), S.imag());
}

struct BoundaryData {
    double alpha, rho_plus, rho_minus;
};

BoundaryData boundary_data(double y, const Geometry& geo, const WeightSpec& w) {
    FoliationFrame frame(geo);
    Vec2 z0 = frame.to_chart(0.0, y);
    BoundaryData d;
    d.alpha = frame.alpha_boundary(y);
    if (!(d.alpha > 0.0)) throw DomainError("boundary symbol needs alpha > 0 (convexity)");
    d.rho_plus = w.diagonal(geo, z0, frame.tangent_to_chart(z0, 0.0, 1.0));
    d.rho_minus = w.diagonal(geo, z0, frame.tangent_to_chart(z0, 0.0, -1.0));
    return d;
}

// Trapezoid on [-T, T] refined by halving until successive levels agree.
template <class G>
cplx refine_trapezoid(const G& g, double T, double h0, const SymbolOptions& opts, const char* what) {
    int n = std::max(8, static_cast<int>(std::ceil(2.0 * T / h0)));
    double h = 2.0 * T / n;
    cplx sum = 0.0;
    double l1 = 0.0;
    for (int k = 0; k <= n; ++k) {
        cplx v = g(-T + k * h);
        double wk = (k == 0 || k == n) ? 0.5 : 1.0;
        sum += wk * v;
        l1 += wk * std::abs(v);
    }
    cplx S = sum * h;
    for (int level = 0; level < opts.max_levels; ++level) {
        for (int k = 0; k < n; ++k) {
            cplx v = g(-T + (k + 0.5) * h);
            sum += v;
            l1 += std::abs(v);
        }
        n *= 2;
        h *= 0.5;
        cplx S2 = sum * h;
        if (std::abs(S2 - S) <= opts.tol * l1 * h) return S2;
        S = S2;
    }
    throw AccuracyError(what, S.real(), S.imag());
}

cplx boundary_numeric(double y, double xi, double eta, const NormalOpConfig& cfg, const Geometry& geo,
                      const WeightSpec& w, const SymbolOptions& opts) {
    BoundaryData d = boundary_data(y, geo, w);
    const double F = cfg.F;
    const double T = t_hat_extent(F, d.alpha, cfg.chi);
    if (T == 0.0) return 0.0;
    const cplx q(-F, xi);
    const double mass = chi_mass(cfg.chi);
    auto g = [&](double t) -> cplx {
        // what matters is the error after the outer factor exp(-F alpha t^2)
        double abs_tol = opts.tol * mass * std::exp(std::min(F * d.alpha * t * t, 700.0));
        cplx I = inner_lambda(q * t, cfg.chi, std::abs(xi * t) + F * std::abs(t), abs_tol, opts);
        cplx rho = d.rho_plus * std::exp(cplx(0.0, eta * t)) + d.rho_minus * std::exp(cplx(0.0, -eta * t));
        return std::exp(q * (d.alpha * t * t)) * I * rho;
    };
    double h0 = 1.0 / (std::hypot(xi, eta) + F + 1.0);
    return refine_trapezoid(g, T, h0, opts, "outer t quadrature did not settle");
}

cplx interior_numeric(Vec2 zf, double xi, double eta, const NormalOpConfig& cfg, const Geometry& geo,
                      const WeightSpec& w, const SymbolOptions& opts) {
    FoliationFrame frame(geo);
    const double x = zf.x, F = cfg.F;
    const Vec2 z = frame.to_chart(x, zf.y);
    const double alpha = std::max(frame.alpha_at(z, 0.0, 1.0), frame.alpha_at(z, 0.0, -1.0));
    if (!(alpha > 0.0)) throw DomainError("symbol needs alpha > 0 (convexity)");
    const double T = t_hat_extent(F, alpha, cfg.chi);
    const double R = cfg.chi.radius();
    const double rate = (std::abs(xi) + F) * (R + 2.0 * alpha * T + 1.0) + std::abs(eta);
    const double dth = kTwoPi / (4.0 * rate);
    const int nt = static_cast<int>(std::ceil(T / dth));

    ShootOptions sopts = geo.shoot;
    sopts.time_cap = x * T;
    sopts.h = std::min(cfg.t_step, x / 4.0);

    // t_hat integral along the geodesic with frame slope x lambda_hat and direction omega
    auto along = [&](double lh, double omega) -> cplx {
        double c = cfg.chi(lh);
        if (c == 0.0) return 0.0;
        Vec2 v = frame.tangent_to_chart(z, x * lh, omega);
        double rho = w.diagonal(geo, z, v);
        TwoSidedPath two = shoot_two_sided(geo.metric, geo.fol, z, v, sopts);
        cplx acc = 0.0;
        for (const GeodesicPath* p : {&two.forward, &two.backward}) {
            const double tend = p->exit_time();
            for (int k = 0; k <= nt; ++k) {
                double t = k * dth * x;
                if (t > tend) break;
                double wk = (k == 0) ? 0.5 : 1.0;  // t = 0 is shared by both branches
                if (k == nt || (k + 1) * dth * x > tend) wk *= 0.5;
                Vec2 q = p->at(t).z;
                double xp = geo.fol.depth(q);
                double X = (xp - x) / (x * x), Yh = (q.y - zf.y) / x;
                double damp = damping_exponent(F, x, X);
                acc += wk * std::exp(cplx(damp, xi * X + eta * Yh));
            }
        }
        return c * rho * acc * dth;
    };

    cplx total = 0.0;
    for (double omega : {1.0, -1.0}) {
        auto g = [&](double lh) { return along(lh, omega); };
        double h0 = kTwoPi / (std::abs(xi) * T + F * T + 20.0);
        total += refine_trapezoid(g, R, h0, opts, "lambda quadrature did not settle");
    }
    return total;
}

}  // namespace

double SymbolGrid::xi(std::size_t ir, std::size_t ia) const { return radii[ir] * std::cos(angles[ia]); }
double SymbolGrid::eta(std::size_t ir, std::size_t ia) const { return radii[ir] * std::sin(angles[ia]); }

bool SymbolGrid::finite() const {
    for (const cplx& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

SymbolGrid make_symbol_grid(std::vector<Vec2> base, double r_min, double r_max, int n_radii, int n_angles) {
    if (!(r_min > 0.0 && r_max >= r_min) || n_radii < 1 || n_angles < 1)
        throw ValidationError("symbol grid needs 0 < r_min <= r_max and positive counts");
    SymbolGrid g;
    g.base = std::move(base);
    for (int i = 0; i < n_radii; ++i) {
        double f = n_radii == 1 ? 0.0 : static_cast<double>(i) / (n_radii - 1);
        g.radii.push_back(r_min * std::pow(r_max / r_min, f));
    }
    for (int j = 0; j < n_angles; ++j) g.angles.push_back(kTwoPi * j / n_angles);
    g.values.assign(g.base.size() * g.radii.size() * g.angles.size(), 0.0);
    return g;
}

void sample_symbol(SymbolGrid& grid, const SymbolFn& fn) {
    grid.values.assign(grid.base.size() * grid.radii.size() * grid.angles.size(), 0.0);
    parallel_for(grid.base.size(), [&](std::size_t b) {
        for (std::size_t ir = 0; ir < grid.radii.size(); ++ir)
            for (std::size_t ia = 0; ia < grid.angles.size(); ++ia)
                grid.values[grid.index(b, ir, ia)] = fn(grid.base[b], grid.xi(ir, ia), grid.eta(ir, ia));
    });
}

void ConeSpec::validate() const {
    if (!(aperture > 0.0)) throw ValidationError("cone aperture must be positive");
}

double boundary_symbol_closed(double xi, double eta, double F, double alpha, double rho_ff) {
    if (!(alpha > 0.0)) throw DomainError("boundary symbol needs alpha > 0 (convexity)");
    if (!(F > 0.0)) throw ValidationError("F must be positive");
    if (!(rho_ff > 0.0)) throw ValidationError("weight must be positive");
    double q = xi * xi + F * F;
    return rho_ff * std::sqrt(F / alpha) / std::sqrt(q) * std::exp(-F * eta * eta / (2.0 * alpha * q));
}

cplx numeric_symbol(Vec2 frame_point, double xi, double eta, const NormalOpConfig& cfg, const Geometry& geo,
                    const WeightSpec& w, const SymbolOptions& opts) {
    cfg.validate();
    if (frame_point.x < 0.0) throw DomainError("symbol needs x >= 0");
    if (frame_point.x == 0.0) return boundary_numeric(frame_point.y, xi, eta, cfg, geo, w, opts);
    return interior_numeric(frame_point, xi, eta, cfg, geo, w, opts);
}

cplx appendix_symbol(double y, double xi, double eta, const NormalOpConfig& cfg, const Geometry& geo,
                     const WeightSpec& w, const SymbolOptions& opts) {
    cfg.validate();
    BoundaryData d = boundary_data(y, geo, w);
    const double F = cfg.F, R = cfg.chi.radius();
    const double T = t_hat_extent(F, d.alpha, cfg.chi);
    if (T == 0.0) return 0.0;

    // X integral across the kernel support at fixed Y
    auto inner = [&](double Y, int refine) -> cplx {
        double ay = std::abs(Y);
        double lo = d.alpha * Y * Y - R * ay, hi = d.alpha * Y * Y + R * ay;
        int n = std::max(16, static_cast<int>(std::ceil(2.0 * R * (std::abs(xi * Y) + F * ay + 20.0) / kTwoPi)));
        n <<= refine;
        double dX = (hi - lo) / n;
        cplx acc = 0.0;
        for (int k = 0; k <= n; ++k) {
            double X = lo + k * dX;
            double wk = (k == 0 || k == n) ? 0.5 : 1.0;
            acc += wk * boundary_kernel(X, Y, F, d.alpha, cfg.chi, d.rho_plus) * std::exp(cplx(0.0, xi * X));
        }
        return acc * dX * std::exp(cplx(0.0, eta * Y));
    };

    // midpoint rule in Y, refined by doubling the cell count
    int m = std::max(16, static_cast<int>(std::ceil(2.0 * T * (std::hypot(xi, eta) + F + 1.0))));
    auto midpoint = [&](int cells, int refine, double& l1) {
        double dY = 2.0 * T / cells;
        cplx acc = 0.0;
        l1 = 0.0;
        for (int k = 0; k < cells; ++k) {
            cplx v = inner(-T + (k + 0.5) * dY, refine);
            acc += v;
            l1 += std::abs(v);
        }
        l1 *= dY;
        return acc * dY;
    };
    double l1 = 0.0;
    cplx S = midpoint(m, 0, l1);
    for (int level = 1; level <= opts.max_levels; ++level) {
        m *= 2;
        cplx S2 = midpoint(m, std::min(level, 2), l1);
        if (std::abs(S2 - S) <= opts.tol * 10.0 * l1) return S2;
        S = S2;
    }
    throw AccuracyError("kernel transform did not settle", S.real(), S.imag());
}

double stationary_phase_symbol(double xi, double eta, const CutoffChi& chi, double rho_ff) {
    if (xi == 0.0) throw DomainError("stationary phase needs xi != 0");
    return kTwoPi / std::abs(xi) * (chi(eta / xi) + chi(-eta / xi)) * rho_ff;
}

double calibrate_constant(const std::vector<cplx>& numeric, const std::vector<double>& closed) {
    if (numeric.size() != closed.size() || closed.empty()) throw ShapeError("calibration needs matching samples");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) {
        num += numeric[i].real() * closed[i];
        den += closed[i] * closed[i];
    }
    if (!(den > 0.0)) throw ValidationError("calibration needs a nonzero closed form");
    return num / den;
}

CriticalPoint critical_points(double xi, double eta, int omega, double alpha) {
    if (xi == 0.0) throw DomainError("degenerate direction xi = 0");
    if (omega != 1 && omega != -1) throw ArgumentError("omega must be +1 or -1");
    CriticalPoint cp;
    cp.t_hat = 0.0;
    cp.lambda_hat = -eta * omega / xi;
    cp.hessian[0][0] = 2.0 * alpha * xi;
    cp.hessian[0][1] = cp.hessian[1][0] = xi;
    cp.hessian[1][1] = 0.0;
    cp.det = cp.hessian[0][0] * cp.hessian[1][1] - cp.hessian[0][1] * cp.hessian[1][0];
    auto phase = [&](double t, double l) { return xi * (l * t + alpha * t * t) + eta * omega * t; };
    double gt = xi * cp.lambda_hat + 2.0 * xi * alpha * cp.t_hat + eta * omega;
    double gl = xi * cp.t_hat;
    cp.gradient_norm = std::hypot(gt, gl);
    // the phase is quadratic, so the central difference is exact up to rounding
    double h = 1e-3;
    double ft = (phase(cp.t_hat + h, cp.lambda_hat) - phase(cp.t_hat - h, cp.lambda_hat)) / (2 * h);
    double fl = (phase(cp.t_hat, cp.lambda_hat + h) - phase(cp.t_hat, cp.lambda_hat - h)) / (2 * h);
    cp.fd_gradient_norm = std::hypot(ft, fl);
    return cp;
}

EllipticityReport ellipticity_scan(const SymbolGrid& a, const ConeSpec& cone, double r_min, bool all_directions,
                                   double floor) {
    cone.validate();
    EllipticityReport rep;
    bool any = false;
    double mn = 0.0;
    for (std::size_t b = 0; b < a.base.size(); ++b) {
        for (std::size_t ir = 0; ir < a.radii.size(); ++ir) {
            if (a.radii[ir] < r_min) continue;
            for (std::size_t ia = 0; ia < a.angles.size(); ++ia) {
                CertificateRow row;
                row.base = b;
                row.xi = a.xi(ir, ia);
                row.eta = a.eta(ir, ia);
                row.radius = a.radii[ir];
                row.value = a.radii[ir] * std::abs(a.values[a.index(b, ir, ia)]);
                bool scope = all_directions || cone.contains(row.xi, row.eta);
                if (!scope) {
                    row.status = "NOT_CERTIFIED";
                } else {
                    mn = any ? std::min(mn, row.value) : row.value;
                    any = true;
                    row.status = row.value > floor ? "PASS" : "FAIL";
                    if (row.status == "FAIL") rep.violations.push_back(row);
                }
                rep.rows.push_back(row);
            }
        }
    }
    rep.min_value = any ? mn : 0.0;
    return rep;
}

double completion_chi1(double t, double C) {
    if (t <= 0.5 * C) return 0.5;
    if (t >= C) return t / C;
    double s = (t - 0.5 * C) / (0.5 * C);
    double q = s * s * s * (6.0 + s * (-8.0 + 3.0 * s));
    return 0.5 + 0.5 * q;
}

double completion_chi(double t, double C) { return t >= C ? 0.0 : -t + C * completion_chi1(t, C); }

double completion_cutoff(double r) {
    if (r <= 1.0) return 0.0;
    if (r >= 2.0) return 1.0;
    double s = r - 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

namespace {

double angular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

}  // namespace

Completion build_elliptic_completion(const SymbolGrid& a0, const ConeSpec& cone) {
    cone.validate();
    if (!(cone.c_ell > 0.0)) throw PreconditionError("elliptic completion needs a certified cone bound c_ell > 0");
    const std::size_t nb = a0.base.size(), nr = a0.radii.size(), na = a0.angles.size();
    std::vector<std::size_t> in_cone;
    for (std::size_t ia = 0; ia < na; ++ia)
        if (cone.contains(std::cos(a0.angles[ia]), std::sin(a0.angles[ia]))) in_cone.push_back(ia);
    if (in_cone.empty()) throw PreconditionError("no symbol directions inside the cone");
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t ir = 0; ir < nr; ++ir) {
            if (a0.radii[ir] < 1.0) continue;
            for (std::size_t ia : in_cone)
                if (a0.radii[ir] * std::abs(a0.values[a0.index(b, ir, ia)]) < cone.c_ell * (1.0 - 1e-12))
                    throw PreconditionError("symbol falls below the certified cone bound");
        }
    // nearest in-cone angle for every direction
    std::vector<std::size_t> source(na);
    for (std::size_t ia = 0; ia < na; ++ia) {
        std::size_t best = in_cone.front();
        for (std::size_t j : in_cone)
            if (angular_distance(a0.angles[ia], a0.angles[j]) < angular_distance(a0.angles[ia], a0.angles[best]))
                best = j;
        source[ia] = best;
    }

    Completion out;
    out.C = cone.c_ell;
    out.theta = out.a0_adjusted = out.a1 = out.total = a0;
    out.b0.assign(a0.size(), 0.0);
    out.b1.assign(a0.size(), 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        // unwrap the phase radially along every in-cone direction
        std::vector<double> theta(nr * na, 0.0);
        for (std::size_t ia : in_cone) {
            double prev = 0.0;
            for (std::size_t ir = 0; ir < nr; ++ir) {
                double th = std::arg(a0.values[a0.index(b, ir, ia)]);
                if (ir > 0) th += kTwoPi * std::round((prev - th) / kTwoPi);
                theta[ir * na + ia] = prev = th;
            }
        }
        for (std::size_t ir = 0; ir < nr; ++ir) {
            const double r = a0.radii[ir];
            for (std::size_t ia = 0; ia < na; ++ia) {
                std::size_t k = a0.index(b, ir, ia);
                double th = theta[ir * na + source[ia]];
                cplx adj = std::exp(cplx(0.0, -th)) * a0.values[k];
                double b0 = r * adj.real();
                double b1 = completion_chi(b0, out.C);
                double a1 = completion_cutoff(r) * b1 / r;
                out.theta.values[k] = th;
                out.a0_adjusted.values[k] = adj;
                out.a1.values[k] = a1;
                out.total.values[k] = adj + a1;
                out.b0[k] = b0;
                out.b1[k] = b1;
            }
        }
    }
    return out;
}

SymbolFn completion_symbol(SymbolFn a0, const ConeSpec& cone) {
    cone.validate();
    if (!(cone.c_ell > 0.0)) throw PreconditionError("elliptic completion needs a certified cone bound c_ell > 0");
    return [a0 = std::move(a0), cone](Vec2 z, double xi, double eta) -> cplx {
        double r = std::hypot(xi, eta);
        if (r == 0.0) return 0.0;
        // project the direction onto the nearest cone edge when outside
        double pxi = xi, peta = eta;
        if (!cone.contains(xi, eta)) {
            double phi = std::atan(1.0 / cone.aperture);
            double sx = xi >= 0.0 ? 1.0 : -1.0, sy = eta >= 0.0 ? 1.0 : -1.0;
            pxi = sx * r * std::cos(phi);
            peta = sy * r * std::sin(phi);
        }
        double th = std::arg(a0(z, pxi, peta));
        double b0 = r * (std::exp(cplx(0.0, -th)) * a0(z, xi, eta)).real();
        return completion_cutoff(r) * completion_chi(b0, cone.c_ell) / r;
    };
}

}  // namespace foliate
