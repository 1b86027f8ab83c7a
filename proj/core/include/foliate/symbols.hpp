#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "foliate/normal_op.hpp"

namespace foliate {

using cplx = std::complex<double>;

// a(z, zeta) with z a frame point (x, y) and zeta = (xi, eta) scattering covector components.
using SymbolFn = std::function<cplx(Vec2 z, double xi, double eta)>;

// Samples over base points x (log-radial |zeta|) x (angle); zeta = r (cos phi, sin phi).
struct SymbolGrid {
    std::vector<Vec2> base;
    std::vector<double> radii;
    std::vector<double> angles;
    std::vector<cplx> values;  // index(b, ir, ia)
    int order_m = -1;
    int order_l = 0;

    std::size_t index(std::size_t b, std::size_t ir, std::size_t ia) const {
        return (b * radii.size() + ir) * angles.size() + ia;
    }
    double xi(std::size_t ir, std::size_t ia) const;
    double eta(std::size_t ir, std::size_t ia) const;
    std::size_t size() const { return values.size(); }
    bool finite() const;
};

// n_radii log-spaced radii in [r_min, r_max], n_angles angles uniform in [0, 2 pi).
SymbolGrid make_symbol_grid(std::vector<Vec2> base, double r_min, double r_max, int n_radii, int n_angles);
// Fill values from fn; parallel over base points.
void sample_symbol(SymbolGrid& grid, const SymbolFn& fn);

struct ConeSpec {
    double aperture = 1.0;  // cone |xi| >= aperture |eta|
    double c_ell = 0.0;     // certified lower bound of |zeta| |a| on the cone

    bool contains(double xi, double eta) const { return std::abs(xi) >= aperture * std::abs(eta); }
    void validate() const;
};

// sqrt(F / alpha) (F^2 + xi^2)^-1/2 exp(-F eta^2 / (2 alpha (xi^2 + F^2))) rho_ff.
double boundary_symbol_closed(double xi, double eta, double F, double alpha, double rho_ff = 1.0);

struct SymbolOptions {
    double tol = 1e-8;   // relative to the absolute integrand mass
    int max_levels = 12;
};

// Left symbol of A_F from the normalized (t, lambda) oscillatory integral, both omega summed.
// Throws AccuracyError carrying the best estimate when refinement does not settle.
cplx numeric_symbol(Vec2 frame_point, double xi, double eta, const NormalOpConfig& cfg, const Geometry& geo,
                    const WeightSpec& w, const SymbolOptions& opts = {});

// Same boundary symbol from the scattering-coordinate kernel, omega-reduced normalization
// (half of numeric_symbol at x = 0).
cplx appendix_symbol(double y, double xi, double eta, const NormalOpConfig& cfg, const Geometry& geo,
                     const WeightSpec& w, const SymbolOptions& opts = {});

// Leading stationary-phase value 2 pi |xi|^-1 (chi(eta/xi) + chi(-eta/xi)) rho_ff.
double stationary_phase_symbol(double xi, double eta, const CutoffChi& chi, double rho_ff);

// Least-squares constant c with numeric ~ c * closed.
double calibrate_constant(const std::vector<cplx>& numeric, const std::vector<double>& closed);

struct CriticalPoint {
    double t_hat = 0.0;
    double lambda_hat = 0.0;
    double hessian[2][2] = {{0, 0}, {0, 0}};
    double det = 0.0;
    double gradient_norm = 0.0;     // analytic gradient at the point
    double fd_gradient_norm = 0.0;  // central-difference gradient, step scaled to the phase
};

// Critical point of xi (lambda t + alpha t^2) + eta omega t. Throws DomainError on xi = 0.
CriticalPoint critical_points(double xi, double eta, int omega, double alpha);

struct CertificateRow {
    std::size_t base = 0;
    double xi = 0.0, eta = 0.0, radius = 0.0, value = 0.0;  // value = |zeta| |a|
    std::string status;  // PASS, FAIL or NOT_CERTIFIED
};

struct EllipticityReport {
    double min_value = 0.0;
    std::vector<CertificateRow> rows;
    std::vector<CertificateRow> violations;
    bool certified() const { return violations.empty() && min_value > 0.0; }
};

// Min of |zeta| |a| over nodes with |zeta| >= r_min, restricted to the cone unless all_directions.
// A node fails when |zeta| |a| <= floor.
EllipticityReport ellipticity_scan(const SymbolGrid& a, const ConeSpec& cone, double r_min = 4.0,
                                   bool all_directions = false, double floor = 0.0);

// Lower-bound pieces of the completion.
double completion_chi1(double t, double C);
double completion_chi(double t, double C);  // -t + C chi1(t)
double completion_cutoff(double r);         // 0 for r <= 1, 1 for r >= 2

struct Completion {
    double C = 0.0;
    SymbolGrid theta;     // unwrapped phase of a0 (real part)
    SymbolGrid a0_adjusted;  // e^{-i theta} a0
    SymbolGrid a1;        // real
    SymbolGrid total;     // e^{-i theta} a0 + a1
    std::vector<double> b0, b1;
};

// Requires cone.c_ell > 0 and every in-cone node with |zeta| >= 1 to satisfy |zeta| |a0| >= c_ell.
Completion build_elliptic_completion(const SymbolGrid& a0, const ConeSpec& cone);

// Pointwise a1 for an a0 given as a function; the phase is taken from the nearest cone direction.
SymbolFn completion_symbol(SymbolFn a0, const ConeSpec& cone);

}  // namespace foliate
