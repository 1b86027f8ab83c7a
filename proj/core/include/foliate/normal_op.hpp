#pragma once

#include <functional>
#include <vector>

#include "foliate/transform.hpp"

namespace foliate {

// Even cutoff with chi(0) = 1.
class CutoffChi {
public:
    enum class Mode { Compact, Gaussian, Zero };

    // exp(1 - 1 / (1 - (s/C)^2)) on |s| < C
    static CutoffChi compact(double C);
    // exp(-s^2 / (2 nu)) truncated where the discarded tail fraction drops below tail_tol
    static CutoffChi gaussian(double nu, double tail_tol = 1e-10);
    static CutoffChi zero();

    double operator()(double s) const;
    Mode mode() const { return mode_; }
    double radius() const { return radius_; }  // support or truncation radius
    double nu() const { return nu_; }
    // Copy with the truncation radius replaced (Gaussian mode).
    CutoffChi truncated_at(double radius) const;

private:
    Mode mode_ = Mode::Compact;
    double radius_ = 1.0;
    double nu_ = 0.0;
};

struct NormalOpConfig {
    double F = 1.0;
    double lambda_step = 1.0 / 64.0;  // in lambda / x units
    double t_step = 2e-3;
    CutoffChi chi = CutoffChi::compact(1.0);

    void validate() const;
    // symmetric trapezoid nodes over [-R, R] in lambda / x units, with weights
    void lambda_nodes(std::vector<double>& nodes, std::vector<double>& weights) const;
};

using RayFunctional = std::function<double(const RayLaunch&)>;

// x^-2 sum_omega int chi(lambda / x) v(gamma_{x,y,lambda,omega}) dlambda at chart point z.
double backproject_L(const RayFunctional& v, const FoliationFrame& frame, Vec2 z, const NormalOpConfig& cfg);

struct AFResult {
    std::vector<double> values;
    int dropped = 0;  // rays cut by the time cap
};

// A_F f at frame points (x, y), x > 0, inner t integral along full two-sided segments.
AFResult apply_AF(const ScalarField& f, const NormalOpConfig& cfg, const Geometry& geo, const WeightSpec& w,
                  const std::vector<Vec2>& frame_points);

// 2 x^-1 e^{-F/x} A (e^{F/x} f), with A the omega = +1 average built on xray.
AFResult apply_AF_composed(const ScalarField& f, const NormalOpConfig& cfg, const Geometry& geo,
                           const WeightSpec& w, const std::vector<Vec2>& frame_points);

// -F X / (1 + x X) with X = (x' - x) / x^2, the stable form of F/x' - F/x.
inline double damping_exponent(double F, double x, double X) { return -F * X / (1.0 + x * X); }

// Boundary kernel e^{-F X} |Y|^-1 chi_even((X - alpha Y^2) / |Y|) rho_ff of the omega-reduced operator.
double boundary_kernel(double X, double Y, double F, double alpha, const CutoffChi& chi, double rho_ff);

struct KernelSample {
    double value = 0.0;
    bool reachable = false;
    double lambda_hat = 0.0;
    double J = 0.0;
    double t = 0.0;
    double alpha = 0.0;
};

// Kernel of the omega-reduced A_F in scattering coordinates (X, Y) around frame point (x, y).
// x = 0 uses the boundary form with the even part of chi.
KernelSample kernel_flat(double x, double y, double X, double Y, const NormalOpConfig& cfg, const Geometry& geo,
                         const WeightSpec& w);

}  // namespace foliate
