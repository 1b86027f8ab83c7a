#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "foliate/profile.hpp"
#include "foliate/transform.hpp"

namespace foliate {

// Everything the adapted inverse problem needs: geometry, weight, launch grid,
// quadrature step and the chart grid used for field-side norms.
struct Scene {
    Geometry geo;
    WeightSpec weight = WeightSpec::constant();
    RayGrid grid;
    double h = 5e-3;
    Rect chart;
    int chart_nx = 64, chart_ny = 64;

    double c() const { return geo.fol.c; }
    void validate() const;
};

// n x n launch points over (0, c) x (region y-range), nl slopes in [-C, C]; chart grid n x n
// over the region bounding box.
Scene make_scene(Geometry geo, int n = 64, int nl = 16, double C = 1.0, double h = 5e-3,
                 WeightSpec w = WeightSpec::constant());

struct InversionConfig {
    double mu = -1.0;  // negative: 1e-6 ||data||
    int max_iterations = 1000;
    double tolerance = 1e-10;  // on the relative normal-equation residual
    std::vector<double> c_ladder{0.3, 0.2, 0.1};
    double F = 0.005;
    int profile_nodes = 64;

    void validate() const;
};

// Profile layout on [-c, 0] with zero extension.
AdaptedProfile zero_profile(double c, int nodes);

// Per-ray Hermite moments of the adapted basis. Row r integrates u(x~) along one ray:
// (M u)_r = sum_j a_rj u_j + b_rj m_j with slopes m = D u.
class RayBundle {
public:
    RayBundle(const Scene& scene, int profile_nodes);

    int nodes() const { return n_; }
    double s_min() const { return s_min_; }
    double spacing() const { return (s_max_ - s_min_) / (n_ - 1); }
    std::size_t rows() const { return first_.size(); }
    // sinogram entry -> row, -1 for invalid launches
    const std::vector<std::int64_t>& entry_row() const { return entry_row_; }
    // launch depth and smallest x~ reached by each row
    const std::vector<double>& row_depth() const { return depth_; }
    const std::vector<double>& row_min_xtilde() const { return min_xt_; }
    const RayGrid& grid() const { return grid_; }
    double h() const { return h_; }
    const std::string& weight_name() const { return weight_name_; }
    int capped() const { return capped_; }

    // out[r] = (M u)_r for r in rows
    void apply(const std::vector<double>& u, std::vector<double>& out) const;
    // out = M^T y
    void apply_adjoint(const std::vector<double>& y, std::vector<double>& out) const;

    Sinogram to_sinogram(const std::vector<double>& row_values) const;
    // valid sinogram entries gathered per row (mirrored entries averaged)
    std::vector<double> gather(const Sinogram& s) const;

private:
    int n_;
    double s_min_, s_max_;
    RayGrid grid_;
    double h_;
    std::string weight_name_;
    int capped_ = 0;
    std::vector<double> D_;  // row-major slope map
    std::vector<std::int64_t> entry_row_;
    std::vector<std::int64_t> offset_;
    std::vector<int> first_, count_;
    std::vector<double> a_, b_;
    std::vector<double> depth_, min_xt_;
};

Sinogram restricted_forward(const AdaptedProfile& u, const RayBundle& bundle);
Sinogram restricted_forward(const AdaptedProfile& u, const Scene& scene);

struct ReconReport {
    std::vector<double> residuals;  // stacked least-squares residual per iterate
    double relative_error = std::numeric_limits<double>::quiet_NaN();
    double stability_ratio = std::numeric_limits<double>::quiet_NaN();
    double condition_estimate = std::numeric_limits<double>::quiet_NaN();
    double mu = 0.0;
    int iterations = 0;
    bool converged = false;
    bool stagnated = false;
    // layer stripping only
    double s_lo = 0.0, s_hi = 0.0;
    std::size_t rays_used = 0;
};

// Relative L2 distance of two profiles over [s_lo, s_hi], sampled finely.
double profile_error(const AdaptedProfile& got, const AdaptedProfile& truth, double s_lo, double s_hi);

std::pair<AdaptedProfile, ReconReport> local_reconstruct(const Sinogram& data, const RayBundle& bundle,
                                                         const Scene& scene, const InversionConfig& cfg,
                                                         const AdaptedProfile* truth = nullptr);
std::pair<AdaptedProfile, ReconReport> local_reconstruct(const Sinogram& data, const Scene& scene,
                                                         const InversionConfig& cfg,
                                                         const AdaptedProfile* truth = nullptr);

struct LCurvePoint {
    double mu = 0.0;
    double residual = 0.0;  // weighted data misfit
    double seminorm = 0.0;  // first differences of the profile
    double relative_error = std::numeric_limits<double>::quiet_NaN();
};

// Reconstructs once per mu; mus default to 16 log-spaced values in [1e-10, 1e-1] * ||data||.
std::vector<LCurvePoint> lcurve_sweep(const Sinogram& data, const RayBundle& bundle, const Scene& scene,
                                      const InversionConfig& cfg, std::vector<double> mus = {},
                                      const AdaptedProfile* truth = nullptr);
// Index of largest Menger curvature of the log-log curve.
std::size_t lcurve_corner(const std::vector<LCurvePoint>& curve);

struct LayerStripResult {
    AdaptedProfile profile;
    std::vector<ReconReport> layers;  // shallowest first
};

// Slabs split the profile intervals as evenly as the nodes allow; needs n_slabs <= profile_nodes - 1.
LayerStripResult layer_strip(const Sinogram& data, const RayBundle& bundle, const Scene& scene,
                             const InversionConfig& cfg, int n_slabs,
                             const AdaptedProfile* truth = nullptr);

struct ProbeRow {
    double c = 0.0;
    double sigma_min = 0.0, sigma_max = 0.0;
    double condition = 0.0;
    bool flagged = false;  // power or inverse iteration did not settle
};

using SceneFactory = std::function<Scene(double c)>;

// Extremal singular values of the weighted restricted operator for each depth on the ladder.
std::vector<ProbeRow> contraction_probe(const SceneFactory& make, const InversionConfig& cfg);

// Dense weighted forward matrix W^{1/2} M, row-major rows() x nodes().
std::vector<double> weighted_matrix(const RayBundle& bundle, double F);
// exp(-2 F / x) with x clamped below at half the first launch cell
std::vector<double> row_weights(const RayBundle& bundle, double F);

// Field side: weighted L2 over chart cells in the region. Data side: weighted l2 plus
// first difference quotients over (x, y, lambda). Weight exp(-F/x), x clamped at half a cell.
double field_norm(const AdaptedProfile& u, const Scene& scene, double F);
double sinogram_norm(const Sinogram& s, double F);

struct StabilityReport {
    std::vector<double> ratios;
    double max_ratio = 0.0, median_ratio = 0.0;
    bool alarm = false;  // some nonzero phantom has ||I f|| < 1e-10 ||f||
    std::vector<int> alarm_members;
};

StabilityReport stability_ratios(const std::vector<AdaptedProfile>& family, const RayBundle& bundle,
                                 const Scene& scene, double F);
// Seeded Gaussian-mixture phantoms on [-c, 0].
std::vector<AdaptedProfile> random_phantoms(double c, int nodes, int count, std::uint64_t seed);
StabilityReport stability_report(const Scene& scene, const InversionConfig& cfg, int count,
                                 std::uint64_t seed = 1);

}  // namespace foliate
