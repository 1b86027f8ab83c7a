#include "foliate/inversion.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "foliate/error.hpp"
#include "foliate/parallel.hpp"

namespace foliate {

using Vec = std::vector<double>;

namespace {

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

// Half the first launch cell, the clamp for x in the weights.
double half_cell(const RayGrid& g) {
    if (g.x.size() > 1) return 0.5 * (g.x[1] - g.x[0]);
    return g.x.empty() ? 0.0 : g.x[0];
}

struct LsqOperator {
    std::size_t m = 0, n = 0;
    std::function<void(const Vec&, Vec&)> forward;  // n -> m
    std::function<void(const Vec&, Vec&)> adjoint;  // m -> n
};

struct LsqResult {
    Vec x;
    std::vector<double> residuals;
    int iterations = 0;
    bool converged = false, stagnated = false;
    double condition = std::numeric_limits<double>::quiet_NaN();
};

// Condition of A^T A from the Lanczos matrix hidden in the CG coefficients.
double lanczos_condition(const std::vector<double>& alpha, const std::vector<double>& beta) {
    const int k = static_cast<int>(alpha.size());
    if (k == 0) return std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        T(i, i) = 1.0 / alpha[i] + (i > 0 ? beta[i - 1] / alpha[i - 1] : 0.0);
        if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = std::sqrt(beta[i]) / alpha[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(hi / lo);
}

// CGLS: minimizes ||A x - b||; the recorded residual never increases.
LsqResult cgls(const LsqOperator& A, const Vec& b, int max_it, double tol) {
    LsqResult res;
    res.x.assign(A.n, 0.0);
    Vec r = b, s(A.n), q(A.m);
    A.adjoint(r, s);
    Vec p = s;
    double gamma = dot(s, s);
    const double s0 = std::sqrt(gamma);
    res.residuals.push_back(norm(r));
    if (gamma == 0.0) {
        res.converged = true;
        return res;
    }
    std::vector<double> alphas, betas;
    for (int it = 0; it < max_it; ++it) {
        A.forward(p, q);
        double delta = dot(q, q);
        if (!(delta > 0.0)) {
            res.stagnated = true;
            break;
        }
        double alpha = gamma / delta;
        for (std::size_t i = 0; i < A.n; ++i) res.x[i] += alpha * p[i];
        for (std::size_t i = 0; i < A.m; ++i) r[i] -= alpha * q[i];
        double rn = norm(r), last = res.residuals.back();
        if (rn > last) {  // rounding floor reached: keep the previous iterate
            for (std::size_t i = 0; i < A.n; ++i) res.x[i] -= alpha * p[i];
            res.stagnated = true;
            break;
        }
        A.adjoint(r, s);
        double gamma_new = dot(s, s);
        res.residuals.push_back(rn);
        res.iterations = it + 1;
        alphas.push_back(alpha);
        if (std::sqrt(gamma_new) <= tol * s0) {
            res.converged = true;
            break;
        }
        if (last - rn < 1e-12 * last) {
            res.stagnated = true;
            break;
        }
        double beta = gamma_new / gamma;
        betas.push_back(beta);
        for (std::size_t i = 0; i < A.n; ++i) p[i] = s[i] + beta * p[i];
        gamma = gamma_new;
    }
    res.condition = lanczos_condition(alphas, betas);
    return res;
}

void check_layout(const Sinogram& data, const RayBundle& bundle) {
    const RayGrid& g = bundle.grid();
    if (data.values.size() != bundle.entry_row().size() || !same_axes(data.grid, g))
        throw ShapeError("data was not generated on the scene's ray grid");
}

// Least squares for the free nodes [0, n_free) given fixed values on the rest.
struct SlabSolve {
    Vec u;
    ReconReport report;
};

SlabSolve solve_slab(const RayBundle& bundle, const Vec& row_data, const std::vector<char>& use_row,
                     const Vec& fixed, int n_free, const InversionConfig& cfg) {
    const int n = bundle.nodes();
    const std::size_t rows = bundle.rows();
    Vec w = row_weights(bundle, cfg.F);
    for (double& v : w) v = std::sqrt(v);

    // subtract what the recovered layers already explain
    Vec known(rows);
    bundle.apply(fixed, known);
    std::vector<std::size_t> used;
    for (std::size_t r = 0; r < rows; ++r)
        if (use_row[r]) used.push_back(r);
    const std::size_t md = used.size();
    Vec d(md);
    for (std::size_t k = 0; k < md; ++k) d[k] = row_data[used[k]] - known[used[k]];

    double mu = cfg.mu;
    if (mu < 0.0) mu = 1e-6 * norm(d);
    const double smu = std::sqrt(mu);
    const std::size_t mreg = n_free > 1 ? static_cast<std::size_t>(n_free - 1) : 0;

    LsqOperator A;
    A.n = static_cast<std::size_t>(n_free);
    A.m = md + mreg;
    Vec full(n), out(rows), yfull(rows), back(n);
    A.forward = [&](const Vec& x, Vec& y) {
        std::fill(full.begin(), full.end(), 0.0);
        std::copy(x.begin(), x.end(), full.begin());
        bundle.apply(full, out);
        for (std::size_t k = 0; k < md; ++k) y[k] = w[used[k]] * out[used[k]];
        for (std::size_t k = 0; k < mreg; ++k) y[md + k] = smu * (x[k + 1] - x[k]);
    };
    A.adjoint = [&](const Vec& y, Vec& x) {
        std::fill(yfull.begin(), yfull.end(), 0.0);
        for (std::size_t k = 0; k < md; ++k) yfull[used[k]] = w[used[k]] * y[k];
        bundle.apply_adjoint(yfull, back);
        for (int i = 0; i < n_free; ++i) x[i] = back[i];
        for (std::size_t k = 0; k < mreg; ++k) {
            x[k] -= smu * y[md + k];
            x[k + 1] += smu * y[md + k];
        }
    };
    Vec b(A.m, 0.0);
    for (std::size_t k = 0; k < md; ++k) b[k] = w[used[k]] * d[k];

    LsqResult ls = cgls(A, b, cfg.max_iterations, cfg.tolerance);
    SlabSolve out_s;
    out_s.u = fixed;
    for (int i = 0; i < n_free; ++i) out_s.u[i] = ls.x[i];
    ReconReport& rep = out_s.report;
    rep.residuals = std::move(ls.residuals);
    rep.iterations = ls.iterations;
    rep.converged = ls.converged;
    rep.stagnated = ls.stagnated;
    rep.condition_estimate = ls.condition;
    rep.mu = mu;
    rep.rays_used = md;
    return out_s;
}

AdaptedProfile make_profile(const RayBundle& bundle, Vec values) {
    return AdaptedProfile(bundle.s_min(), bundle.s_min() + bundle.spacing() * (bundle.nodes() - 1),
                          std::move(values), AdaptedProfile::Outside::Zero);
}

void finish_report(ReconReport& rep, const AdaptedProfile& u, const RayBundle& bundle, const Scene& scene,
                   double F, const AdaptedProfile* truth) {
    if (truth) rep.relative_error = profile_error(u, *truth, rep.s_lo, rep.s_hi);
    double fn = field_norm(u, scene, F);
    double gn = sinogram_norm(restricted_forward(u, bundle), F);
    if (gn > 0.0) rep.stability_ratio = fn / gn;
}

}  // namespace

void Scene::validate() const {
    if (!(h > 0.0)) throw ValidationError("quadrature step must be > 0");
    if (grid.launches() == 0) throw ValidationError("scene ray grid is empty");
    if (chart_nx < 2 || chart_ny < 2) throw ValidationError("scene chart grid needs at least 2 x 2 cells");
    if (!(chart.x_max > chart.x_min) || !(chart.y_max > chart.y_min))
        throw ValidationError("scene chart rectangle is empty");
}

Scene make_scene(Geometry geo, int n, int nl, double C, double h, WeightSpec w) {
    if (n < 2 || nl < 1) throw ValidationError("scene needs n >= 2 and nl >= 1");
    Rect box = region_bounding_box(geo.fol, geo.metric.domain());
    RayGrid grid = make_ray_grid(geo.fol.c, n, box.y_min, box.y_max, n, C, nl);
    Scene s{std::move(geo), std::move(w), std::move(grid), h, box, n, n};
    s.validate();
    return s;
}

void InversionConfig::validate() const {
    if (!(tolerance > 0.0)) throw ValidationError("inversion tolerance must be > 0");
    if (max_iterations < 1) throw ValidationError("inversion needs at least one iteration");
    if (!(F >= 0.0)) throw ValidationError("weight exponent F must be >= 0");
    if (profile_nodes < 4) throw ValidationError("profile needs at least 4 nodes");
    if (c_ladder.empty()) throw ValidationError("c-ladder is empty");
    for (std::size_t i = 0; i < c_ladder.size(); ++i) {
        if (!(c_ladder[i] > 0.0)) throw ValidationError("c-ladder entries must be positive");
        if (i > 0 && !(c_ladder[i] < c_ladder[i - 1]))
            throw ValidationError("c-ladder must be strictly decreasing");
    }
}

AdaptedProfile zero_profile(double c, int nodes) {
    return AdaptedProfile(-c, 0.0, Vec(nodes, 0.0), AdaptedProfile::Outside::Zero);
}

RayBundle::RayBundle(const Scene& scene, int profile_nodes)
    : n_(profile_nodes), s_min_(-scene.c()), s_max_(0.0), grid_(scene.grid), h_(scene.h),
      weight_name_(scene.weight.name()) {
    scene.validate();
    if (n_ < 4) throw ValidationError("profile needs at least 4 nodes");
    const AdaptedProfile layout = zero_profile(scene.c(), n_);
    D_ = *AdaptedProfile::slope_matrix(n_, layout.spacing());

    const std::size_t ny = grid_.y.size(), nl = grid_.lambda_hat.size();
    const bool mirror = grid_.symmetric && grid_.lambda_symmetric();
    const int branches = mirror ? 1 : 2;
    const std::size_t nlaunch = grid_.launches() * branches;

    struct Row {
        bool valid = false, capped = false;
        int first = 0;
        Vec a, b;
        double min_xt = 0.0;
    };
    std::vector<Row> tmp(nlaunch);
    FoliationFrame frame(scene.geo);
    parallel_for(nlaunch, [&](std::size_t flat) {
        int iw = static_cast<int>(flat % branches);
        std::size_t r = flat / branches;
        std::size_t il = r % nl, iy = (r / nl) % ny, ix = r / (nl * ny);
        auto L = launch(frame, grid_, ix, iy, il, iw == 0 ? 1 : -1);
        if (!L) return;
        RayNodes rn = ray_nodes(scene.geo, scene.weight, L->z, L->v, scene.h);
        Row& row = tmp[flat];
        row.valid = true;
        row.capped = rn.capped();
        Vec a(n_, 0.0), b(n_, 0.0);
        int lo = n_, hi = -1;
        double mn = scene.geo.fol.xtilde(L->z).value;
        for (std::size_t k = 0; k < rn.z.size(); ++k) {
            double s = scene.geo.fol.xtilde(rn.z[k]).value;
            mn = std::min(mn, s);
            auto B = layout.basis(s);
            if (B.j < 0) continue;
            const double wk = rn.weight[k];
            a[B.j] += wk * B.c[0];
            b[B.j] += wk * B.c[1];
            a[B.j + 1] += wk * B.c[2];
            b[B.j + 1] += wk * B.c[3];
            lo = std::min(lo, B.j);
            hi = std::max(hi, B.j + 1);
        }
        row.min_xt = mn;
        if (hi >= lo) {
            row.first = lo;
            row.a.assign(a.begin() + lo, a.begin() + hi + 1);
            row.b.assign(b.begin() + lo, b.begin() + hi + 1);
        }
    });

    entry_row_.assign(grid_.launches() * 2, -1);
    auto entry = [&](std::size_t ix, std::size_t iy, std::size_t il, int iw) {
        return ((ix * ny + iy) * nl + il) * 2 + iw;
    };
    std::int64_t off = 0;
    for (std::size_t flat = 0; flat < nlaunch; ++flat) {
        Row& row = tmp[flat];
        if (!row.valid) continue;
        int iw = static_cast<int>(flat % branches);
        std::size_t r = flat / branches;
        std::size_t il = r % nl, iy = (r / nl) % ny, ix = r / (nl * ny);
        const auto id = static_cast<std::int64_t>(first_.size());
        entry_row_[entry(ix, iy, il, iw)] = id;
        capped_ += row.capped;
        if (mirror) {
            entry_row_[entry(ix, iy, nl - 1 - il, 1)] = id;
            capped_ += row.capped;
        }
        first_.push_back(row.first);
        count_.push_back(static_cast<int>(row.a.size()));
        offset_.push_back(off);
        off += static_cast<std::int64_t>(row.a.size());
        a_.insert(a_.end(), row.a.begin(), row.a.end());
        b_.insert(b_.end(), row.b.begin(), row.b.end());
        depth_.push_back(grid_.x[ix]);
        min_xt_.push_back(row.min_xt);
        Row().a.swap(row.a);
        Row().b.swap(row.b);
    }
}

void RayBundle::apply(const Vec& u, Vec& out) const {
    if (static_cast<int>(u.size()) != n_) throw ShapeError("profile vector has the wrong length");
    Vec m(n_, 0.0);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m[i] += D_[static_cast<std::size_t>(i) * n_ + j] * u[j];
    out.assign(rows(), 0.0);
    parallel_for(rows(), [&](std::size_t r) {
        const double* a = a_.data() + offset_[r];
        const double* b = b_.data() + offset_[r];
        const int f = first_[r];
        double s = 0.0;
        for (int k = 0; k < count_[r]; ++k) s += a[k] * u[f + k] + b[k] * m[f + k];
        out[r] = s;
    });
}

void RayBundle::apply_adjoint(const Vec& y, Vec& out) const {
    if (y.size() != rows()) throw ShapeError("row vector has the wrong length");
    Vec gu(n_, 0.0), gm(n_, 0.0);
    for (std::size_t r = 0; r < rows(); ++r) {
        const double yr = y[r];
        if (yr == 0.0) continue;
        const double* a = a_.data() + offset_[r];
        const double* b = b_.data() + offset_[r];
        const int f = first_[r];
        for (int k = 0; k < count_[r]; ++k) {
            gu[f + k] += a[k] * yr;
            gm[f + k] += b[k] * yr;
        }
    }
    out = gu;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out[j] += D_[static_cast<std::size_t>(i) * n_ + j] * gm[i];
}

Sinogram RayBundle::to_sinogram(const Vec& row_values) const {
    if (row_values.size() != rows()) throw ShapeError("row vector has the wrong length");
    Sinogram s;
    s.grid = grid_;
    s.h = h_;
    s.weight = weight_name_;
    s.values.assign(entry_row_.size(), 0.0);
    s.valid.assign(entry_row_.size(), 0);
    for (std::size_t e = 0; e < entry_row_.size(); ++e)
        if (entry_row_[e] >= 0) {
            s.values[e] = row_values[entry_row_[e]];
            s.valid[e] = 1;
        }
    s.capped = capped_;
    return s;
}

Vec RayBundle::gather(const Sinogram& s) const {
    check_layout(s, *this);
    Vec v(rows(), 0.0), cnt(rows(), 0.0);
    for (std::size_t e = 0; e < entry_row_.size(); ++e)
        if (entry_row_[e] >= 0 && s.valid[e]) {
            v[entry_row_[e]] += s.values[e];
            cnt[entry_row_[e]] += 1.0;
        }
    for (std::size_t r = 0; r < rows(); ++r)
        if (cnt[r] > 0.0) v[r] /= cnt[r];
    return v;
}

Sinogram restricted_forward(const AdaptedProfile& u, const RayBundle& bundle) {
    if (u.size() != bundle.nodes() || std::abs(u.s_min() - bundle.s_min()) > 1e-12 ||
        std::abs(u.spacing() - bundle.spacing()) > 1e-12)
        throw ShapeError("profile layout differs from the ray bundle");
    Vec out;
    bundle.apply(u.values(), out);
    return bundle.to_sinogram(out);
}

Sinogram restricted_forward(const AdaptedProfile& u, const Scene& scene) {
    return restricted_forward(u, RayBundle(scene, u.size()));
}

double profile_error(const AdaptedProfile& got, const AdaptedProfile& truth, double s_lo, double s_hi) {
    const int n = 2001;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = s_lo + (s_hi - s_lo) * i / (n - 1);
        double wt = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        double t = truth(s), d = got(s) - t;
        num += wt * d * d;
        den += wt * t * t;
    }
    if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

std::pair<AdaptedProfile, ReconReport> local_reconstruct(const Sinogram& data, const RayBundle& bundle,
                                                         const Scene& scene, const InversionConfig& cfg,
                                                         const AdaptedProfile* truth) {
    cfg.validate();
    if (bundle.nodes() != cfg.profile_nodes) throw ShapeError("ray bundle and config disagree on profile nodes");
    Vec d = bundle.gather(data);
    std::vector<char> use(bundle.rows(), 1);
    SlabSolve sol = solve_slab(bundle, d, use, Vec(bundle.nodes(), 0.0), bundle.nodes(), cfg);
    AdaptedProfile u = make_profile(bundle, std::move(sol.u));
    sol.report.s_lo = -scene.c();
    sol.report.s_hi = 0.0;
    finish_report(sol.report, u, bundle, scene, cfg.F, truth);
    return {std::move(u), std::move(sol.report)};
}

std::pair<AdaptedProfile, ReconReport> local_reconstruct(const Sinogram& data, const Scene& scene,
                                                         const InversionConfig& cfg,
                                                         const AdaptedProfile* truth) {
    cfg.validate();
    return local_reconstruct(data, RayBundle(scene, cfg.profile_nodes), scene, cfg, truth);
}

std::vector<LCurvePoint> lcurve_sweep(const Sinogram& data, const RayBundle& bundle, const Scene& scene,
                                      const InversionConfig& cfg, std::vector<double> mus,
                                      const AdaptedProfile* truth) {
    Vec d = bundle.gather(data);
    Vec w = row_weights(bundle, cfg.F);
    if (mus.empty()) {
        const double dn = norm(d);
        for (int k = 0; k < 16; ++k) mus.push_back(dn * std::pow(10.0, -10.0 + 9.0 * k / 15.0));
    }
    std::vector<LCurvePoint> curve;
    Vec Mu;
    for (double mu : mus) {
        InversionConfig c = cfg;
        c.mu = mu;
        auto [u, rep] = local_reconstruct(data, bundle, scene, c, truth);
        bundle.apply(u.values(), Mu);
        LCurvePoint pt;
        pt.mu = mu;
        double r2 = 0.0, s2 = 0.0;
        for (std::size_t r = 0; r < Mu.size(); ++r) r2 += w[r] * (Mu[r] - d[r]) * (Mu[r] - d[r]);
        for (int i = 0; i + 1 < u.size(); ++i) s2 += std::pow(u.values()[i + 1] - u.values()[i], 2);
        pt.residual = std::sqrt(r2);
        pt.seminorm = std::sqrt(s2);
        pt.relative_error = rep.relative_error;
        curve.push_back(pt);
    }
    return curve;
}

std::size_t lcurve_corner(const std::vector<LCurvePoint>& curve) {
    if (curve.size() < 3) return 0;
    auto P = [&](std::size_t i) {
        return Vec2{std::log(std::max(curve[i].residual, 1e-300)), std::log(std::max(curve[i].seminorm, 1e-300))};
    };
    std::size_t best = 1;
    double best_k = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        Vec2 a = P(i - 1), b = P(i), c = P(i + 1);
        double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
        double la = std::hypot(b.x - a.x, b.y - a.y), lb = std::hypot(c.x - b.x, c.y - b.y),
               lc = std::hypot(c.x - a.x, c.y - a.y);
        double k = la * lb * lc > 0.0 ? 2.0 * cross / (la * lb * lc) : 0.0;
        // with mu increasing the corner is a counterclockwise turn
        if (k > best_k) {
            best_k = k;
            best = i;
        }
    }
    return best;
}

LayerStripResult layer_strip(const Sinogram& data, const RayBundle& bundle, const Scene& scene,
                             const InversionConfig& cfg, int n_slabs, const AdaptedProfile* truth) {
    cfg.validate();
    if (n_slabs < 1) throw ValidationError("layer stripping needs at least one slab");
    const int n = bundle.nodes();
    if (n - 1 < n_slabs)
        throw ValidationError("profile intervals (" + std::to_string(n - 1) + ") are fewer than " +
                              std::to_string(n_slabs) + " slabs");
    if (n_slabs == 1) {
        auto [u, rep] = local_reconstruct(data, bundle, scene, cfg, truth);
        rep.rays_used = bundle.rows();
        return {std::move(u), {std::move(rep)}};
    }
    // slab k spans nodes [edge(k+1), edge(k)], edges rounded to the nearest node
    auto edge = [&](int k) { return n - 1 - static_cast<int>(std::lround(double(k) * (n - 1) / n_slabs)); };
    const double ds = bundle.spacing();
    const double tol = 1e-9 * scene.c();
    Vec d = bundle.gather(data);
    Vec fixed(n, 0.0);
    std::vector<ReconReport> reports;
    for (int k = 0; k < n_slabs; ++k) {
        const int hi = edge(k), lo = edge(k + 1);
        const double s_lo = bundle.s_min() + lo * ds, s_hi = bundle.s_min() + hi * ds;
        std::vector<char> use(bundle.rows(), 0);
        std::size_t count = 0;
        for (std::size_t r = 0; r < bundle.rows(); ++r)
            if (bundle.row_min_xtilde()[r] >= s_lo - tol) {
                use[r] = 1;
                ++count;
            }
        if (count == 0)
            throw CoverageError("slab " + std::to_string(k) + " [" + std::to_string(s_lo) + ", " +
                                std::to_string(s_hi) + "] has no rays confined above its floor", k);
        // every deeper node stays free: it reaches these rays only through the spline slopes
        const int n_free = k == 0 ? hi + 1 : hi;
        SlabSolve sol = solve_slab(bundle, d, use, fixed, n_free, cfg);
        for (int i = lo; i < n_free; ++i) fixed[i] = sol.u[i];
        sol.report.s_lo = s_lo;
        sol.report.s_hi = s_hi;
        reports.push_back(std::move(sol.report));
    }
    AdaptedProfile u = make_profile(bundle, fixed);
    for (auto& rep : reports) finish_report(rep, u, bundle, scene, cfg.F, truth);
    return {std::move(u), std::move(reports)};
}

std::vector<double> row_weights(const RayBundle& bundle, double F) {
    const double clamp = half_cell(bundle.grid());
    Vec w(bundle.rows());
    for (std::size_t r = 0; r < w.size(); ++r) w[r] = std::exp(-2.0 * F / std::max(bundle.row_depth()[r], clamp));
    return w;
}

std::vector<double> weighted_matrix(const RayBundle& bundle, double F) {
    const int n = bundle.nodes();
    Vec w = row_weights(bundle, F);
    Vec M(bundle.rows() * n), e(n, 0.0), col;
    for (int j = 0; j < n; ++j) {
        e[j] = 1.0;
        bundle.apply(e, col);
        for (std::size_t r = 0; r < bundle.rows(); ++r) M[r * n + j] = std::sqrt(w[r]) * col[r];
        e[j] = 0.0;
    }
    return M;
}

std::vector<ProbeRow> contraction_probe(const SceneFactory& make, const InversionConfig& cfg) {
    cfg.validate();
    std::vector<ProbeRow> table;
    for (double c : cfg.c_ladder) {
        std::optional<Scene> scene;
        try {
            scene.emplace(make(c));
            auto cert = certify_convexity(scene->geo.metric, scene->geo.fol);
            if (!(cert.margin > 0.0))
                throw PreconditionError("foliation is not strictly convex at c = " + std::to_string(c));
        } catch (const PreconditionError&) {
            throw;
        } catch (const Error& e) {
            throw PreconditionError("c = " + std::to_string(c) + " is outside the certified region: " + e.what());
        }
        RayBundle bundle(*scene, cfg.profile_nodes);
        const int n = bundle.nodes();
        Vec w = row_weights(bundle, cfg.F);
        Vec tmp;
        auto normal = [&](const Vec& v, Vec& out) {
            bundle.apply(v, tmp);
            for (std::size_t r = 0; r < tmp.size(); ++r) tmp[r] *= w[r];
            bundle.apply_adjoint(tmp, out);
        };
        ProbeRow row;
        row.c = c;
        Vec v(n), y(n);
        for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + i);
        double lam = 0.0, prev = 0.0;
        for (int it = 0; it < 30; ++it) {
            double nv = norm(v);
            for (double& t : v) t /= nv;
            normal(v, y);
            prev = lam;
            lam = dot(v, y);
            v = y;
        }
        bool flag = !(std::abs(lam - prev) <= 1e-3 * lam);
        const double lam_max = lam;

        // inverse iteration, inner CG on the normal operator
        auto solve = [&](const Vec& rhs, Vec& x) {
            x.assign(n, 0.0);
            Vec r = rhs, p = rhs, q(n);
            double rr = dot(r, r), r0 = std::sqrt(rr);
            for (int it = 0; it < 20 * n && std::sqrt(rr) > 1e-14 * r0; ++it) {
                normal(p, q);
                double a = rr / dot(p, q);
                for (int i = 0; i < n; ++i) {
                    x[i] += a * p[i];
                    r[i] -= a * q[i];
                }
                double rr_new = dot(r, r);
                for (int i = 0; i < n; ++i) p[i] = r[i] + rr_new / rr * p[i];
                rr = rr_new;
            }
            return std::sqrt(rr) <= 1e-10 * r0;
        };
        for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::cos(2.0 + i);
        double mu = 0.0, mprev = 0.0;
        for (int it = 0; it < 30; ++it) {
            double nv = norm(v);
            for (double& t : v) t /= nv;
            if (!solve(v, y)) flag = true;
            mprev = mu;
            mu = dot(v, y);
            v = y;
        }
        if (!(std::abs(mu - mprev) <= 1e-3 * mu)) flag = true;
        row.sigma_max = std::sqrt(lam_max);
        row.sigma_min = mu > 0.0 ? std::sqrt(1.0 / mu) : 0.0;
        row.condition = row.sigma_min > 0.0 ? row.sigma_max / row.sigma_min : std::numeric_limits<double>::infinity();
        row.flagged = flag || !std::isfinite(row.condition);
        table.push_back(row);
    }
    return table;
}

double field_norm(const AdaptedProfile& u, const Scene& scene, double F) {
    const Rect& R = scene.chart;
    const double dx = (R.x_max - R.x_min) / scene.chart_nx, dy = (R.y_max - R.y_min) / scene.chart_ny;
    const double clamp = 0.5 * std::min(dx, dy);
    double sum = 0.0;
    for (int j = 0; j < scene.chart_ny; ++j)
        for (int i = 0; i < scene.chart_nx; ++i) {
            Vec2 z{R.x_min + (i + 0.5) * dx, R.y_min + (j + 0.5) * dy};
            if (!scene.geo.fol.in_region(z)) continue;
            auto jet = scene.geo.fol.xtilde(z);
            double x = std::max(jet.value + scene.c(), clamp);
            double v = std::exp(-F / x) * u(jet.value);
            sum += v * v;
        }
    return std::sqrt(sum * dx * dy);
}

double sinogram_norm(const Sinogram& s, double F) {
    const RayGrid& g = s.grid;
    const std::size_t nx = g.x.size(), ny = g.y.size(), nl = g.lambda_hat.size();
    if (s.values.size() != g.launches() * 2) throw ShapeError("sinogram size does not match its grid");
    const double dx = nx > 1 ? g.x[1] - g.x[0] : 2.0 * g.x[0];
    const double dy = ny > 1 ? g.y[1] - g.y[0] : 1.0;
    const double dl = nl > 1 ? g.lambda_hat[1] - g.lambda_hat[0] : 1.0;
    const double clamp = half_cell(g);
    auto wt2 = [&](double x) { return std::exp(-2.0 * F / std::max(x, clamp)); };
    double sum = 0.0;
    for (std::size_t ix = 0; ix < nx; ++ix)
        for (std::size_t iy = 0; iy < ny; ++iy)
            for (std::size_t il = 0; il < nl; ++il)
                for (int iw = 0; iw < 2; ++iw) {
                    std::size_t k = s.index(ix, iy, il, iw);
                    if (!s.valid[k]) continue;
                    const double x = g.x[ix], vol = dx * dy * x * dl, gv = s.values[k];
                    sum += wt2(x) * gv * gv * vol;
                    if (ix + 1 < nx) {
                        std::size_t k2 = s.index(ix + 1, iy, il, iw);
                        if (s.valid[k2]) {
                            double xm = 0.5 * (x + g.x[ix + 1]), q = (s.values[k2] - gv) / dx;
                            sum += wt2(xm) * q * q * dx * dy * xm * dl;
                        }
                    }
                    if (iy + 1 < ny) {
                        std::size_t k2 = s.index(ix, iy + 1, il, iw);
                        if (s.valid[k2]) {
                            double q = (s.values[k2] - gv) / dy;
                            sum += wt2(x) * q * q * vol;
                        }
                    }
                    if (il + 1 < nl) {
                        std::size_t k2 = s.index(ix, iy, il + 1, iw);
                        if (s.valid[k2]) {
                            double q = (s.values[k2] - gv) / (x * dl);
                            sum += wt2(x) * q * q * vol;
                        }
                    }
                }
    return std::sqrt(sum);
}

StabilityReport stability_ratios(const std::vector<AdaptedProfile>& family, const RayBundle& bundle,
                                 const Scene& scene, double F) {
    StabilityReport rep;
    for (std::size_t i = 0; i < family.size(); ++i) {
        double fn = field_norm(family[i], scene, F);
        double gn = sinogram_norm(restricted_forward(family[i], bundle), F);
        if (fn > 0.0 && !(gn >= 1e-10 * fn)) {
            rep.alarm = true;
            rep.alarm_members.push_back(static_cast<int>(i));
        }
        rep.ratios.push_back(gn > 0.0 ? fn / gn : (fn > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
    }
    if (!rep.ratios.empty()) {
        Vec sorted = rep.ratios;
        std::sort(sorted.begin(), sorted.end());
        rep.max_ratio = sorted.back();
        std::size_t m = sorted.size();
        rep.median_ratio = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    }
    return rep;
}

std::vector<AdaptedProfile> random_phantoms(double c, int nodes, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nbumps(1, 3);
    std::uniform_real_distribution<double> centre(-0.9 * c, -0.1 * c), width(0.04 * c, 0.15 * c),
        amp(0.5, 1.5), coin(0.0, 1.0);
    std::vector<AdaptedProfile> out;
    for (int i = 0; i < count; ++i) {
        int k = nbumps(rng);
        std::vector<std::array<double, 3>> bumps(k);
        for (auto& b : bumps) {
            b[0] = centre(rng);
            b[1] = width(rng);
            b[2] = amp(rng) * (coin(rng) < 0.5 ? -1.0 : 1.0);
        }
        out.push_back(AdaptedProfile::sampled(
            -c, 0.0, nodes,
            [&](double s) {
                double v = 0.0;
                for (auto& b : bumps) v += b[2] * std::exp(-0.5 * (s - b[0]) * (s - b[0]) / (b[1] * b[1]));
                return v;
            },
            AdaptedProfile::Outside::Zero));
    }
    return out;
}

StabilityReport stability_report(const Scene& scene, const InversionConfig& cfg, int count, std::uint64_t seed) {
    cfg.validate();
    if (count < 20) throw ValidationError("stability report needs at least 20 phantoms");
    RayBundle bundle(scene, cfg.profile_nodes);
    return stability_ratios(random_phantoms(scene.c(), cfg.profile_nodes, count, seed), bundle, scene, cfg.F);
}

}  // namespace foliate
