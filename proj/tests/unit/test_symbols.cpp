#include <numbers>
#include <random>

#include "doctest.h"
#include "foliate/error.hpp"
#include "foliate/presets.hpp"
#include "foliate/symbols.hpp"

using namespace foliate;

namespace {

constexpr double kPi = std::numbers::pi;

NormalOpConfig gaussian_config(const Geometry& geo, double F, double tail = 1e-14) {
    NormalOpConfig cfg;
    cfg.F = F;
    cfg.chi = CutoffChi::gaussian(FoliationFrame(geo).alpha_boundary(0.0) / F, tail);
    return cfg;
}

}  // namespace

TEST_CASE("closed boundary symbol") {
    CHECK(boundary_symbol_closed(1, 0, 1, 1) / boundary_symbol_closed(0, 0, 1, 1) ==
          doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(boundary_symbol_closed(3, 0.7, 2, 0.4) == boundary_symbol_closed(3, -0.7, 2, 0.4));
    CHECK(boundary_symbol_closed(1, 1, 1, 1) == doctest::Approx(std::exp(-0.25) / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(boundary_symbol_closed(50, 20, 1, 1) > 0.0);
    CHECK_THROWS_AS(boundary_symbol_closed(1, 1, 1, 0.0), DomainError);
    CHECK_THROWS_AS(boundary_symbol_closed(1, 1, 1, -1.0), DomainError);
}

TEST_CASE("numeric boundary symbol") {
    Geometry geo = named_geometry("conformal");
    const double alpha = FoliationFrame(geo).alpha_boundary(0.0);
    auto w = WeightSpec::constant();
    SUBCASE("matches the Gaussian closed form") {
        for (double F : {0.5, 2.0}) {
            auto cfg = gaussian_config(geo, F);
            const double c = 4 * kPi * std::sqrt(alpha / F);
            for (auto [xi, eta] : {std::pair{4.0, 1.0}, std::pair{-12.0, 7.0}, std::pair{30.0, -20.0}}) {
                cplx a = numeric_symbol({0, 0}, xi, eta, cfg, geo, w);
                double cl = c * boundary_symbol_closed(xi, eta, F, alpha);
                CHECK(std::abs(a - cl) <= 1e-6 * cl);
            }
        }
    }
    SUBCASE("calibration recovers the constant") {
        auto cfg = gaussian_config(geo, 1.0);
        std::vector<cplx> num;
        std::vector<double> cl;
        for (double r : {4.0, 8.0, 16.0, 24.0, 32.0}) {
            num.push_back(numeric_symbol({0, 0}, r, 0.3 * r, cfg, geo, w));
            cl.push_back(boundary_symbol_closed(r, 0.3 * r, 1.0, alpha));
        }
        CHECK(calibrate_constant(num, cl) == doctest::Approx(4 * kPi * std::sqrt(alpha)).epsilon(1e-6));
        CHECK_THROWS_AS(calibrate_constant(num, {1.0}), ShapeError);
    }
    SUBCASE("kernel transform is half the symbol") {
        auto cfg = gaussian_config(geo, 1.0);
        for (auto [xi, eta] : {std::pair{5.0, 2.0}, std::pair{20.0, -9.0}}) {
            cplx a = numeric_symbol({0, 0}, xi, eta, cfg, geo, w);
            cplx b = appendix_symbol(0.0, xi, eta, cfg, geo, w);
            CHECK(std::abs(a - 2.0 * b) <= 1e-6 * std::abs(a));
        }
    }
    SUBCASE("conjugate symmetry") {
        NormalOpConfig cfg;
        for (auto [xi, eta] : {std::pair{6.0, 2.0}, std::pair{20.0, -15.0}}) {
            cplx a = numeric_symbol({0, 0}, xi, eta, cfg, geo, w);
            cplx b = numeric_symbol({0, 0}, -xi, -eta, cfg, geo, w);
            CHECK(std::abs(a - std::conj(b)) <= 1e-8 * std::abs(a));
        }
    }
    SUBCASE("gaussian truncation is stable") {
        auto cfg = gaussian_config(geo, 1.0);
        NormalOpConfig wide = cfg;
        wide.chi = cfg.chi.truncated_at(1.5 * cfg.chi.radius());
        for (auto [xi, eta] : {std::pair{4.0, 3.0}, std::pair{16.0, 2.0}}) {
            cplx a = numeric_symbol({0, 0}, xi, eta, cfg, geo, w);
            cplx b = numeric_symbol({0, 0}, xi, eta, wide, geo, w);
            CHECK(std::abs(a - b) <= 1e-6 * std::abs(b));
        }
    }
}

TEST_CASE("symbol order and leading term") {
    Geometry geo = named_geometry("euclidean");
    auto w = WeightSpec::constant();
    NormalOpConfig cfg;  // compact cutoff
    SUBCASE("decay order -1") {
        double a32 = std::abs(numeric_symbol({0, 0.1}, 32, 0, cfg, geo, w));
        double a64 = std::abs(numeric_symbol({0, 0.1}, 64, 0, cfg, geo, w));
        CHECK(std::abs(a64 / a32 - 0.5) <= 0.05 * 0.5);
        CHECK(std::abs(64 * a64 - 4 * kPi * cfg.chi(0)) <= 0.05 * 4 * kPi);
    }
    SUBCASE("stationary phase at |zeta| = 64") {
        NormalOpConfig g = gaussian_config(geo, 1.0, 1e-12);
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> ang(-kPi / 4, kPi / 4);
        for (int k = 0; k < 8; ++k) {
            double phi = ang(rng) + (k % 2 ? kPi : 0.0);
            double xi = 64 * std::cos(phi), eta = 64 * std::sin(phi);
            cplx a = numeric_symbol({0, 0}, xi, eta, g, geo, w);
            double sp = stationary_phase_symbol(xi, eta, g.chi, 1.0);
            CHECK(std::abs(a - sp) <= 0.1 * sp);
        }
    }
    SUBCASE("interior symbol is continuous up to the boundary") {
        cplx a0 = numeric_symbol({0, 0}, 16, 4, cfg, geo, w);
        cplx a1 = numeric_symbol({0.01, 0}, 16, 4, cfg, geo, w);
        CHECK(std::abs(a1 - a0) <= 0.02 * std::abs(a0));
        CHECK_THROWS_AS(numeric_symbol({-0.1, 0}, 16, 4, cfg, geo, w), DomainError);
    }
}

TEST_CASE("critical points") {
    auto cp = critical_points(1, 0.5, 1, 0.7);
    CHECK(cp.lambda_hat == doctest::Approx(-0.5));
    CHECK(cp.t_hat == 0.0);
    CHECK(critical_points(2, 0.3, -1, 0.7).det == -4.0);
    CHECK(critical_points(3, 0, 1, 0.7).lambda_hat == 0.0);
    CHECK(critical_points(3, 0, -1, 0.7).lambda_hat == 0.0);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 50; ++k) {
        double xi = 64 * u(rng), eta = std::abs(xi) * u(rng);
        for (int omega : {1, -1}) {
            auto c = critical_points(xi, eta, omega, 0.6);
            CHECK(c.gradient_norm <= 1e-10);
            CHECK(c.fd_gradient_norm <= 1e-9 * std::max(1.0, std::abs(xi)));
            CHECK(c.det == -xi * xi);
        }
    }
    CHECK_THROWS_AS(critical_points(0, 1, 1, 0.5), DomainError);
}

TEST_CASE("ellipticity scan") {
    auto grid = make_symbol_grid({{0, 0}}, 4, 256, 7, 72);
    sample_symbol(grid, [](Vec2, double xi, double eta) { return cplx(boundary_symbol_closed(xi, eta, 1, 1)); });
    CHECK(grid.finite());
    auto rep = ellipticity_scan(grid, ConeSpec{1.0, 0.0});
    CHECK(rep.certified());
    CHECK(rep.min_value > 0.5);
    int outside = 0;
    for (const auto& r : rep.rows) outside += r.status == "NOT_CERTIFIED";
    CHECK(outside > 0);

    auto zero = grid;
    sample_symbol(zero, [](Vec2, double, double) { return cplx(0.0); });
    auto rz = ellipticity_scan(zero, ConeSpec{1.0, 0.0}, 4.0, true);
    CHECK(rz.min_value == 0.0);
    CHECK(rz.violations.size() == zero.size());
}

TEST_CASE("elliptic completion") {
    SUBCASE("lower-bound function") {
        const double C = 0.8;
        CHECK(completion_chi(C, C) == 0.0);
        CHECK(completion_chi(3.0, C) == 0.0);
        CHECK(completion_chi(0.1, C) + 0.1 == doctest::Approx(C / 2));
        CHECK(completion_chi(-5.0, C) - 5.0 == doctest::Approx(C / 2));
        double prev = completion_chi1(-1, C);
        for (int k = 0; k <= 2000; ++k) {
            double t = -1 + 3.0 * k / 2000;
            double v = completion_chi1(t, C);
            CHECK(v >= prev - 1e-15);
            prev = v;
            if (t <= C) {
                double s = completion_chi(t, C) + t;
                CHECK(s >= C / 2 - 1e-15);
                CHECK(s <= 2 * C + 1e-15);
            }
        }
        CHECK(completion_cutoff(0.9) == 0.0);
        CHECK(completion_cutoff(2.2) == 1.0);
    }
    SUBCASE("completed closed-form symbol is elliptic everywhere") {
        auto a0 = make_symbol_grid({{0, 0}, {0, 0.2}}, 1, 64, 13, 96);
        sample_symbol(a0, [](Vec2 z, double xi, double eta) {
            return std::exp(cplx(0, 0.3 + z.y)) * boundary_symbol_closed(xi, eta, 1, 1 + z.y);
        });
        ConeSpec cone{2.0, 0.0};
        auto cert = ellipticity_scan(a0, cone, 1.0);
        REQUIRE(cert.certified());
        cone.c_ell = cert.min_value;
        auto comp = build_elliptic_completion(a0, cone);
        const double C = comp.C;
        for (std::size_t k = 0; k < comp.b0.size(); ++k) {
            double s = comp.b0[k] + comp.b1[k];
            CHECK(std::abs(s) >= C / 2 * (1 - 1e-12));
            CHECK(std::abs(s) <= 2 * C * (1 + 1e-12));
            CHECK(comp.a1.values[k].imag() == 0.0);
            if (comp.b0[k] >= C) CHECK(comp.b1[k] == 0.0);
            if (comp.b0[k] <= C / 2) CHECK(s == doctest::Approx(C / 2));
        }
        // eta = 0 directions: first angle and the opposite one
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t ir = 0; ir < a0.radii.size(); ++ir) {
                CHECK(comp.a1.values[a0.index(b, ir, 0)] == 0.0);
                CHECK(comp.a1.values[a0.index(b, ir, 48)] == 0.0);
            }
        auto all = ellipticity_scan(comp.total, cone, 4.0, true);
        CHECK(all.min_value >= 0.9 * std::min(C / 2, cone.c_ell));
    }
    SUBCASE("pointwise completion vanishes at eta = 0") {
        SymbolFn a0 = [](Vec2, double xi, double eta) { return cplx(boundary_symbol_closed(xi, eta, 1, 1)); };
        auto a1 = completion_symbol(a0, ConeSpec{2.0, 0.8});
        for (double xi : {-40.0, -3.0, 1.5, 5.0, 100.0}) CHECK(a1({0.1, 0}, xi, 0.0) == 0.0);
        CHECK(a1({0.1, 0}, 1.0, 30.0).real() > 0.0);
    }
    SUBCASE("preconditions") {
        auto a0 = make_symbol_grid({{0, 0}}, 1, 8, 3, 8);
        sample_symbol(a0, [](Vec2, double xi, double eta) { return cplx(boundary_symbol_closed(xi, eta, 1, 1)); });
        CHECK_THROWS_AS(build_elliptic_completion(a0, ConeSpec{2.0, 0.0}), PreconditionError);
        CHECK_THROWS_AS(build_elliptic_completion(a0, ConeSpec{2.0, 100.0}), PreconditionError);
        CHECK_THROWS_AS(ConeSpec({0.0, 1.0}).validate(), ValidationError);
    }
}
