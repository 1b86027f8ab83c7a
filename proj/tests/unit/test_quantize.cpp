#include <random>

#include "doctest.h"
#include "foliate/error.hpp"
#include "foliate/presets.hpp"
#include "foliate/quantize.hpp"

using namespace foliate;

namespace {

const Rect kFrame{0.05, 0.95, -1.0, 1.0};

double max_diff(const GridField& a, const GridField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

ConeSpec certified_cone() {
    auto g = make_symbol_grid({{0.5, 0}}, 1, 1e4, 41, 180);
    sample_symbol(g, [](Vec2, double xi, double eta) { return cplx(boundary_symbol_closed(xi, eta, 1, 1)); });
    ConeSpec cone{2.0, 0.0};
    cone.c_ell = ellipticity_scan(g, cone, 1.0).min_value;
    return cone;
}

SymbolFn closed_a0() {
    return [](Vec2, double xi, double eta) { return cplx(boundary_symbol_closed(xi, eta, 1, 1)); };
}

}  // namespace

TEST_CASE("dft frequencies") {
    CHECK(dft_frequency(0, 8, 0.5) == 0.0);
    CHECK(dft_frequency(1, 8, 0.5) == doctest::Approx(2 * M_PI / 4));
    CHECK(dft_frequency(4, 8, 0.5) == doctest::Approx(-M_PI / 0.5));
    CHECK(dft_frequency(7, 8, 0.5) == doctest::Approx(-2 * M_PI / 4));
}

TEST_CASE("left quantization") {
    std::mt19937 rng(2);
    std::normal_distribution<double> n01;
    GridField f(kFrame, 24, 20);
    for (double& v : f.values) v = n01(rng);
    SUBCASE("identity") {
        auto one = sample_frequency_symbol(kFrame, 24, 20, [](Vec2, double, double) { return cplx(1.0); });
        CHECK(max_diff(quantize_left(one, f), f) <= 1e-10);
    }
    SUBCASE("multiplication") {
        auto mfn = [](Vec2 z) { return 1.0 + z.x * z.x + std::sin(3 * z.y); };
        auto m = sample_frequency_symbol(kFrame, 24, 20, [&](Vec2 z, double, double) { return cplx(mfn(z)); },
                                         false);
        GridField expect = f;
        for (int j = 0; j < 20; ++j)
            for (int i = 0; i < 24; ++i) expect.at(i, j) = mfn(f.node(i, j)) * f.at(i, j);
        CHECK(max_diff(quantize_left(m, f), expect) <= 1e-10);
    }
    SUBCASE("row and point paths agree") {
        auto fn = [](Vec2 z, double xi, double eta) { return cplx(1.0 / (1.0 + xi * xi + z.x * eta * eta)); };
        auto row = sample_frequency_symbol(kFrame, 24, 20, fn, true);
        auto pt = sample_frequency_symbol(kFrame, 24, 20, [&](Vec2 z, double xi, double eta) {
            return fn({z.x, 0.0}, xi, eta);
        }, false);
        CHECK(max_diff(quantize_left(row, f), quantize_left(pt, f)) <= 1e-12);
    }
    SUBCASE("symbol away from eta = 0 kills y-constant fields") {
        auto hi = sample_frequency_symbol(kFrame, 64, 64, [](Vec2, double xi, double eta) {
            return cplx(std::abs(eta) >= 1.0 ? 1.0 + 0.1 * xi : 0.0);
        });
        GridField g = tabulate(kFrame, 64, 64, [](Vec2 z) { return std::exp(-z.x) * std::cos(5 * z.x); });
        double mx = 0.0;
        for (double v : quantize_left(hi, g).values) mx = std::max(mx, std::abs(v));
        CHECK(mx <= 1e-8);
    }
    SUBCASE("shape mismatch") {
        auto one = sample_frequency_symbol(kFrame, 24, 20, [](Vec2, double, double) { return cplx(1.0); });
        CHECK_THROWS_AS(quantize_left(one, GridField(kFrame, 20, 24)), ShapeError);
    }
}

TEST_CASE("annihilation of adapted functions") {
    const int n = 256;
    static const FrequencySymbol a1 =
        sample_frequency_symbol(kFrame, n, n, completion_symbol(closed_a0(), certified_cone()));
    auto u = AdaptedProfile::sampled(-1.0, 0.0, 64, [](double s) { return std::exp(-(s + 0.5) * (s + 0.5) / 0.02); });
    SUBCASE("aligned leaves") {
        Geometry geo = halfplane_geometry(1.0, 0.0);
        double r = verify_annihilation(a1, u, geo, {0.05, 0.95, -1.0, 1.0}, n, n);
        MESSAGE("aligned residual " << r);
        CHECK(r <= annihilation_tolerance(true));
        auto zero = AdaptedProfile::sampled(-1.0, 0.0, 8, [](double) { return 0.0; });
        CHECK(verify_annihilation(a1, zero, geo, {0.05, 0.95, -1.0, 1.0}, n, n) == 0.0);
    }
    SUBCASE("rotated leaves") {
        Geometry geo = halfplane_geometry(1.0, 0.3);
        double r = verify_annihilation(a1, u, geo, {-0.4, 1.5, -1.1, 1.1}, n, n);
        MESSAGE("rotated residual " << r);
        CHECK(r <= annihilation_tolerance(false));
    }
    SUBCASE("non-adapted control") {
        Geometry geo = halfplane_geometry(1.0, 0.0);
        Rect chart{0.05, 0.95, -1.0, 1.0};
        GridField g = lift_adapted(u, geo.fol, chart, n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Vec2 z = g.node(i, j);
                g.at(i, j) += 2.0 * std::exp(-((z.x - 0.8) * (z.x - 0.8) + z.y * z.y) / 0.01);
            }
        double r = annihilation_residual(a1, resample_to_frame(g, geo, kFrame, n, n));
        MESSAGE("control residual " << r);
        CHECK(r >= 1e-2);
    }
}
