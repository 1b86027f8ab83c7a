#include <random>

#include "doctest.h"
#include "foliate/error.hpp"
#include "foliate/frame.hpp"
#include "foliate/presets.hpp"
#include "foliate/transform.hpp"

using namespace foliate;

TEST_CASE("profile spline") {
    SUBCASE("reproduces cubics away from the ends and is linear in the values") {
        auto u = AdaptedProfile::sampled(-0.3, 0.0, 31, [](double s) { return s * s; });
        CHECK(u(-0.1234) == doctest::Approx(0.1234 * 0.1234).epsilon(1e-12));
        CHECK(u(0.5) == doctest::Approx(0.0));        // clamp to the endpoint value
        CHECK(u(-1.0) == doctest::Approx(0.09));
        auto a = AdaptedProfile::sampled(-1, 0, 9, [](double s) { return std::sin(3 * s); });
        auto b = AdaptedProfile::sampled(-1, 0, 9, [](double s) { return s * s * s; });
        std::vector<double> sum(9);
        for (int i = 0; i < 9; ++i) sum[i] = a.values()[i] + 2 * b.values()[i];
        AdaptedProfile c(-1, 0, sum);
        for (double s : {-0.91, -0.5, -0.03}) CHECK(std::abs(c(s) - a(s) - 2 * b(s)) < 1e-14);
    }
    SUBCASE("slope matrix matches direct slopes") {
        auto u = AdaptedProfile::sampled(-0.3, 0.0, 12, [](double s) { return std::exp(s); });
        auto D = AdaptedProfile::slope_matrix(12, u.spacing());
        for (int r = 0; r < 12; ++r) {
            double m = 0;
            for (int k = 0; k < 12; ++k) m += (*D)[r * 12 + k] * u.values()[k];
            CHECK(std::abs(m - u.slopes()[r]) < 1e-12);
        }
    }
    SUBCASE("zero outside mode and exact integral") {
        AdaptedProfile z(-0.2, -0.1, {1, 1, 1}, AdaptedProfile::Outside::Zero);
        CHECK(z(-0.25) == 0.0);
        CHECK(z(-0.15) == doctest::Approx(1.0));
        auto q = AdaptedProfile::sampled(0, 1, 11, [](double s) { return s * s; });
        CHECK(q.integral() == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK_THROWS_AS(AdaptedProfile(0, 1, {1.0}), ValidationError);
    }
}

TEST_CASE("weights") {
    auto geo = disk_geometry();
    SUBCASE("constant weight") {
        auto w = WeightSpec::constant();
        CHECK(w.eval(geo, {0.1, 0.1}, {0.2, -0.1}) == 1.0);
        CHECK_THROWS_AS(w.eval(geo, {0.1, 0.1}, {0.1, 0.1}), ArgumentError);
        CHECK(w.eval(geo, {0.1, 0.1}, {0.1, 0.1}, Vec2{0, 1}) == 1.0);
    }
    SUBCASE("exit-point weight is constant along geodesics and even") {
        auto geo3 = disk_geometry(0.3, 0.1, 0.3);
        auto w = WeightSpec::exit_point(0.4, {3.0, 5.0});
        Vec2 z{0.15, 0.05};
        Vec2 v{0.3, 1.0};
        v = (1.0 / metric_speed(geo3.metric, z, v)) * v;
        auto path = shoot_geodesic(geo3.metric, geo3.fol, z, v);
        double w0 = w.diagonal(geo3, z, v);
        CHECK(w0 >= w.lower());
        CHECK(w0 <= w.upper());
        CHECK(w.diagonal(geo3, z, -v) == w0);
        const std::size_t n = path.samples.size();
        for (int k = 1; k <= 20; ++k) {
            Vec2 z1 = path.samples[k * (n - 1) / 21].z;
            CHECK(std::abs(w.eval(geo3, z1, z) - w0) <= 1e-8);
        }
    }
    SUBCASE("averaged weight is constant along geodesics") {
        auto w = WeightSpec::averaged([](Vec2 q, Vec2 z) { return 1.5 + 0.5 * std::sin(4 * q.x + q.y - z.x); },
                                      1.0, 2.0, "averaged");
        Vec2 z{0.1, 0.0};
        Vec2 v{0.2, 1.0};
        auto path = shoot_geodesic(geo.metric, geo.fol, z, v);
        double w0 = w.diagonal(geo, z, v);
        CHECK(w0 >= 1.0);
        CHECK(w0 <= 2.0);
        const std::size_t n = path.samples.size();
        for (int k = 1; k <= 5; ++k) {
            Vec2 z1 = path.samples[k * (n - 1) / 6].z;
            CHECK(std::abs(w.eval(geo, z1, z) - w0) <= 1e-6);
        }
        CHECK(std::abs(w.diagonal(geo, z, -1.0 * v) - w0) <= 1e-12);
    }
}

TEST_CASE("connect finds the geodesic through two points") {
    auto geo = disk_geometry(0.3, 0.1, 0.5);
    Vec2 a{0.1, -0.2}, b{0.3, 0.25};
    Vec2 v = connect(geo, a, b);
    CHECK(metric_speed(geo.metric, a, v) == doctest::Approx(1.0));
    ShootOptions o;
    o.stop_at_region = false;
    auto p = shoot_geodesic(geo.metric, geo.fol, a, v, o);
    double best = 1e9;
    for (const auto& s : p.samples) best = std::min(best, norm(s.z - b));
    CHECK(best < 1e-3);  // sample spacing; the dense miss is far smaller
}

TEST_CASE("geodesics between region points are unique") {
    auto geo = disk_geometry(0.3, 0.1, 0.3);
    FoliationFrame frame(geo);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ShootOptions o;
    o.stop_at_region = false;
    const int fan = 1440;
    for (int k = 0; k < 6; ++k) {
        Vec2 a = frame.to_chart(0.03 + 0.25 * U(rng), -0.4 + 0.8 * U(rng));
        Vec2 b = frame.to_chart(0.03 + 0.25 * U(rng), -0.4 + 0.8 * U(rng));
        // directions whose geodesic passes near b, grouped into runs of neighbouring angles
        std::vector<char> hit(fan, 0);
        for (int i = 0; i < fan; ++i) {
            double th = 2 * M_PI * i / fan;
            auto p = shoot_geodesic(geo.metric, geo.fol, a, {std::cos(th), std::sin(th)}, o);
            double best = 1e9;
            for (const auto& s : p.samples) best = std::min(best, norm(s.z - b));
            hit[i] = best < 0.01;
        }
        int runs = 0;
        for (int i = 0; i < fan; ++i) runs += hit[i] && !hit[(i + fan - 1) % fan];
        CHECK(runs == 1);
    }
}

TEST_CASE("xray against analytic chords") {
    SUBCASE("zero field") {
        auto geo = disk_geometry();
        CHECK(xray(geo, WeightSpec::constant(), [](Vec2) { return 0.0; }, {0.1, 0}, {0, 1}, 1e-3).value == 0.0);
    }
    SUBCASE("unit disk indicator, chord at distance 0.6") {
        auto geo = halfplane_geometry(50.0, 0.0, {-5, 5, -5, 5});
        auto f = [](Vec2 z) { return dot(z, z) <= 1.0 ? 1.0 : 0.0; };
        auto r = xray(geo, WeightSpec::constant(), f, {0.6, 0.0}, {0.0, 1.0}, 1e-4);
        CHECK(std::abs(r.value - 1.6) <= 1e-4);
        CHECK(r.exit_forward == ExitReason::LeftChart);
    }
    SUBCASE("slab of thickness 0.3 at angle theta") {
        auto geo = halfplane_geometry(0.3, 0.0, {-2, 2, -2, 2});
        auto u = AdaptedProfile::sampled(-0.3, 0.0, 16, [](double) { return 1.0; });
        auto f = adapted_field(u, geo.fol);
        for (double th : {0.4, 0.8, 1.3}) {
            auto r = xray(geo, WeightSpec::constant(), f, {0.15, 0.0}, {std::sin(th), std::cos(th)}, 1e-4);
            CHECK(std::abs(r.value - 0.3 / std::sin(th)) <= 1e-4);
        }
    }
    SUBCASE("time cap gives a flagged partial value") {
        auto geo = halfplane_geometry(1.0);
        geo.shoot.time_cap = 0.5;
        auto r = xray(geo, WeightSpec::constant(), [](Vec2) { return 1.0; }, {0.5, 0}, {0, 1}, 1e-3);
        CHECK(r.time_capped);
        CHECK(r.value == doctest::Approx(1.0));
    }
}

TEST_CASE("xray quadrature converges at second order") {
    auto geo = disk_geometry(0.3, 0.1, 0.3);
    auto f = [](Vec2 z) { return std::exp(-4 * dot(z, z)) * std::cos(3 * z.y); };
    Vec2 z{0.12, 0.0}, v{0.1, 1.0};
    auto I = [&](double h) { return xray(geo, WeightSpec::constant(), f, z, v, h).value; };
    double a = I(0.02), b = I(0.01), c = I(0.005);
    CHECK(std::log2(std::abs(a - b) / std::abs(b - c)) >= 1.9);
}

TEST_CASE("sinogram") {
    auto geo = disk_geometry();
    auto grid = make_ray_grid(0.3, 6, -0.5, 0.5, 5, 1.0, 5);
    auto f1 = [](Vec2 z) { return std::exp(-dot(z, z)); };
    auto f2 = [](Vec2 z) { return z.x * z.y; };
    auto s1 = sinogram(geo, WeightSpec::constant(), f1, grid, 5e-3);
    auto s2 = sinogram(geo, WeightSpec::constant(), f2, grid, 5e-3);
    auto s12 = sinogram(geo, WeightSpec::constant(), [&](Vec2 z) { return f1(z) + f2(z); }, grid, 5e-3);
    for (std::size_t k = 0; k < s1.size(); ++k) {
        CHECK(std::abs(s12.values[k] - s1.values[k] - s2.values[k]) <= 1e-12);
        CHECK(std::isfinite(s1.values[k]));
    }
    CHECK(s1.h == 5e-3);

    SUBCASE("mirrored omega = -1 entries match direct computation") {
        auto direct = grid;
        direct.symmetric = false;
        auto sd = sinogram(geo, WeightSpec::constant(), f1, direct, 5e-3);
        for (std::size_t k = 0; k < s1.size(); ++k) CHECK(std::abs(sd.values[k] - s1.values[k]) <= 1e-9);
    }
    SUBCASE("values are per ray, not binned") {
        auto fine = make_ray_grid(0.3, 6, -0.5, 0.5, 5, 1.0, 9);
        auto sf = sinogram(geo, WeightSpec::constant(), f1, fine, 5e-3);
        for (std::size_t ix = 0; ix < 6; ++ix)
            for (std::size_t iy = 0; iy < 5; ++iy)
                for (std::size_t il = 0; il < 5; ++il)
                    CHECK(sf.values[sf.index(ix, iy, 2 * il, 0)] == s1.values[s1.index(ix, iy, il, 0)]);
    }
    SUBCASE("zero field and empty grid") {
        auto s0 = sinogram(geo, WeightSpec::constant(), [](Vec2) { return 0.0; }, grid, 5e-3);
        for (double v : s0.values) CHECK(v == 0.0);
        RayGrid empty;
        CHECK_THROWS_AS(sinogram(geo, WeightSpec::constant(), f1, empty, 5e-3), ArgumentError);
    }
}

TEST_CASE("adapted lifting") {
    auto geo = disk_geometry();
    Rect r{-0.1, 0.6, -0.8, 0.8};
    auto three = AdaptedProfile::sampled(-0.3, 0.0, 8, [](double) { return 3.0; });
    auto g3 = lift_adapted(three, geo.fol, r, 33, 33);
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i)
            if (geo.fol.in_region(g3.node(i, j))) CHECK(g3.at(i, j) == doctest::Approx(3.0).epsilon(1e-14));

    auto id = AdaptedProfile::sampled(-0.3, 0.0, 8, [](double s) { return s; });
    auto gi = lift_adapted(id, geo.fol, r, 33, 33);
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i) {
            Vec2 z = gi.node(i, j);
            if (geo.fol.in_region(z)) CHECK(std::abs(gi.at(i, j) - geo.fol.xtilde(z).value) <= 1e-12);
        }

    auto wavy = AdaptedProfile::sampled(-0.3, 0.0, 512, [](double s) { return std::sin(20 * s); });
    auto f = adapted_field(wavy, geo.fol);
    for (double t : {0.05, 0.15, 0.25}) {
        auto pts = trace_level_set(geo.fol, geo.metric.domain(), t, 100);
        double lo = 1e9, hi = -1e9;
        for (Vec2 z : pts) {
            lo = std::min(lo, f(z));
            hi = std::max(hi, f(z));
        }
        CHECK(hi - lo <= 1e-8);
    }
    int bad = -1;
    auto short_profile = AdaptedProfile::sampled(-0.1, 0.0, 8, [](double s) { return s; });
    lift_adapted(short_profile, geo.fol, r, 17, 17, &bad);
    CHECK(bad > 0);
}
