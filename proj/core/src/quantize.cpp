#include "foliate/quantize.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "foliate/error.hpp"
#include "foliate/parallel.hpp"
#include "foliate/transform.hpp"

namespace foliate {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// planner calls are not thread safe
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<cplx> forward_2d(const GridField& f) {
    std::vector<cplx> buf(f.values.begin(), f.values.end());
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_2d(f.ny, f.nx, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return buf;
}

}  // namespace

double dft_frequency(int m, int n, double d) {
    int mm = m < (n + 1) / 2 ? m : m - n;
    return kTwoPi * mm / (n * d);
}

FrequencySymbol sample_frequency_symbol(Rect frame_rect, int nx, int ny, const SymbolFn& a, bool per_row) {
    if (nx < 2 || ny < 2) throw ValidationError("frequency grid needs at least 2 x 2 nodes");
    FrequencySymbol s;
    s.rect = frame_rect;
    s.nx = nx;
    s.ny = ny;
    s.per_row = per_row;
    const double dx = (frame_rect.x_max - frame_rect.x_min) / (nx - 1);
    const double dy = (frame_rect.y_max - frame_rect.y_min) / (ny - 1);
    const std::size_t rows = per_row ? static_cast<std::size_t>(nx) : static_cast<std::size_t>(nx) * ny;
    s.values.assign(rows * ny * nx, 0.0);
    const double ymid = 0.5 * (frame_rect.y_min + frame_rect.y_max);
    parallel_for(rows, [&](std::size_t r) {
        int ix = static_cast<int>(r % nx), iy = static_cast<int>(r / nx);
        double x = frame_rect.x_min + ix * dx;
        double y = per_row ? ymid : frame_rect.y_min + iy * dy;
        for (int m2 = 0; m2 < ny; ++m2) {
            double k2 = dft_frequency(m2, ny, dy);
            for (int m1 = 0; m1 < nx; ++m1) {
                double k1 = dft_frequency(m1, nx, dx);
                s.values[s.index(ix, iy, m1, m2)] = a({x, y}, x * x * k1, x * k2);
            }
        }
    });
    return s;
}

GridField quantize_left(const FrequencySymbol& a, const GridField& f) {
    if (a.nx != f.nx || a.ny != f.ny || std::abs(a.rect.x_min - f.rect.x_min) > 1e-12 ||
        std::abs(a.rect.x_max - f.rect.x_max) > 1e-12 || std::abs(a.rect.y_min - f.rect.y_min) > 1e-12 ||
        std::abs(a.rect.y_max - f.rect.y_max) > 1e-12)
        throw ShapeError("symbol and field grids differ");
    const int nx = f.nx, ny = f.ny;
    std::vector<cplx> fh = forward_2d(f);  // fh[m2 * nx + m1]
    std::vector<cplx> tw1(nx), tw2(ny);
    for (int k = 0; k < nx; ++k) tw1[k] = std::polar(1.0, kTwoPi * k / nx);
    for (int k = 0; k < ny; ++k) tw2[k] = std::polar(1.0, kTwoPi * k / ny);
    const double scale = 1.0 / (static_cast<double>(nx) * ny);

    GridField out(f.rect, nx, ny);
    if (a.per_row) {
        fftw_plan plan;
        std::vector<cplx> probe(ny);
        {
            std::lock_guard<std::mutex> lock(planner_mutex());
            auto* p = reinterpret_cast<fftw_complex*>(probe.data());
            plan = fftw_plan_dft_1d(ny, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
        }
        parallel_for(static_cast<std::size_t>(nx), [&](std::size_t r) {
            const int ix = static_cast<int>(r);
            std::vector<cplx> g(ny);
            for (int m2 = 0; m2 < ny; ++m2) {
                cplx acc = 0.0;
                for (int m1 = 0; m1 < nx; ++m1)
                    acc += tw1[(static_cast<long>(m1) * ix) % nx] * a.values[a.index(ix, 0, m1, m2)] *
                           fh[static_cast<std::size_t>(m2) * nx + m1];
                g[m2] = acc;
            }
            auto* p = reinterpret_cast<fftw_complex*>(g.data());
            fftw_execute_dft(plan, p, p);
            for (int iy = 0; iy < ny; ++iy) out.at(ix, iy) = g[iy].real() * scale;
        });
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    } else {
        parallel_for(static_cast<std::size_t>(nx) * ny, [&](std::size_t r) {
            const int ix = static_cast<int>(r % nx), iy = static_cast<int>(r / nx);
            cplx acc = 0.0;
            for (int m2 = 0; m2 < ny; ++m2) {
                cplx e2 = tw2[(static_cast<long>(m2) * iy) % ny];
                for (int m1 = 0; m1 < nx; ++m1)
                    acc += e2 * tw1[(static_cast<long>(m1) * ix) % nx] * a.values[a.index(ix, iy, m1, m2)] *
                           fh[static_cast<std::size_t>(m2) * nx + m1];
            }
            out.at(ix, iy) = acc.real() * scale;
        });
    }
    return out;
}

GridField resample_to_frame(const GridField& chart_field, const Geometry& geo, Rect frame_rect, int nx, int ny) {
    FoliationFrame frame(geo);
    GridField out(frame_rect, nx, ny);
    parallel_for(static_cast<std::size_t>(nx) * ny, [&](std::size_t r) {
        const int ix = static_cast<int>(r % nx), iy = static_cast<int>(r / nx);
        Vec2 q = out.node(ix, iy);
        out.at(ix, iy) = chart_field.sample(frame.to_chart(q.x, q.y));
    });
    return out;
}

double annihilation_residual(const FrequencySymbol& a1, const GridField& frame_field) {
    double nf = frame_field.l2_norm();
    if (nf == 0.0) return 0.0;
    return quantize_left(a1, frame_field).l2_norm() / nf;
}

double verify_annihilation(const FrequencySymbol& a1, const AdaptedProfile& u, const Geometry& geo,
                           Rect chart_rect, int chart_nx, int chart_ny) {
    GridField chart = lift_adapted(u, geo.fol, chart_rect, chart_nx, chart_ny);
    GridField f = resample_to_frame(chart, geo, a1.rect, a1.nx, a1.ny);
    return annihilation_residual(a1, f);
}

}  // namespace foliate
