#pragma once

#include "foliate/grid_field.hpp"
#include "foliate/profile.hpp"
#include "foliate/symbols.hpp"

namespace foliate {

// Symbol sampled on the DFT frequency grid of a frame grid (x, y), with zeta = (x^2 k1, x k2).
// Row symbols ignore y; point symbols carry one frequency table per node.
struct FrequencySymbol {
    Rect rect;
    int nx = 0, ny = 0;
    bool per_row = true;
    std::vector<cplx> values;

    // m1 along x, m2 along y
    std::size_t index(int ix, int iy, int m1, int m2) const {
        std::size_t base = per_row ? static_cast<std::size_t>(ix)
                                   : static_cast<std::size_t>(iy) * nx + ix;
        return (base * ny + m2) * nx + m1;
    }
};

// Angular frequency of DFT index m on n samples spaced d apart, wrapped to [-n/2, n/2).
double dft_frequency(int m, int n, double d);

FrequencySymbol sample_frequency_symbol(Rect frame_rect, int nx, int ny, const SymbolFn& a, bool per_row = true);

// Left quantization of a on the periodic frame grid.
GridField quantize_left(const FrequencySymbol& a, const GridField& f);

// Chart field carried onto a frame grid through (x, y) -> chart point; bicubic between chart nodes.
GridField resample_to_frame(const GridField& chart_field, const Geometry& geo, Rect frame_rect, int nx, int ny);

// ||Q(a1) f|| / ||f||, zero for f = 0.
double annihilation_residual(const FrequencySymbol& a1, const GridField& frame_field);

// Lift the profile onto the chart grid, resample onto the symbol's frame grid and quantize.
double verify_annihilation(const FrequencySymbol& a1, const AdaptedProfile& u, const Geometry& geo,
                           Rect chart_rect, int chart_nx, int chart_ny);

// 1e-6 when leaves are grid lines, 1e-3 otherwise.
inline double annihilation_tolerance(bool aligned) { return aligned ? 1e-6 : 1e-3; }

}  // namespace foliate
