#pragma once

#include <complex>
#include <string>
#include <vector>

#include "foliate/profile.hpp"
#include "foliate/transform.hpp"

namespace foliate {

struct Axis {
    std::string name;
    double min = 0.0, max = 0.0;
    std::size_t count = 0;
};

enum class Element { F64, C128 };

// Sidecar header of a grid file pair <base>.json / <base>.bin.
struct GridHeader {
    std::vector<std::size_t> dims;
    std::vector<Axis> axes;  // optional, one per dim when present
    Element element = Element::F64;
    std::string meta = "{}";  // JSON object text, echoed configuration etc.

    std::size_t count() const;
    std::size_t bytes() const { return count() * (element == Element::F64 ? 8 : 16); }
};

struct GridData {
    GridHeader header;
    std::vector<double> values;  // complex payloads interleaved re, im
};

// Accepts "<base>", "<base>.json" or "<base>.bin".
std::string grid_base(const std::string& path);

void write_grid(const std::string& path, const GridHeader& header, const std::vector<double>& values);
void write_grid(const std::string& path, GridHeader header, const std::vector<std::complex<double>>& values);
GridData read_grid(const std::string& path);
std::vector<std::complex<double>> as_complex(const GridData& data);

// Sinogram values plus a "<base>_mask" grid of launch validity.
void write_sinogram(const std::string& path, const Sinogram& s, const std::string& meta = "{}");
Sinogram read_sinogram(const std::string& path);

void write_profile(const std::string& path, const AdaptedProfile& u, const std::string& meta = "{}");
AdaptedProfile read_profile(const std::string& path);

void write_field(const std::string& path, const GridField& f, const std::string& meta = "{}");
GridField read_field(const std::string& path);

// Plain CSV with a header row; numbers written with 17 significant digits.
// A nonempty comment goes on a leading "# " line (newlines replaced by spaces).
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& columns, const std::string& comment = "");
    ~CsvWriter();
    CsvWriter& operator<<(const std::string& cell);
    CsvWriter& operator<<(double v);
    CsvWriter& operator<<(long long v);
    CsvWriter& operator<<(int v) { return *this << static_cast<long long>(v); }
    void end_row();

private:
    struct Impl;
    Impl* impl_;
};

}  // namespace foliate
