#include "foliate/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "foliate/error.hpp"
#include "json.hpp"

namespace foliate {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "payload is written in host order");

std::size_t GridHeader::count() const {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

std::string grid_base(const std::string& path) {
    for (const char* ext : {".json", ".bin"}) {
        std::string e(ext);
        if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0)
            return path.substr(0, path.size() - e.size());
    }
    return path;
}

namespace {

std::size_t line_of(const std::string& text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + byte, '\n'));
}

// Line on which a top-level key appears, 1 when absent.
std::size_t key_line(const std::string& text, const std::string& key) {
    auto pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 1 : line_of(text, pos);
}

json header_to_json(const GridHeader& h) {
    json j;
    j["dims"] = h.dims;
    j["element"] = h.element == Element::F64 ? "f64" : "c128";
    j["byte_order"] = "little";
    j["layout"] = "row-major";
    json axes = json::array();
    for (const auto& a : h.axes) axes.push_back({{"name", a.name}, {"min", a.min}, {"max", a.max}, {"count", a.count}});
    j["axes"] = axes;
    j["meta"] = json::parse(h.meta.empty() ? "{}" : h.meta);
    return j;
}

GridHeader header_from_text(const std::string& text) {
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("empty grid header", 1);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed grid header: ") + e.what(), line_of(text, e.byte > 0 ? e.byte - 1 : 0));
    }
    if (!j.is_object()) throw ParseError("grid header must be a JSON object", 1);
    GridHeader h;
    try {
        if (!j.contains("dims")) throw ParseError("grid header has no dims", 1);
        h.dims = j.at("dims").get<std::vector<std::size_t>>();
        std::string el = j.value("element", "f64");
        if (el == "f64") h.element = Element::F64;
        else if (el == "c128") h.element = Element::C128;
        else throw ParseError("unknown element type '" + el + "'", key_line(text, "element"));
        if (j.contains("axes"))
            for (const auto& a : j.at("axes"))
                h.axes.push_back({a.at("name").get<std::string>(), a.at("min").get<double>(),
                                  a.at("max").get<double>(), a.at("count").get<std::size_t>()});
        h.meta = j.contains("meta") ? j.at("meta").dump() : "{}";
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad grid header field: ") + e.what(), key_line(text, "dims"));
    }
    if (h.dims.empty()) throw ParseError("grid header dims are empty", key_line(text, "dims"));
    for (auto d : h.dims)
        if (d == 0) throw ParseError("grid header dims must be positive", key_line(text, "dims"));
    if (!h.axes.empty() && h.axes.size() != h.dims.size())
        throw ParseError("axis count does not match dims", key_line(text, "axes"));
    return h;
}

}  // namespace

void write_grid(const std::string& path, const GridHeader& header, const std::vector<double>& values) {
    const std::size_t width = header.element == Element::F64 ? 1 : 2;
    if (header.dims.empty()) throw ValidationError("grid dims are empty");
    for (auto d : header.dims)
        if (d == 0) throw ValidationError("grid dims must be positive");
    if (values.size() != header.count() * width)
        throw ValidationError("value count " + std::to_string(values.size()) + " does not match dims product " +
                              std::to_string(header.count() * width));
    if (!header.axes.empty() && header.axes.size() != header.dims.size())
        throw ValidationError("axis count does not match dims");
    const std::string base = grid_base(path);
    {
        std::ofstream js(base + ".json");
        if (!js) throw IoError("cannot open header for writing", base + ".json");
        js << header_to_json(header).dump(2) << "\n";
        if (!js) throw IoError("failed writing header", base + ".json");
    }
    std::ofstream bin(base + ".bin", std::ios::binary);
    if (!bin) throw IoError("cannot open payload for writing", base + ".bin");
    bin.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * 8));
    if (!bin) throw IoError("failed writing payload", base + ".bin");
}

void write_grid(const std::string& path, GridHeader header, const std::vector<std::complex<double>>& values) {
    header.element = Element::C128;
    std::vector<double> flat(values.size() * 2);
    std::memcpy(flat.data(), values.data(), flat.size() * sizeof(double));
    write_grid(path, header, flat);
}

GridData read_grid(const std::string& path) {
    const std::string base = grid_base(path);
    std::ifstream js(base + ".json");
    if (!js) throw IoError("cannot open grid header", base + ".json");
    std::stringstream ss;
    ss << js.rdbuf();
    GridData d;
    d.header = header_from_text(ss.str());
    std::ifstream bin(base + ".bin", std::ios::binary | std::ios::ate);
    if (!bin) throw IoError("cannot open grid payload", base + ".bin");
    const std::size_t actual = static_cast<std::size_t>(bin.tellg());
    const std::size_t expected = d.header.bytes();
    if (actual != expected)
        throw ValidationError("payload " + base + ".bin has " + std::to_string(actual) + " bytes, expected " +
                              std::to_string(expected));
    bin.seekg(0);
    d.values.resize(expected / 8);
    bin.read(reinterpret_cast<char*>(d.values.data()), static_cast<std::streamsize>(expected));
    if (!bin) throw IoError("failed reading payload", base + ".bin");
    return d;
}

std::vector<std::complex<double>> as_complex(const GridData& data) {
    if (data.header.element != Element::C128) throw ValidationError("grid payload is not complex");
    std::vector<std::complex<double>> out(data.values.size() / 2);
    std::memcpy(out.data(), data.values.data(), data.values.size() * sizeof(double));
    return out;
}

namespace {

Axis axis_of(const std::string& name, const std::vector<double>& v) {
    return {name, v.empty() ? 0.0 : v.front(), v.empty() ? 0.0 : v.back(), v.size()};
}

std::vector<double> axis_values(const Axis& a) {
    std::vector<double> v(a.count);
    for (std::size_t i = 0; i < a.count; ++i)
        v[i] = a.count == 1 ? a.min : a.min + (a.max - a.min) * static_cast<double>(i) / (a.count - 1);
    return v;
}

json merge_meta(const std::string& meta, json extra) {
    json m = json::parse(meta.empty() ? "{}" : meta);
    if (!m.is_object()) throw ValidationError("meta must be a JSON object");
    for (auto& [k, v] : extra.items()) m[k] = v;
    return m;
}

}  // namespace

void write_sinogram(const std::string& path, const Sinogram& s, const std::string& meta) {
    const auto& g = s.grid;
    GridHeader h;
    h.dims = {g.x.size(), g.y.size(), g.lambda_hat.size(), 2};
    h.axes = {axis_of("x", g.x), axis_of("y", g.y), axis_of("lambda_hat", g.lambda_hat), {"omega", 1.0, -1.0, 2}};
    h.meta = merge_meta(meta, {{"quadrature_step", s.h},
                               {"weight", s.weight},
                               {"lambda_scaled_by_x", true},
                               {"symmetric", g.symmetric},
                               {"time_capped", s.capped}})
                 .dump();
    write_grid(path, h, s.values);
    GridHeader mh = h;
    mh.meta = "{}";
    std::vector<double> mask(s.valid.begin(), s.valid.end());
    write_grid(grid_base(path) + "_mask", mh, mask);
}

Sinogram read_sinogram(const std::string& path) {
    GridData d = read_grid(path);
    const auto& h = d.header;
    if (h.dims.size() != 4 || h.axes.size() != 4 || h.dims[3] != 2)
        throw ValidationError("grid is not a sinogram (expected x, y, lambda_hat, omega axes)");
    json m = json::parse(h.meta);
    Sinogram s;
    s.grid.x = axis_values(h.axes[0]);
    s.grid.y = axis_values(h.axes[1]);
    s.grid.lambda_hat = axis_values(h.axes[2]);
    s.grid.symmetric = m.value("symmetric", true);
    s.h = m.value("quadrature_step", 0.0);
    s.weight = m.value("weight", std::string("unknown"));
    s.capped = m.value("time_capped", 0);
    s.values = std::move(d.values);
    GridData mask = read_grid(grid_base(path) + "_mask");
    if (mask.values.size() != s.values.size()) throw ValidationError("sinogram mask size mismatch");
    s.valid.resize(mask.values.size());
    for (std::size_t k = 0; k < mask.values.size(); ++k) s.valid[k] = mask.values[k] != 0.0;
    return s;
}

void write_profile(const std::string& path, const AdaptedProfile& u, const std::string& meta) {
    GridHeader h;
    h.dims = {static_cast<std::size_t>(u.size())};
    h.axes = {{"s", u.s_min(), u.s_max(), h.dims[0]}};
    h.meta = merge_meta(meta, {{"outside", u.outside() == AdaptedProfile::Outside::Zero ? "zero" : "clamp"}}).dump();
    write_grid(path, h, u.values());
}

AdaptedProfile read_profile(const std::string& path) {
    GridData d = read_grid(path);
    if (d.header.dims.size() != 1 || d.header.axes.size() != 1) throw ValidationError("grid is not a profile");
    json m = json::parse(d.header.meta);
    auto outside = m.value("outside", std::string("clamp")) == "zero" ? AdaptedProfile::Outside::Zero
                                                                     : AdaptedProfile::Outside::Clamp;
    return AdaptedProfile(d.header.axes[0].min, d.header.axes[0].max, std::move(d.values), outside);
}

void write_field(const std::string& path, const GridField& f, const std::string& meta) {
    GridHeader h;
    h.dims = {static_cast<std::size_t>(f.ny), static_cast<std::size_t>(f.nx)};
    h.axes = {{"y", f.rect.y_min, f.rect.y_max, h.dims[0]}, {"x", f.rect.x_min, f.rect.x_max, h.dims[1]}};
    h.meta = meta;
    write_grid(path, h, f.values);
}

GridField read_field(const std::string& path) {
    GridData d = read_grid(path);
    if (d.header.dims.size() != 2 || d.header.axes.size() != 2) throw ValidationError("grid is not a 2D field");
    const auto& ay = d.header.axes[0];
    const auto& ax = d.header.axes[1];
    GridField f({ax.min, ax.max, ay.min, ay.max}, static_cast<int>(ax.count), static_cast<int>(ay.count));
    f.values = std::move(d.values);
    return f;
}

struct CsvWriter::Impl {
    std::ofstream out;
    std::string path;
    bool first = true;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns, const std::string& comment)
    : impl_(new Impl) {
    impl_->path = path;
    impl_->out.open(path);
    if (!impl_->out) {
        delete impl_;
        throw IoError("cannot open CSV for writing", path);
    }
    if (!comment.empty()) {
        std::string line = comment;
        std::replace(line.begin(), line.end(), '\n', ' ');
        impl_->out << "# " << line << "\n";
    }
    for (std::size_t i = 0; i < columns.size(); ++i) impl_->out << (i ? "," : "") << columns[i];
    impl_->out << "\n";
    impl_->out << std::setprecision(17);
}

CsvWriter::~CsvWriter() { delete impl_; }

CsvWriter& CsvWriter::operator<<(const std::string& cell) {
    if (!impl_->first) impl_->out << ",";
    impl_->first = false;
    if (cell.find_first_of(",\"\n") != std::string::npos) {
        impl_->out << '"';
        for (char ch : cell) impl_->out << (ch == '"' ? "\"\"" : std::string(1, ch));
        impl_->out << '"';
    } else {
        impl_->out << cell;
    }
    return *this;
}

CsvWriter& CsvWriter::operator<<(double v) {
    if (!impl_->first) impl_->out << ",";
    impl_->first = false;
    impl_->out << v;
    return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
    if (!impl_->first) impl_->out << ",";
    impl_->first = false;
    impl_->out << v;
    return *this;
}

void CsvWriter::end_row() {
    impl_->out << "\n";
    impl_->first = true;
    if (!impl_->out) throw IoError("failed writing CSV", impl_->path);
}

}  // namespace foliate
