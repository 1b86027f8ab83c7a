#pragma once

#include <string>
#include <vector>

#include "foliate/error.hpp"
#include "foliate/inversion.hpp"
#include "foliate/normal_op.hpp"
#include "json.hpp"

namespace foliate::cli {

// Bad command line or configuration; maps to exit code 2.
class UsageError : public Error {
public:
    using Error::Error;
};

// Flat key-value experiment configuration: built-in defaults, then the config file, then
// --key=value overrides. Values keep their JSON types.
class Config {
public:
    Config();
    // Shared defaults with the overlay of one command (normal-op uses the compact cutoff).
    static Config for_command(const std::string& command);
    static const nlohmann::json& defaults();

    void merge_file(const std::string& path);
    // "key=value"; value parsed as JSON when possible, otherwise taken as a string
    void set_override(const std::string& assignment);
    void set(const std::string& key, nlohmann::json value);

    double num(const std::string& key) const;
    int integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    bool is_null(const std::string& key) const;

    const nlohmann::json& raw() const { return values_; }

private:
    const nlohmann::json& at(const std::string& key) const;
    nlohmann::json values_;
};

Geometry make_geometry(const Config& cfg);
WeightSpec make_weight(const Config& cfg);
// chi "gaussian" uses nu = alpha(0) / F at the boundary point.
NormalOpConfig make_normal_op_config(const Config& cfg, const Geometry& geo);
InversionConfig make_inversion_config(const Config& cfg);
// Launch and chart grids scaled by `refine`, quadrature step divided by it.
Scene make_cli_scene(const Config& cfg, int refine = 1);

}  // namespace foliate::cli
