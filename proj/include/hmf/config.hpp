#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hmf/errors.hpp"

namespace hmf {

// Minimal TOML-style config model: [section] headers, key = value lines,
// scalar values (integer, float, boolean, quoted string) and flat arrays of
// scalars. Parsing tracks line numbers for error messages; emission is
// canonical (sorted sections and keys), so hashing the emitted text is
// whitespace-insensitive.
struct ConfigValue {
    using Array = std::vector<ConfigValue>;
    std::variant<long long, double, bool, std::string, Array> data;
    int line = 0;

    bool is_int() const { return std::holds_alternative<long long>(data); }
    bool is_real() const { return std::holds_alternative<double>(data); }
    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }

    long long as_int() const;
    double as_real() const; // accepts integers
    bool as_bool() const;
    const std::string& as_string() const;
    const Array& as_array() const;
    std::vector<double> as_real_array() const;

    bool same_value(const ConfigValue& o) const;
    std::string emit() const;
};

class ConfigTable {
public:
    using Section = std::map<std::string, ConfigValue>;

    static ConfigTable parse(const std::string& text);
    static ConfigTable parse_file(const std::string& path);
    std::string emit() const;

    bool has(const std::string& section, const std::string& key) const;
    const ConfigValue* find(const std::string& section,
                            const std::string& key) const;
    void set(const std::string& section, const std::string& key, ConfigValue v);

    const std::map<std::string, Section>& sections() const { return sections_; }

    bool operator==(const ConfigTable& o) const;

private:
    // top-level keys live in the section with the empty name
    std::map<std::string, Section> sections_;
};

// FNV-1a hash of the canonical emission, as a 16-hex-digit string.
std::string config_hash(const ConfigTable& t);

// ---------------------------------------------------------------------------
// Typed run configuration mirroring every module parameter. Construction
// from a table rejects unknown sections/keys with the source line.

struct RunConfig {
    std::uint64_t seed = 1;

    struct GridSection {
        int n = 3;
        int d = 0; // 0 = same as n
        int nodes = 64;
        double side = 2.0;
    } grid;

    struct FlowSection {
        std::string scheme = "projected-explicit";
        double dt_factor = 0.5; // dt = dt_factor * h^2 / (4n)
        double end_time = 0.0;
        double gl_epsilon = 0.05;
        std::string boundary = "fixed-dirichlet";
        int record_every = 10;
        std::string initial = "random-smooth";
        double profile_factor = 1.2;
        double amplitude = 0.08;
        int max_mode = 2;
    } flow;

    struct DensitiesSection {
        std::string analytic = "none"; // none | hedgehog | line-singular
        std::vector<double> radii = {0.05, 0.1, 0.2};
        std::vector<double> center = {};
        int quad_nodes = 96;
        int time_slices = 33;
        std::string cutoff = "none"; // none | bump
        double cutoff_scale = 1.0;
    } densities;

    struct StrataSection {
        double epsilon = 3.18;
        double r_min_factor = 1.0; // ladder r_min = factor * h
        double r_max_factor = 4.0;
        double defect_threshold = 0.1;
        int k = 1;
        double content_alpha = 1.0;
        std::vector<double> content_radii = {0.08, 0.1};
    } strata;

    struct GmtSection {
        int random_clouds = 20;
        int max_points = 40;
        std::string packing = "k-plane"; // none | k-plane | arc
        int packing_k = 1;
        double delta = 0.01;
    } gmt;

    struct CoverSection {
        int k = 1;
        double rho = 0.05;
        double gamma = 0.1;
        double eta_prime = 0.05;
        double eta_over_rho = 0.005;
        double R = 0.0625;
        std::string oracle = "line"; // line | hedgehog
        int samples = 33;
        double root_radius = 0.5;
    } cover;

    struct OutputSection {
        bool write_fields = true;
    } output;

    static RunConfig from_table(const ConfigTable& t);
    ConfigTable to_table() const;
};

} // namespace hmf
