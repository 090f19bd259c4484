#include "hmf/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hmf/par.hpp"

namespace hmf {

namespace {

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // keep reals distinguishable from integers in the emitted text
    if (s.find_first_of(".eE") == std::string::npos &&
        s.find_first_of("ni") == std::string::npos)
        s += ".0";
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
            return false;
    return true;
}

ConfigValue parse_scalar(const std::string& tok, int line) {
    ConfigValue v;
    v.line = line;
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
        v.data = tok.substr(1, tok.size() - 2);
        return v;
    }
    if (tok == "true") {
        v.data = true;
        return v;
    }
    if (tok == "false") {
        v.data = false;
        return v;
    }
    // integer?
    {
        bool ok = !tok.empty();
        std::size_t i = (tok[0] == '+' || tok[0] == '-') ? 1 : 0;
        if (i == tok.size()) ok = false;
        for (; i < tok.size() && ok; ++i)
            if (!std::isdigit(static_cast<unsigned char>(tok[i]))) ok = false;
        if (ok) {
            v.data = static_cast<long long>(std::stoll(tok));
            return v;
        }
    }
    // float?
    try {
        std::size_t pos = 0;
        const double d = std::stod(tok, &pos);
        if (pos == tok.size()) {
            v.data = d;
            return v;
        }
    } catch (...) {
    }
    std::ostringstream os;
    os << "line " << line << ": cannot parse value '" << tok << "'";
    throw config_error(os.str());
}

ConfigValue parse_value(const std::string& tok, int line) {
    if (!tok.empty() && tok.front() == '[') {
        if (tok.back() != ']') {
            std::ostringstream os;
            os << "line " << line << ": unterminated array";
            throw config_error(os.str());
        }
        ConfigValue v;
        v.line = line;
        ConfigValue::Array arr;
        const std::string inner = trim(tok.substr(1, tok.size() - 2));
        if (!inner.empty()) {
            std::size_t start = 0;
            bool in_quote = false;
            for (std::size_t i = 0; i <= inner.size(); ++i) {
                if (i < inner.size() && inner[i] == '"') in_quote = !in_quote;
                if (i == inner.size() || (inner[i] == ',' && !in_quote)) {
                    arr.push_back(parse_scalar(trim(inner.substr(start, i - start)),
                                               line));
                    start = i + 1;
                }
            }
        }
        v.data = std::move(arr);
        return v;
    }
    return parse_scalar(tok, line);
}

} // namespace

long long ConfigValue::as_int() const {
    if (is_int()) return std::get<long long>(data);
    std::ostringstream os;
    os << "line " << line << ": expected an integer";
    throw config_error(os.str());
}

double ConfigValue::as_real() const {
    if (is_real()) return std::get<double>(data);
    if (is_int()) return double(std::get<long long>(data));
    std::ostringstream os;
    os << "line " << line << ": expected a number";
    throw config_error(os.str());
}

bool ConfigValue::as_bool() const {
    if (is_bool()) return std::get<bool>(data);
    std::ostringstream os;
    os << "line " << line << ": expected a boolean";
    throw config_error(os.str());
}

const std::string& ConfigValue::as_string() const {
    if (is_string()) return std::get<std::string>(data);
    std::ostringstream os;
    os << "line " << line << ": expected a string";
    throw config_error(os.str());
}

const ConfigValue::Array& ConfigValue::as_array() const {
    if (is_array()) return std::get<Array>(data);
    std::ostringstream os;
    os << "line " << line << ": expected an array";
    throw config_error(os.str());
}

std::vector<double> ConfigValue::as_real_array() const {
    std::vector<double> out;
    for (const auto& v : as_array()) out.push_back(v.as_real());
    return out;
}

bool ConfigValue::same_value(const ConfigValue& o) const {
    if (data.index() != o.data.index()) {
        // integer/real cross-compare
        if ((is_int() || is_real()) && (o.is_int() || o.is_real()))
            return as_real() == o.as_real();
        return false;
    }
    if (is_array()) {
        const auto& a = as_array();
        const auto& b = o.as_array();
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (!a[i].same_value(b[i])) return false;
        return true;
    }
    if (is_int()) return as_int() == o.as_int();
    if (is_real()) return as_real() == o.as_real();
    if (is_bool()) return as_bool() == o.as_bool();
    return as_string() == o.as_string();
}

std::string ConfigValue::emit() const {
    if (is_int()) return std::to_string(std::get<long long>(data));
    if (is_real()) return fmt_real(std::get<double>(data));
    if (is_bool()) return std::get<bool>(data) ? "true" : "false";
    if (is_string()) return "\"" + std::get<std::string>(data) + "\"";
    std::string s = "[";
    const auto& arr = std::get<Array>(data);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (i) s += ", ";
        s += arr[i].emit();
    }
    return s + "]";
}

ConfigTable ConfigTable::parse(const std::string& text) {
    ConfigTable table;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        // strip comments outside quotes
        std::string line;
        bool in_quote = false;
        for (char c : raw) {
            if (c == '"') in_quote = !in_quote;
            if (c == '#' && !in_quote) break;
            line += c;
        }
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                std::ostringstream os;
                os << "line " << line_no << ": malformed section header";
                throw config_error(os.str());
            }
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_key(section)) {
                std::ostringstream os;
                os << "line " << line_no << ": bad section name '" << section
                   << "'";
                throw config_error(os.str());
            }
            table.sections_[section]; // create even if empty
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "line " << line_no << ": expected key = value";
            throw config_error(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) {
            std::ostringstream os;
            os << "line " << line_no << ": bad key '" << key << "'";
            throw config_error(os.str());
        }
        auto& sec = table.sections_[section];
        if (sec.count(key)) {
            std::ostringstream os;
            os << "line " << line_no << ": duplicate key '" << key << "'";
            throw config_error(os.str());
        }
        sec[key] = parse_value(trim(line.substr(eq + 1)), line_no);
    }
    return table;
}

ConfigTable ConfigTable::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open config file " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return parse(os.str());
}

std::string ConfigTable::emit() const {
    std::ostringstream os;
    // top-level keys first
    auto it = sections_.find("");
    if (it != sections_.end()) {
        for (const auto& [k, v] : it->second)
            os << k << " = " << v.emit() << "\n";
    }
    for (const auto& [name, sec] : sections_) {
        if (name.empty()) continue;
        os << "[" << name << "]\n";
        for (const auto& [k, v] : sec) os << k << " = " << v.emit() << "\n";
    }
    return os.str();
}

bool ConfigTable::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const ConfigValue* ConfigTable::find(const std::string& section,
                                     const std::string& key) const {
    auto it = sections_.find(section);
    if (it == sections_.end()) return nullptr;
    auto jt = it->second.find(key);
    return jt == it->second.end() ? nullptr : &jt->second;
}

void ConfigTable::set(const std::string& section, const std::string& key,
                      ConfigValue v) {
    sections_[section][key] = std::move(v);
}

bool ConfigTable::operator==(const ConfigTable& o) const {
    if (sections_.size() != o.sections_.size()) return false;
    for (const auto& [name, sec] : sections_) {
        auto it = o.sections_.find(name);
        if (it == o.sections_.end() || it->second.size() != sec.size())
            return false;
        for (const auto& [k, v] : sec) {
            auto jt = it->second.find(k);
            if (jt == it->second.end() || !v.same_value(jt->second)) return false;
        }
    }
    return true;
}

std::string config_hash(const ConfigTable& t) {
    const std::uint64_t h = par::hash_str(t.emit());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return std::string(buf);
}

// ---------------------------------------------------------------------------

namespace {

struct Binder {
    const ConfigTable& t;
    std::map<std::string, std::vector<std::string>> known;

    void mark(const std::string& sec, const std::string& key) {
        known[sec].push_back(key);
    }
    template <typename T, typename F>
    void bind(const std::string& sec, const std::string& key, T& field, F get) {
        mark(sec, key);
        const ConfigValue* v = t.find(sec, key);
        if (v) field = get(*v);
    }
    void bind_int(const std::string& sec, const std::string& key, int& f) {
        bind(sec, key, f, [](const ConfigValue& v) { return int(v.as_int()); });
    }
    void bind_u64(const std::string& sec, const std::string& key,
                  std::uint64_t& f) {
        bind(sec, key, f, [](const ConfigValue& v) {
            return std::uint64_t(v.as_int());
        });
    }
    void bind_real(const std::string& sec, const std::string& key, double& f) {
        bind(sec, key, f, [](const ConfigValue& v) { return v.as_real(); });
    }
    void bind_bool(const std::string& sec, const std::string& key, bool& f) {
        bind(sec, key, f, [](const ConfigValue& v) { return v.as_bool(); });
    }
    void bind_str(const std::string& sec, const std::string& key,
                  std::string& f) {
        bind(sec, key, f, [](const ConfigValue& v) { return v.as_string(); });
    }
    void bind_reals(const std::string& sec, const std::string& key,
                    std::vector<double>& f) {
        bind(sec, key, f,
             [](const ConfigValue& v) { return v.as_real_array(); });
    }

    void reject_unknown() const {
        for (const auto& [name, sec] : t.sections()) {
            auto it = known.find(name);
            if (it == known.end()) {
                throw config_error("unknown section [" + name + "]");
            }
            for (const auto& [k, v] : sec) {
                bool found = false;
                for (const auto& kk : it->second)
                    if (kk == k) found = true;
                if (!found) {
                    std::ostringstream os;
                    os << "line " << v.line << ": unknown key '" << k
                       << "' in section [" << name << "]";
                    throw config_error(os.str());
                }
            }
        }
    }
};

} // namespace

RunConfig RunConfig::from_table(const ConfigTable& t) {
    RunConfig c;
    Binder b{t, {}};
    b.bind_u64("", "seed", c.seed);

    b.bind_int("grid", "n", c.grid.n);
    b.bind_int("grid", "d", c.grid.d);
    b.bind_int("grid", "nodes", c.grid.nodes);
    b.bind_real("grid", "side", c.grid.side);

    b.bind_str("flow", "scheme", c.flow.scheme);
    b.bind_real("flow", "dt_factor", c.flow.dt_factor);
    b.bind_real("flow", "end_time", c.flow.end_time);
    b.bind_real("flow", "gl_epsilon", c.flow.gl_epsilon);
    b.bind_str("flow", "boundary", c.flow.boundary);
    b.bind_int("flow", "record_every", c.flow.record_every);
    b.bind_str("flow", "initial", c.flow.initial);
    b.bind_real("flow", "profile_factor", c.flow.profile_factor);
    b.bind_real("flow", "amplitude", c.flow.amplitude);
    b.bind_int("flow", "max_mode", c.flow.max_mode);

    b.bind_str("densities", "analytic", c.densities.analytic);
    b.bind_reals("densities", "radii", c.densities.radii);
    b.bind_reals("densities", "center", c.densities.center);
    b.bind_int("densities", "quad_nodes", c.densities.quad_nodes);
    b.bind_int("densities", "time_slices", c.densities.time_slices);
    b.bind_str("densities", "cutoff", c.densities.cutoff);
    b.bind_real("densities", "cutoff_scale", c.densities.cutoff_scale);

    b.bind_real("strata", "epsilon", c.strata.epsilon);
    b.bind_real("strata", "r_min_factor", c.strata.r_min_factor);
    b.bind_real("strata", "r_max_factor", c.strata.r_max_factor);
    b.bind_real("strata", "defect_threshold", c.strata.defect_threshold);
    b.bind_int("strata", "k", c.strata.k);
    b.bind_real("strata", "content_alpha", c.strata.content_alpha);
    b.bind_reals("strata", "content_radii", c.strata.content_radii);

    b.bind_int("gmt", "random_clouds", c.gmt.random_clouds);
    b.bind_int("gmt", "max_points", c.gmt.max_points);
    b.bind_str("gmt", "packing", c.gmt.packing);
    b.bind_int("gmt", "packing_k", c.gmt.packing_k);
    b.bind_real("gmt", "delta", c.gmt.delta);

    b.bind_int("cover", "k", c.cover.k);
    b.bind_real("cover", "rho", c.cover.rho);
    b.bind_real("cover", "gamma", c.cover.gamma);
    b.bind_real("cover", "eta_prime", c.cover.eta_prime);
    b.bind_real("cover", "eta_over_rho", c.cover.eta_over_rho);
    b.bind_real("cover", "R", c.cover.R);
    b.bind_str("cover", "oracle", c.cover.oracle);
    b.bind_int("cover", "samples", c.cover.samples);
    b.bind_real("cover", "root_radius", c.cover.root_radius);

    b.bind_bool("output", "write_fields", c.output.write_fields);

    b.reject_unknown();
    return c;
}

ConfigTable RunConfig::to_table() const {
    ConfigTable t;
    auto iv = [](long long x) {
        ConfigValue v;
        v.data = x;
        return v;
    };
    auto rv = [](double x) {
        ConfigValue v;
        v.data = x;
        return v;
    };
    auto sv = [](const std::string& x) {
        ConfigValue v;
        v.data = x;
        return v;
    };
    auto bv = [](bool x) {
        ConfigValue v;
        v.data = x;
        return v;
    };
    auto av = [&](const std::vector<double>& xs) {
        ConfigValue v;
        ConfigValue::Array arr;
        for (double x : xs) arr.push_back(rv(x));
        v.data = std::move(arr);
        return v;
    };

    t.set("", "seed", iv((long long)seed));
    t.set("grid", "n", iv(grid.n));
    t.set("grid", "d", iv(grid.d));
    t.set("grid", "nodes", iv(grid.nodes));
    t.set("grid", "side", rv(grid.side));
    t.set("flow", "scheme", sv(flow.scheme));
    t.set("flow", "dt_factor", rv(flow.dt_factor));
    t.set("flow", "end_time", rv(flow.end_time));
    t.set("flow", "gl_epsilon", rv(flow.gl_epsilon));
    t.set("flow", "boundary", sv(flow.boundary));
    t.set("flow", "record_every", iv(flow.record_every));
    t.set("flow", "initial", sv(flow.initial));
    t.set("flow", "profile_factor", rv(flow.profile_factor));
    t.set("flow", "amplitude", rv(flow.amplitude));
    t.set("flow", "max_mode", iv(flow.max_mode));
    t.set("densities", "analytic", sv(densities.analytic));
    t.set("densities", "radii", av(densities.radii));
    t.set("densities", "center", av(densities.center));
    t.set("densities", "quad_nodes", iv(densities.quad_nodes));
    t.set("densities", "time_slices", iv(densities.time_slices));
    t.set("densities", "cutoff", sv(densities.cutoff));
    t.set("densities", "cutoff_scale", rv(densities.cutoff_scale));
    t.set("strata", "epsilon", rv(strata.epsilon));
    t.set("strata", "r_min_factor", rv(strata.r_min_factor));
    t.set("strata", "r_max_factor", rv(strata.r_max_factor));
    t.set("strata", "defect_threshold", rv(strata.defect_threshold));
    t.set("strata", "k", iv(strata.k));
    t.set("strata", "content_alpha", rv(strata.content_alpha));
    t.set("strata", "content_radii", av(strata.content_radii));
    t.set("gmt", "random_clouds", iv(gmt.random_clouds));
    t.set("gmt", "max_points", iv(gmt.max_points));
    t.set("gmt", "packing", sv(gmt.packing));
    t.set("gmt", "packing_k", iv(gmt.packing_k));
    t.set("gmt", "delta", rv(gmt.delta));
    t.set("cover", "k", iv(cover.k));
    t.set("cover", "rho", rv(cover.rho));
    t.set("cover", "gamma", rv(cover.gamma));
    t.set("cover", "eta_prime", rv(cover.eta_prime));
    t.set("cover", "eta_over_rho", rv(cover.eta_over_rho));
    t.set("cover", "R", rv(cover.R));
    t.set("cover", "oracle", sv(cover.oracle));
    t.set("cover", "samples", iv(cover.samples));
    t.set("cover", "root_radius", rv(cover.root_radius));
    t.set("output", "write_fields", bv(output.write_fields));
    return t;
}

} // namespace hmf
