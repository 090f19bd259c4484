#include "hmf/field_io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace hmf {

namespace {

static_assert(std::endian::native == std::endian::little,
              "field container assumes a little-endian host");

void put_u64(std::ofstream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
}
void put_f64(std::ofstream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint64_t get_u64(std::ifstream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
double get_f64(std::ifstream& is) {
    double v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

} // namespace

void write_snapshot(const FieldSnapshot& snap, const std::string& path) {
    const Grid& g = snap.grid();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw error("write_snapshot: cannot open " + path);
    os.write("STRF", 4);
    put_u64(os, kFieldFormatVersion);
    put_u64(os, std::uint64_t(g.dim()));
    put_u64(os, std::uint64_t(snap.target_dim()));
    for (int a = 0; a < g.dim(); ++a) put_u64(os, g.count(a));
    put_f64(os, g.spacing());
    for (int a = 0; a < g.dim(); ++a) put_f64(os, g.origin(a));
    put_f64(os, snap.time());
    const auto& vals = snap.values();
    os.write(reinterpret_cast<const char*>(vals.data()),
             std::streamsize(vals.size() * sizeof(double)));
    if (!os) throw error("write_snapshot: write failed for " + path);

    nlohmann::json sidecar;
    sidecar["magic"] = "STRF";
    sidecar["version"] = kFieldFormatVersion;
    sidecar["n"] = g.dim();
    sidecar["d"] = snap.target_dim();
    std::vector<std::uint64_t> counts;
    std::vector<double> origin;
    for (int a = 0; a < g.dim(); ++a) {
        counts.push_back(g.count(a));
        origin.push_back(g.origin(a));
    }
    sidecar["counts"] = counts;
    sidecar["spacing"] = g.spacing();
    sidecar["origin"] = origin;
    sidecar["time"] = snap.time();
    std::ofstream js(path + ".json");
    js << sidecar.dump(2) << "\n";
}

FieldSnapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw error("read_snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::memcmp(magic, "STRF", 4) != 0)
        throw structural_error("read_snapshot: bad magic in " + path);
    const std::uint64_t version = get_u64(is);
    if (version != kFieldFormatVersion)
        throw structural_error("read_snapshot: unsupported version in " + path);
    const int n = int(get_u64(is));
    const int d = int(get_u64(is));
    if (n < 1 || n > kMaxDim || d < 1 || d > kMaxTarget)
        throw structural_error("read_snapshot: bad dimensions in " + path);
    std::array<std::size_t, kMaxDim> counts{};
    for (int a = 0; a < n; ++a) counts[a] = std::size_t(get_u64(is));
    const double spacing = get_f64(is);
    std::array<double, kMaxDim> origin{};
    for (int a = 0; a < n; ++a) origin[a] = get_f64(is);
    const double time = get_f64(is);
    Grid grid(n, origin, counts, spacing);
    FieldSnapshot snap(grid, d, time);
    auto& vals = snap.mutable_values();
    is.read(reinterpret_cast<char*>(vals.data()),
            std::streamsize(vals.size() * sizeof(double)));
    if (!is) throw structural_error("read_snapshot: truncated payload in " + path);
    return snap;
}

void write_trajectory(const SpaceTimeField& traj, const std::string& dir,
                      const std::string& stem) {
    std::filesystem::create_directories(dir);
    nlohmann::json index;
    index["format"] = "STRF";
    index["count"] = traj.size();
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const std::string name = stem + "_" + std::to_string(i) + ".strf";
        write_snapshot(traj.at(i), dir + "/" + name);
        entries.push_back({{"file", name}, {"time", traj.at(i).time()}});
    }
    index["snapshots"] = entries;
    std::ofstream os(dir + "/" + stem + "_index.json");
    os << index.dump(2) << "\n";
}

SpaceTimeField read_trajectory(const std::string& index_path) {
    std::ifstream is(index_path);
    if (!is) throw dependency_error("read_trajectory: missing index " + index_path);
    nlohmann::json index;
    is >> index;
    const std::string dir =
        std::filesystem::path(index_path).parent_path().string();
    SpaceTimeField traj;
    for (const auto& e : index.at("snapshots")) {
        const std::string file = e.at("file").get<std::string>();
        traj.append(read_snapshot(dir.empty() ? file : dir + "/" + file));
    }
    return traj;
}

} // namespace hmf
