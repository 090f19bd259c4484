#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hmf::par {

enum class Exec { serial, parallel };

// Process-wide default used by kernels that do not take an explicit policy.
Exec default_exec();
void set_default_exec(Exec e);

// Elementwise parallel loop. Deterministic for any thread count (no
// reductions involved).
void for_each(std::size_t n, const std::function<void(std::size_t)>& fn,
              Exec exec);
inline void for_each(std::size_t n, const std::function<void(std::size_t)>& fn) {
    for_each(n, fn, default_exec());
}

// Sum of fn(i) for i in [0,n). The parallel path accumulates per fixed-size
// block and then sums the block partials in index order, so the result does
// not depend on the thread count. The serial path is a plain left-to-right
// accumulation and serves as the reference implementation.
double reduce_sum(std::size_t n, const std::function<double(std::size_t)>& fn,
                  Exec exec);
inline double reduce_sum(std::size_t n,
                         const std::function<double(std::size_t)>& fn) {
    return reduce_sum(n, fn, default_exec());
}

// Max of fn(i) for i in [0,n); -inf for n == 0.
double reduce_max(std::size_t n, const std::function<double(std::size_t)>& fn,
                  Exec exec);
inline double reduce_max(std::size_t n,
                         const std::function<double(std::size_t)>& fn) {
    return reduce_max(n, fn, default_exec());
}

// splitmix64: the seed stream for everything random in the toolkit.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double u01() { return (next_u64() >> 11) * 0x1.0p-53; }
    // uniform in [a,b)
    double uniform(double a, double b) { return a + (b - a) * u01(); }
    // derive an independent stream for a named stage
    Rng split(std::uint64_t tag) const {
        Rng r(state ^ (tag * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull));
        r.next_u64();
        return r;
    }
};

std::uint64_t hash_str(const std::string& s);

} // namespace hmf::par
