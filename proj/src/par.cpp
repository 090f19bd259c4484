#include "hmf/par.hpp"

#include <atomic>
#include <limits>
#include <string>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hmf::par {

namespace {
std::atomic<Exec> g_exec{Exec::parallel};
// Fixed block size: block partials are summed in index order, so results are
// identical for any thread count.
constexpr std::size_t kBlock = 4096;
} // namespace

Exec default_exec() { return g_exec.load(std::memory_order_relaxed); }
void set_default_exec(Exec e) { g_exec.store(e, std::memory_order_relaxed); }

void for_each(std::size_t n, const std::function<void(std::size_t)>& fn,
              Exec exec) {
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
        fn(static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) fn(i);
#endif
}

double reduce_sum(std::size_t n, const std::function<double(std::size_t)>& fn,
                  Exec exec) {
    if (exec == Exec::serial) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += fn(i);
        return s;
    }
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += fn(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double reduce_max(std::size_t n, const std::function<double(std::size_t)>& fn,
                  Exec exec) {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    if (exec == Exec::serial) {
        double m = neg_inf;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = fn(i);
            if (v > m) m = v;
        }
        return m;
    }
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, neg_inf);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = lo + kBlock < n ? lo + kBlock : n;
        double m = neg_inf;
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = fn(i);
            if (v > m) m = v;
        }
        partial[static_cast<std::size_t>(b)] = m;
    }
    double total = neg_inf;
    for (double p : partial)
        if (p > total) total = p;
    return total;
}

std::uint64_t hash_str(const std::string& s) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace hmf::par
