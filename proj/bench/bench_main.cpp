// Micro-benchmark comparing the serial reference kernels against the
// OpenMP-parallel ones, with a cross-check of the results.
//
//   hmflow_bench [--smoke]
//
// --smoke shrinks the problem sizes so the binary can run in CI.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

#include "hmf/analytic.hpp"
#include "hmf/densities.hpp"
#include "hmf/flow.hpp"
#include "hmf/geometry.hpp"
#include "hmf/par.hpp"
#include "hmf/strata.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

using namespace hmf;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(
               clock::now().time_since_epoch())
        .count();
}

template <typename F>
double timed(F&& fn, int reps) {
    const double t0 = now_ms();
    for (int i = 0; i < reps; ++i) fn();
    return (now_ms() - t0) / reps;
}

void report(const char* name, double serial_ms, double parallel_ms,
            double diff) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx   max|diff| %.3e\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

} // namespace

int main(int argc, char** argv) {
    bool smoke = false;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--smoke") == 0) smoke = true;

    const std::size_t N = smoke ? 24 : 64;
    const int reps = smoke ? 1 : 3;

#if defined(_OPENMP)
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled; parallel path falls back to serial\n");
#endif
    std::printf("grid %zu^3\n\n", N);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel",
                "speedup");

    const Grid grid = Grid::centered_cube(3, 2.0, N);
    const HedgehogField hh(3);
    const FieldSnapshot snap = sample_analytic(hh, grid, 0.0);

    // flow step
    {
        FlowConfig fc;
        fc.dt = grid.spacing() * grid.spacing() / 12.0 * 0.5;
        fc.end_time = fc.dt;
        FieldSnapshot out_s, out_p;
        par::set_default_exec(par::Exec::serial);
        const double ts = timed([&] { out_s = flow_step(snap, fc); }, reps);
        par::set_default_exec(par::Exec::parallel);
        const double tp = timed([&] { out_p = flow_step(snap, fc); }, reps);
        double diff = 0.0;
        for (std::size_t i = 0; i < out_s.values().size(); ++i)
            diff = std::max(diff,
                            std::abs(out_s.values()[i] - out_p.values()[i]));
        report("flow_step (projected)", ts, tp, diff);
    }

    // ball energy sums (the E_- detection kernel)
    {
        SpaceTimeField traj = static_trajectory(hh, grid, -1.0, 0.0);
        DetectionParams p;
        p.r_min = grid.spacing();
        p.r_max = 4.0 * grid.spacing();
        p.epsilon = 3.18;
        std::size_t flags_s = 0, flags_p = 0;
        par::set_default_exec(par::Exec::serial);
        const double ts = timed(
            [&] { flags_s = extract_singular_slice(traj, 0.0, p).nodes.size(); },
            reps);
        par::set_default_exec(par::Exec::parallel);
        const double tp = timed(
            [&] { flags_p = extract_singular_slice(traj, 0.0, p).nodes.size(); },
            reps);
        report("singular detection", ts, tp,
               double(flags_s > flags_p ? flags_s - flags_p
                                        : flags_p - flags_s));
    }

    // kernel-weighted density quadrature
    {
        const SpaceTimePoint X0(SpacePoint::zero(3), 0.0);
        AnalyticQuadrature q;
        q.nodes_per_axis = N;
        q.time_slices = smoke ? 5 : 17;
        double phi_s = 0.0, phi_p = 0.0;
        par::set_default_exec(par::Exec::serial);
        const double ts =
            timed([&] { phi_s = density_Phi(hh, X0, 0.1, q); }, reps);
        par::set_default_exec(par::Exec::parallel);
        const double tp =
            timed([&] { phi_p = density_Phi(hh, X0, 0.1, q); }, reps);
        report("density quadrature", ts, tp, std::abs(phi_s - phi_p));
    }

    // box-counting content
    {
        std::vector<SpacePoint> S;
        for (int i = 0; i < 40; ++i)
            S.push_back(SpacePoint{-0.5 + double(i) / 39.0, 0.0, 0.0});
        double c_s = 0.0, c_p = 0.0;
        par::set_default_exec(par::Exec::serial);
        const double ts = timed(
            [&] { c_s = minkowski_content(S, 1.0, 0.05, 6).content; }, reps);
        par::set_default_exec(par::Exec::parallel);
        const double tp = timed(
            [&] { c_p = minkowski_content(S, 1.0, 0.05, 6).content; }, reps);
        report("minkowski counting", ts, tp, std::abs(c_s - c_p));
    }

    par::set_default_exec(par::Exec::parallel);
    return 0;
}
