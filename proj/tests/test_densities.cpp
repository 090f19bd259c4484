#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmf/analytic.hpp"
#include "hmf/densities.hpp"
#include "hmf/par.hpp"

using namespace hmf;

namespace {

const double kPi = std::acos(-1.0);

struct ConstantField : AnalyticField {
    int dim() const override { return 3; }
    int target_dim() const override { return 3; }
    std::vector<double> value(const SpacePoint&) const override {
        return {1.0, 0.0, 0.0};
    }
    double energy_density(const SpacePoint&) const override { return 0.0; }
};

} // namespace

TEST_CASE("backward heat kernel") {
    // normalization point: t0 - t = 1/(4 pi) gives G = 1 at x = x0
    const SpaceTimePoint X0({0.0, 0.0}, 0.0);
    const SpaceTimePoint X({0.0, 0.0}, -1.0 / (4.0 * kPi));
    CHECK(backward_heat_kernel(X0, X) == doctest::Approx(1.0));

    // n = 1 point value
    const SpaceTimePoint Y0({0.0}, 1.0);
    const SpaceTimePoint Y({2.0}, 0.0);
    CHECK(backward_heat_kernel(Y0, Y) ==
          doctest::Approx(std::exp(-1.0) / std::sqrt(4.0 * kPi))
              .epsilon(1e-12)); // ~0.10378

    CHECK_THROWS_AS(backward_heat_kernel(X0, SpaceTimePoint({0.0, 0.0}, 0.0)),
                    domain_error);
    CHECK_THROWS_AS(backward_heat_kernel(X0, SpaceTimePoint({0.0, 0.0}, 1.0)),
                    domain_error);
}

TEST_CASE("kernel mass: truncated-box quadrature equals 1") {
    // quadrature of G over a box with half-width >= 8 sqrt(tau)
    for (int n : {1, 2, 3}) {
        const double tau = 0.07;
        const double L = 8.0 * std::sqrt(tau);
        const std::size_t N = 200;
        const double h = 2.0 * L / double(N - 1);
        SpaceTimePoint X0(SpacePoint::zero(n), 0.0);
        std::size_t total = 1;
        for (int a = 0; a < n; ++a) total *= N;
        double mass = 0.0;
        for (std::size_t flat = 0; flat < total; ++flat) {
            SpacePoint x = SpacePoint::zero(n);
            std::size_t rem = flat;
            for (int a = 0; a < n; ++a) {
                x[a] = -L + h * double(rem % N);
                rem /= N;
            }
            mass += backward_heat_kernel(X0, SpaceTimePoint(x, -tau)) *
                    std::pow(h, n);
        }
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("cutoff profile bounds") {
    const CutoffProfile phi(SpacePoint::zero(3), 1.0);
    CHECK_NOTHROW(phi.validate());
    CHECK(phi(SpacePoint{0.5, 0.0, 0.0}) == 1.0);
    CHECK(phi(SpacePoint{2.5, 0.0, 0.0}) == 0.0);
    const double mid = phi(SpacePoint{1.5, 0.0, 0.0});
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
    // |grad phi| <= 10 at unit scale (quintic smoothstep peaks at 1.875)
    double max_grad = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        SpacePoint x{2.5 * i / 1000.0, 0.0, 0.0};
        max_grad = std::max(max_grad, phi.grad_norm(x));
    }
    CHECK(max_grad <= 10.0);
    CHECK(max_grad == doctest::Approx(1.875).epsilon(1e-3));
}

TEST_CASE("analytic densities: constant field vanishes") {
    const ConstantField cf;
    const SpaceTimePoint X0(SpacePoint::zero(3), 0.0);
    AnalyticQuadrature q;
    q.nodes_per_axis = 24;
    q.time_slices = 5;
    const DensityReport rep = density_suite(cf, X0, 0.1, q);
    CHECK(rep.E == 0.0);
    CHECK(rep.E_minus == 0.0);
    CHECK(rep.Psi == 0.0);
    CHECK(rep.Phi == 0.0);
}

TEST_CASE("analytic densities of the hedgehog: Psi0, Phi0, E_-") {
    const HedgehogField hh(3);
    const SpaceTimePoint X0(SpacePoint::zero(3), 0.0);
    AnalyticQuadrature q;
    q.nodes_per_axis = 64;
    q.time_slices = 25;

    for (double rho : {0.05, 0.2}) {
        const DensityReport rep = density_suite(hh, X0, rho, q);
        CHECK(rep.Psi == doctest::Approx(0.5).epsilon(0.02));
        CHECK(rep.Phi == doctest::Approx(std::log(2.0)).epsilon(0.02));
        CHECK(rep.E_minus == doctest::Approx(8.0 * kPi).epsilon(0.02));
        CHECK(rep.E == doctest::Approx(16.0 * kPi).epsilon(0.02));
    }
}

TEST_CASE("analytic density gap: exact scale invariance of the quadrature") {
    const HedgehogField hh(3);
    const SpaceTimePoint X0(SpacePoint::zero(3), 0.0);
    AnalyticQuadrature q;
    q.nodes_per_axis = 48;
    q.time_slices = 9;
    CHECK(density_gap_W(hh, X0, 0.1, 0.1, q) == 0.0);
    // the per-slice adaptive box makes the quadrature error scale-free, so
    // the hedgehog gap cancels to rounding
    CHECK(std::abs(density_gap_W(hh, X0, 0.2, 0.05, q)) <= 1e-12);
    CHECK_THROWS_AS(density_gap_W(hh, X0, 0.05, 0.2, q), domain_error);
}

TEST_CASE("discrete densities on a sampled hedgehog") {
    const HedgehogField hh(3);
    const Grid g = Grid::centered_cube(3, 2.0, 64);
    SpaceTimeField traj = static_trajectory(hh, g, -0.5, 0.5);
    const SpaceTimePoint X0(SpacePoint::zero(3), 0.3);

    const DensityReport rep = density_suite(traj, X0, 0.3);
    // central-difference energy plus plain midpoint sums: coarser than the
    // analytic path, but the constants must still be recognizable
    CHECK(rep.Psi == doctest::Approx(0.5).epsilon(0.08));
    CHECK(rep.Phi == doctest::Approx(std::log(2.0)).epsilon(0.08));
    // the central-difference energy misses part of the 1/|x|^2 divergence
    // within a cell of the origin: O(h/rho) deficit
    CHECK(rep.E_minus == doctest::Approx(8.0 * kPi).epsilon(0.15));

    // constant discrete field vanishes
    SpaceTimeField flat;
    for (int i = 0; i < 2; ++i) {
        FieldSnapshot f(g, 3, double(i));
        for (std::size_t q2 = 0; q2 < g.node_count(); ++q2)
            f.set_value(q2, 0, 1.0);
        flat.append(std::move(f));
    }
    const DensityReport zero =
        density_suite(flat, SpaceTimePoint(SpacePoint::zero(3), 0.5), 0.3);
    CHECK(zero.E == 0.0);
    CHECK(zero.Psi == 0.0);

    // coverage errors name the missing interval
    CHECK_THROWS_AS(density_suite(traj, SpaceTimePoint(SpacePoint::zero(3), 0.5), 2.0),
                    coverage_error);
}

TEST_CASE("parabolic rescaling invariance on the re-gridded hedgehog") {
    // T_{0,lambda} maps the hedgehog to itself; rescaling the grid with the
    // radius reproduces the same discrete sums exactly
    const HedgehogField hh(3);
    const Grid g1 = Grid::centered_cube(3, 2.0, 48);
    const Grid g2 = Grid::centered_cube(3, 1.0, 48);
    SpaceTimeField t1 = static_trajectory(hh, g1, -0.5, 0.0);
    SpaceTimeField t2 = static_trajectory(hh, g2, -0.5, 0.0);
    const double psi1 =
        density_Psi(t1, SpaceTimePoint(SpacePoint::zero(3), 0.0), 0.2);
    const double psi2 =
        density_Psi(t2, SpaceTimePoint(SpacePoint::zero(3), 0.0), 0.1);
    CHECK(psi1 == doctest::Approx(psi2).epsilon(1e-10));
    const double phi1 =
        density_Phi(t1, SpaceTimePoint(SpacePoint::zero(3), 0.0), 0.1);
    const double phi2 =
        density_Phi(t2, SpaceTimePoint(SpacePoint::zero(3), 0.0), 0.05);
    CHECK(phi1 == doctest::Approx(phi2).epsilon(1e-10));
}

TEST_CASE("monotonicity audit") {
    SUBCASE("constant field: least C1 is zero") {
        const ConstantField cf;
        AnalyticQuadrature q;
        q.nodes_per_axis = 16;
        q.time_slices = 3;
        const MonotonicityAudit a = monotonicity_audit(
            cf, SpaceTimePoint(SpacePoint::zero(3), 0.0), {0.05, 0.1, 0.2}, q);
        CHECK(a.phi_feasible);
        CHECK(a.psi_feasible);
        CHECK(a.c1_phi == 0.0);
        CHECK(a.c1_psi == 0.0);
    }
    SUBCASE("hedgehog: least C1 is zero within quadrature tolerance") {
        const HedgehogField hh(3);
        AnalyticQuadrature q;
        q.nodes_per_axis = 40;
        q.time_slices = 9;
        const MonotonicityAudit a = monotonicity_audit(
            hh, SpaceTimePoint(SpacePoint::zero(3), 0.0),
            {0.05, 0.1, 0.15, 0.2}, q);
        CHECK(a.phi_feasible);
        CHECK(a.psi_feasible);
        CHECK(a.c1_phi <= 1e-3);
        CHECK(a.c1_psi <= 1e-3);
    }
}

TEST_CASE("directional energy matrix") {
    const Grid g = Grid::centered_cube(3, 2.0, 32);
    const LineSingularField line;
    SpaceTimeField traj = static_trajectory(line, g, -1.0, 0.0);

    SUBCASE("constant field gives the zero matrix") {
        SpaceTimeField flat;
        for (int i = 0; i < 2; ++i) {
            FieldSnapshot f(g, 2, -1.0 + double(i));
            for (std::size_t q = 0; q < g.node_count(); ++q)
                f.set_value(q, 0, 1.0);
            flat.append(std::move(f));
        }
        const auto M =
            directional_energy_matrix(flat, SpacePoint::zero(3), 0.0, 0.2);
        CHECK(M.trace() == doctest::Approx(0.0));
        CHECK(symmetry_defect(M, 2) == doctest::Approx(0.0));
    }

    SUBCASE("x1-invariant field kills the first row and column") {
        const SpacePoint x0{0.1, 0.0, 0.0}; // on the singular axis
        const auto M = directional_energy_matrix(traj, x0, 0.0, 0.15);
        M.check_symmetric_psd();
        const double scale = M.trace();
        CHECK(std::abs(M.m[0][0]) <= 1e-8 * scale);
        CHECK(std::abs(M.m[0][1]) <= 1e-8 * scale);
        CHECK(std::abs(M.m[0][2]) <= 1e-8 * scale);

        // eigenstructure (0, lambda, lambda) by symmetry, against a direct
        // directional-quadrature oracle
        const auto ev = M.eigenvalues();
        CHECK(ev[0] <= 1e-8 * scale);
        CHECK(ev[1] == doctest::Approx(ev[2]).epsilon(0.05));
        CHECK(ev[1] > 0.0);

        // v' M v equals the direct quadrature of |v . grad u|^2
        par::Rng rng(3);
        const FieldSnapshot& snap = traj.at(0);
        snap.energy_density_array();
        for (int trial = 0; trial < 10; ++trial) {
            SpacePoint v{rng.uniform(-1, 1), rng.uniform(-1, 1),
                         rng.uniform(-1, 1)};
            v = v * (1.0 / v.norm());
            double direct = 0.0;
            const double r = 0.15;
            ball_window_visit(g, x0, r, [&](std::size_t node) {
                for (int c = 0; c < 2; ++c) {
                    double dv = 0.0;
                    for (int a = 0; a < 3; ++a)
                        dv += v[a] * snap.gradient(node, a, c);
                    direct += dv * dv;
                }
            });
            direct *= std::pow(g.spacing(), 3) * 3.0 * r * r; // band length
            direct *= std::pow(r, -3);
            double quad = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) quad += v[a] * M.m[a][b] * v[b];
            CHECK(quad == doctest::Approx(direct).epsilon(1e-9));
        }
    }

    SUBCASE("rotation equivariance under an axis permutation") {
        // permute axes of the sampled data: invariance moves to x3
        const Grid gc = Grid::centered_cube(3, 2.0, 32);
        FieldSnapshot perm(gc, 2, -1.0);
        const FieldSnapshot& src = traj.at(0);
        auto& vals = perm.mutable_values();
        for (std::size_t node = 0; node < gc.node_count(); ++node) {
            auto idx = gc.multi_index(node);
            std::array<std::size_t, kMaxDim> sidx{idx[2], idx[0], idx[1], 0};
            const std::size_t s = gc.flat_index(sidx);
            vals[node * 2 + 0] = src.value(s, 0);
            vals[node * 2 + 1] = src.value(s, 1);
        }
        SpaceTimeField ptraj;
        ptraj.append(perm);
        FieldSnapshot perm2 = perm;
        perm2.set_time(0.0);
        ptraj.append(std::move(perm2));

        const SpacePoint x0{0.1, 0.0, 0.0};
        const SpacePoint px0{0.0, 0.0, 0.1};
        const auto M = directional_energy_matrix(traj, x0, 0.0, 0.15);
        const auto Mp = directional_energy_matrix(ptraj, px0, 0.0, 0.15);
        // Q maps axis 1->2, 2->3, 3->1; M' = Q M Q^T permutes entries
        const int p[3] = {1, 2, 0}; // column j of M' = row p[j] of M
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(Mp.m[i][j] ==
                      doctest::Approx(M.m[p[i]][p[j]]).epsilon(1e-9));
        for (int k = 0; k < 3; ++k)
            CHECK(symmetry_defect(Mp, k) ==
                  doctest::Approx(symmetry_defect(M, k)).epsilon(1e-9));
    }
}

TEST_CASE("symmetry defect: spectral value vs subspace search") {
    DirectionalEnergyMatrix M;
    M.n = 3;
    M.m[0][0] = 0.0;
    M.m[1][1] = 2.0;
    M.m[2][2] = 3.0;

    SUBCASE("zero matrix") {
        DirectionalEnergyMatrix Z;
        Z.n = 3;
        for (int k = 0; k < 3; ++k) CHECK(symmetry_defect(Z, k) == 0.0);
    }

    CHECK(symmetry_defect(M, 0) == doctest::Approx(0.0));
    CHECK(symmetry_defect(M, 1) == doctest::Approx(2.0));
    CHECK(symmetry_defect(M, 2) == doctest::Approx(5.0));
    CHECK_THROWS_AS(symmetry_defect(M, 3), domain_error);
    CHECK_THROWS_AS(symmetry_defect(M, -1), domain_error);

    // brute force over a fine grid of subspaces
    auto dir = [&](double th, double ph) {
        return SpacePoint{std::sin(th) * std::cos(ph),
                          std::sin(th) * std::sin(ph), std::cos(th)};
    };
    auto quad = [&](const SpacePoint& v) {
        double s = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) s += v[a] * M.m[a][b] * v[b];
        return s;
    };
    const int K = 400;
    double min1 = 1e300, max1 = -1e300;
    for (int i = 0; i <= K; ++i)
        for (int j = 0; j <= K; ++j) {
            const double v = quad(dir(kPi * i / K, kPi * j / K));
            min1 = std::min(min1, v);
            max1 = std::max(max1, v);
        }
    CHECK(symmetry_defect(M, 0) == doctest::Approx(min1).epsilon(1e-6));
    // inf over 2D subspaces = trace - sup over unit normals
    const double trace = M.m[0][0] + M.m[1][1] + M.m[2][2];
    CHECK(symmetry_defect(M, 1) == doctest::Approx(trace - max1).epsilon(1e-6));
    CHECK(symmetry_defect(M, 2) == doctest::Approx(trace));

    // nondecreasing in k, equal to the trace at k = n-1
    CHECK(symmetry_defect(M, 0) <= symmetry_defect(M, 1));
    CHECK(symmetry_defect(M, 1) <= symmetry_defect(M, 2));
}

TEST_CASE("discrete monotonicity across radius pairs on a smooth flow") {
    // Phi(R) >= Phi(r) - C1 (R - r) for the fitted C1 across all pairs
    const Grid g = Grid::centered_cube(3, 2.0, 24);
    const HedgehogField hh(3);
    SpaceTimeField traj = static_trajectory(hh, g, -0.3, 0.1);
    const SpaceTimePoint X0(SpacePoint::zero(3), 0.1);
    const std::vector<double> radii{0.05, 0.07, 0.1, 0.14, 0.2};
    const MonotonicityAudit a = monotonicity_audit(traj, X0, radii);
    REQUIRE(a.phi_feasible);
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        CHECK(a.phi_values[i + 1] >=
              a.phi_values[i] - a.c1_phi * (radii[i + 1] - radii[i]) - 1e-12);
}
