#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hmf/analytic.hpp"
#include "hmf/flow.hpp"
#include "hmf/strata.hpp"

using namespace hmf;

namespace {

const double kPi = std::acos(-1.0);

SpaceTimeField constant_traj(const Grid& g, int d) {
    SpaceTimeField traj;
    for (int i = 0; i < 2; ++i) {
        FieldSnapshot f(g, d, -1.0 + double(i));
        for (std::size_t q = 0; q < g.node_count(); ++q) f.set_value(q, 0, 1.0);
        f.set_dudt(std::vector<double>(g.node_count() * d, 0.0));
        traj.append(std::move(f));
    }
    return traj;
}

double axis_distance(const SpacePoint& x) {
    return std::sqrt(x[1] * x[1] + x[2] * x[2]);
}

} // namespace

TEST_CASE("detection params ladder") {
    DetectionParams p;
    p.r_min = 0.01;
    p.r_max = 0.08;
    const auto ladder = p.ladder();
    REQUIRE(ladder.size() == 4);
    CHECK(ladder[0] == doctest::Approx(0.01));
    CHECK(ladder[3] == doctest::Approx(0.08));
    p.r_max = 0.01;
    CHECK_THROWS_AS(p.validate(), domain_error);
}

TEST_CASE("regularity scale") {
    const Grid g = Grid::centered_cube(3, 2.0, 48);
    DetectionParams p;
    p.r_min = 0.01;
    p.r_max = 0.64;

    SUBCASE("constant field saturates the ladder cap") {
        SpaceTimeField traj = constant_traj(g, 3);
        const double r =
            regularity_scale(traj, SpaceTimePoint(SpacePoint::zero(3), -0.3), p);
        CHECK(r == doctest::Approx(0.64));
    }

    SUBCASE("hedgehog: analytic gradient fixes the scale window") {
        const HedgehogField hh(3);
        SpaceTimeField traj = static_trajectory(hh, g, -1.0, 0.0);
        // sup_{P_r} r |grad u| = r sqrt(2)/(|x| - r) <= 1 at |x| = 0.1
        const double r = regularity_scale(
            traj, SpaceTimePoint(SpacePoint{0.1, 0.0, 0.0}, -0.5), p);
        CHECK(r >= 0.05 / std::sqrt(2.0));
        CHECK(r <= 0.2 / std::sqrt(2.0));
    }

    SUBCASE("a blow-up-like time derivative gives scale zero") {
        SpaceTimeField traj;
        for (int i = 0; i < 2; ++i) {
            FieldSnapshot f(g, 3, double(i));
            for (std::size_t q = 0; q < g.node_count(); ++q)
                f.set_value(q, 0, 1.0);
            f.set_dudt(std::vector<double>(g.node_count() * 3, 1e7));
            traj.append(std::move(f));
        }
        CHECK(regularity_scale(traj, SpaceTimePoint(SpacePoint::zero(3), 0.5), p) ==
              0.0);
    }

    SUBCASE("out of box is a coverage error") {
        SpaceTimeField traj = constant_traj(g, 3);
        CHECK_THROWS_AS(
            regularity_scale(traj, SpaceTimePoint(SpacePoint{9.0, 0.0, 0.0}, 0.0), p),
            coverage_error);
    }
}

TEST_CASE("singular slice extraction on the analytic fields") {
    const Grid g = Grid::centered_cube(3, 2.0, 48);
    const double h = g.spacing();
    DetectionParams p;
    p.r_min = h;
    p.r_max = 4.0 * h;

    SUBCASE("smooth small-energy field: empty") {
        InitialParams ip;
        ip.seed = 3;
        ip.amplitude = 0.05;
        const FieldSnapshot f =
            make_initial_data(InitialKind::random_smooth, g, ip);
        SpaceTimeField traj;
        FieldSnapshot a = f;
        a.set_time(-1.0);
        a.set_dudt(std::vector<double>(g.node_count() * 3, 0.0));
        FieldSnapshot b = a;
        b.set_time(0.0);
        traj.append(std::move(a));
        traj.append(std::move(b));
        const StratumSample s = extract_singular_slice(traj, 0.0, p);
        CHECK(s.points.empty());
    }

    SUBCASE("hedgehog: flagged nodes within one cell of the origin") {
        const HedgehogField hh(3);
        SpaceTimeField traj = static_trajectory(hh, g, -1.0, 0.0);
        const StratumSample s = extract_singular_slice(traj, 0.0, p);
        REQUIRE(!s.points.empty());
        for (const auto& x : s.points) CHECK(x.norm() <= 1.1 * h);
        // the nearest ring is flagged
        CHECK(s.points.size() >= 8);
    }

    SUBCASE("line-singular: flagged nodes within one cell of the axis") {
        const LineSingularField line;
        SpaceTimeField traj = static_trajectory(line, g, -1.0, 0.0);
        const StratumSample s = extract_singular_slice(traj, 0.0, p);
        REQUIRE(!s.points.empty());
        for (const auto& x : s.points) CHECK(axis_distance(x) <= 1.1 * h);
        // most of the axis length is covered (box ends lose ball coverage)
        CHECK(s.points.size() >= std::size_t(0.5 * 4.0 * 48));
    }

    SUBCASE("ladder refinement stability") {
        const HedgehogField hh(3);
        SpaceTimeField traj = static_trajectory(hh, g, -1.0, 0.0);
        const StratumSample coarse = extract_singular_slice(traj, 0.0, p);
        DetectionParams p2 = p;
        p2.r_min = 0.5 * h;
        const StratumSample fine = extract_singular_slice(traj, 0.0, p2);
        // extra ladder radii only intersect further: fine set inside coarse
        for (const auto& x : fine.points) {
            double dmin = 1e300;
            for (const auto& y : coarse.points) dmin = std::min(dmin, dist(x, y));
            CHECK(dmin == 0.0);
        }
        // the symmetric difference stays within one cell of the previous
        // boundary (the coarse flagged set is a one-cell shell, so every
        // dropped node is itself a boundary node)
        for (const auto& y : coarse.points) {
            bool in_fine = false;
            for (const auto& x : fine.points)
                if (dist(x, y) == 0.0) in_fine = true;
            if (in_fine) continue;
            double dmin = 1e300;
            for (const auto& b : coarse.points)
                dmin = std::min(dmin, dist(b, y));
            CHECK(dmin <= std::sqrt(3.0) * h * 1.01);
        }
    }
}

TEST_CASE("quantitative stratum via the directional-energy defect") {
    const Grid g = Grid::centered_cube(3, 1.0, 32);
    const double h = g.spacing();
    DetectionParams p;
    p.r_min = h;
    p.r_max = 4.0 * h;

    SUBCASE("constant field: empty for every k") {
        SpaceTimeField traj = constant_traj(g, 3);
        for (int k = 0; k < 3; ++k)
            CHECK(quantitative_stratum(traj, 0.0, k, p).points.empty());
    }

    SUBCASE("line-singular: k = 1 flags the axis tube, k = 0 flags nothing") {
        const LineSingularField line;
        SpaceTimeField traj = static_trajectory(line, g, -1.0, 0.0);

        const StratumSample k1 = quantitative_stratum(traj, 0.0, 1, p);
        REQUIRE(!k1.points.empty());
        for (const auto& x : k1.points) CHECK(axis_distance(x) <= 3.0 * h);
        // axis-adjacent nodes are flagged along the tube
        CHECK(k1.points.size() >= std::size_t(0.5 * 4.0 * 32));

        const StratumSample k0 = quantitative_stratum(traj, 0.0, 0, p);
        // the field is exactly 1-symmetric along the axis
        CHECK(k0.points.empty());
    }

    SUBCASE("hedgehog: k = 0 flags only the origin neighborhood") {
        const HedgehogField hh(3);
        SpaceTimeField traj = static_trajectory(hh, g, -1.0, 0.0);
        const StratumSample k0 = quantitative_stratum(traj, 0.0, 0, p);
        REQUIRE(!k0.points.empty());
        for (const auto& x : k0.points) CHECK(x.norm() <= 3.0 * h);
        CHECK(k0.points.size() >= 8);
    }

    SUBCASE("nesting in k and in the threshold") {
        const HedgehogField hh(3);
        SpaceTimeField traj = static_trajectory(hh, g, -1.0, 0.0);
        const StratumSample k0 = quantitative_stratum(traj, 0.0, 0, p);
        const StratumSample k1 = quantitative_stratum(traj, 0.0, 1, p);
        // flagged(k) grows with k at a fixed threshold
        for (const auto& x : k0.points) {
            double dmin = 1e300;
            for (const auto& y : k1.points) dmin = std::min(dmin, dist(x, y));
            CHECK(dmin == 0.0);
        }
        DetectionParams strict = p;
        strict.defect_thresholds.assign(3, 0.3);
        const StratumSample k0s = quantitative_stratum(traj, 0.0, 0, strict);
        for (const auto& x : k0s.points) {
            double dmin = 1e300;
            for (const auto& y : k0.points) dmin = std::min(dmin, dist(x, y));
            CHECK(dmin == 0.0);
        }
        CHECK_THROWS_AS(quantitative_stratum(traj, 0.0, 3, p), domain_error);
    }
}

TEST_CASE("minkowski content") {
    SUBCASE("single point, alpha = 0") {
        const std::vector<SpacePoint> S{SpacePoint{0.0, 0.0, 0.0}};
        for (double r : {0.05, 0.2}) {
            const ContentReport rep = minkowski_content(S, 0.0, r);
            CHECK(rep.content == doctest::Approx(kPi / 6.0).epsilon(0.05));
        }
    }

    SUBCASE("unit segment, alpha = 1") {
        std::vector<SpacePoint> S;
        for (int i = 0; i <= 200; ++i)
            S.push_back(SpacePoint{double(i) / 200.0, 0.0, 0.0});
        const double r = 0.02;
        const ContentReport rep = minkowski_content(S, 1.0, r);
        const double exact =
            std::pow(2.0 * r, -2.0) *
            (kPi * r * r * 1.0 + 4.0 / 3.0 * kPi * r * r * r);
        CHECK(rep.content == doctest::Approx(exact).epsilon(0.05));
        CHECK(rep.content == doctest::Approx(kPi / 4.0).epsilon(0.08));
    }

    SUBCASE("full cube sample, alpha = n") {
        std::vector<SpacePoint> S;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                for (int k = 0; k < 8; ++k)
                    S.push_back(SpacePoint{i / 7.0, j / 7.0, k / 7.0});
        const double r = 0.1;
        const ContentReport rep = minkowski_content(S, 3.0, r);
        CHECK(rep.content == doctest::Approx(1.0).epsilon(3.0 * r));
    }

    SUBCASE("parabolic flavor: single space-time point") {
        const std::vector<SpaceTimePoint> S{
            SpaceTimePoint(SpacePoint{0.0, 0.0, 0.0}, 0.0)};
        const double r = 0.1;
        const ContentReport rep = minkowski_content(S, 0.0, r);
        // Vol(P_r) = (4/3) pi r^3 * 2 r^2; content = (2r)^{-5} * that = pi/12
        CHECK(rep.content == doctest::Approx(kPi / 12.0).epsilon(0.05));
        CHECK(rep.flavor == ContentFlavor::parabolic);
    }

    SUBCASE("empty set is an error") {
        CHECK_THROWS_AS(minkowski_content(std::vector<SpacePoint>{}, 0.0, 0.1),
                        domain_error);
    }
}

TEST_CASE("weak Lorentz norm") {
    const Grid g = Grid::centered_cube(3, 2.0, 96);
    const SpatialBall ball{SpacePoint::zero(3), 1.0};

    SUBCASE("zero field") {
        std::vector<double> zero(g.node_count(), 0.0);
        CHECK(weak_lorentz_norm(g, zero, ball, 3.0) == 0.0);
    }

    SUBCASE("hedgehog gradient: sqrt(2) (4 pi/3)^{1/3}") {
        std::vector<double> vals(g.node_count());
        for (std::size_t i = 0; i < g.node_count(); ++i)
            vals[i] = std::sqrt(2.0) / g.node(i).norm();
        const double want = std::sqrt(2.0) * std::pow(4.0 * kPi / 3.0, 1.0 / 3.0);
        CHECK(weak_lorentz_norm(g, vals, ball, 3.0) ==
              doctest::Approx(want).epsilon(0.04)); // ~2.279
    }

    SUBCASE("indicator of the half ball") {
        std::vector<double> vals(g.node_count(), 0.0);
        for (std::size_t i = 0; i < g.node_count(); ++i)
            if (g.node(i).norm() < 0.5) vals[i] = 1.0;
        CHECK(weak_lorentz_norm(g, vals, ball, 3.0) ==
              doctest::Approx(std::pow(kPi / 6.0, 1.0 / 3.0)).epsilon(0.01));
    }

    SUBCASE("homogeneity in the field") {
        std::vector<double> vals(g.node_count());
        for (std::size_t i = 0; i < g.node_count(); ++i)
            vals[i] = std::abs(g.node(i)[0]) + 0.3;
        const double base = weak_lorentz_norm(g, vals, ball, 3.0);
        for (auto& v : vals) v *= 2.5;
        CHECK(weak_lorentz_norm(g, vals, ball, 3.0) ==
              doctest::Approx(2.5 * base).epsilon(1e-12));
    }

    SUBCASE("empty ball is an error") {
        std::vector<double> vals(g.node_count(), 1.0);
        CHECK_THROWS_AS(
            weak_lorentz_norm(g, vals, {SpacePoint{5.0, 5.0, 5.0}, 0.01}, 3.0),
            domain_error);
    }
}
