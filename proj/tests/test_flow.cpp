#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmf/analytic.hpp"
#include "hmf/flow.hpp"
#include "hmf/par.hpp"

using namespace hmf;

namespace {

FlowConfig projected_cfg(const Grid& g, double dt_factor = 0.5) {
    FlowConfig cfg;
    cfg.scheme = Scheme::projected_explicit;
    const double h = g.spacing();
    cfg.dt = dt_factor * h * h / (4.0 * g.dim());
    cfg.end_time = cfg.dt;
    return cfg;
}

double max_change(const FieldSnapshot& a, const FieldSnapshot& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

double max_grad_norm(const FieldSnapshot& f) {
    const auto& e = f.energy_density_array();
    double m = 0.0;
    for (double v : e) m = std::max(m, v);
    return std::sqrt(m);
}

} // namespace

TEST_CASE("second fundamental term, sphere specialization") {
    // zero gradient
    auto v = second_fundamental_term({1.0, 0.0, 0.0},
                                     std::vector<double>(9, 0.0), 3, 3);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);

    // |grad u|^2 = 1
    std::vector<double> g1(9, 0.0);
    g1[3] = 0.0; g1[4] = 1.0; g1[5] = 0.0; // row 2 = (0,1,0)
    v = second_fundamental_term({1.0, 0.0, 0.0}, g1, 3, 3);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(0.0));
    CHECK(v[2] == doctest::Approx(0.0));

    // |grad u|^2 = 2
    std::vector<double> g2(9, 0.0);
    g2[1] = 1.0; // row 1 = (0,1,0)
    g2[3] = 1.0; // row 2 = (1,0,0)
    v = second_fundamental_term({0.0, 0.0, 1.0}, g2, 3, 3);
    CHECK(v[0] == doctest::Approx(0.0));
    CHECK(v[2] == doctest::Approx(2.0));

    CHECK_THROWS_AS(
        second_fundamental_term({1.1, 0.0, 0.0}, std::vector<double>(9, 0.0), 3, 3),
        structural_error);
}

TEST_CASE("flow_step: constant unit field is stationary") {
    const Grid g = Grid::centered_cube(2, 2.0, 8);
    FieldSnapshot f(g, 3, 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) f.set_value(i, 1, 1.0);

    for (auto scheme : {Scheme::projected_explicit, Scheme::ginzburg_landau}) {
        FlowConfig cfg = projected_cfg(g);
        cfg.scheme = scheme;
        cfg.gl_epsilon = 0.1;
        const FieldSnapshot out = flow_step(f, cfg);
        CHECK(max_change(f, out) == doctest::Approx(0.0));
    }
}

TEST_CASE("flow_step: hedgehog on a shell grid is static to O(dt h^2)") {
    // x/|x| solves the flow exactly; the discrete residual is O(h^2)
    const HedgehogField hh(3);
    double change_h[2];
    for (int level = 0; level < 2; ++level) {
        const std::size_t nodes = level == 0 ? 9 : 17;
        Grid g(3, {0.5, -0.5, -0.5}, {nodes, nodes, nodes},
               1.0 / double(nodes - 1));
        const FieldSnapshot f = sample_analytic(hh, g, 0.0);
        FlowConfig cfg = projected_cfg(g);
        const FieldSnapshot out = flow_step(f, cfg);
        change_h[level] = max_change(f, out);
        const double h = g.spacing();
        CHECK(change_h[level] <= 100.0 * cfg.dt * h * h);
    }
    // halving h quarters both dt and the spatial residual
    CHECK(change_h[0] / change_h[1] > 6.0);
}

TEST_CASE("flow_step GL: constant field with |u| = 2 relaxes to the sphere") {
    const Grid g = Grid::centered_cube(2, 2.0, 4);
    FieldSnapshot f(g, 3, 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) f.set_value(i, 0, 2.0);

    FlowConfig cfg;
    cfg.scheme = Scheme::ginzburg_landau;
    cfg.boundary = Boundary::periodic;
    cfg.gl_epsilon = 0.2;
    cfg.dt = 0.001;
    cfg.end_time = cfg.dt;

    // 1D ODE oracle: m' = 2 (1 - m) / eps^2, forward Euler with the same dt
    double m_oracle = 2.0;
    double m_prev = 2.0;
    FieldSnapshot cur = f;
    for (int k = 0; k < 400; ++k) {
        cur = flow_step(cur, cfg);
        m_oracle += cfg.dt * 2.0 * (1.0 - m_oracle) /
                    (cfg.gl_epsilon * cfg.gl_epsilon);
        double m = 0.0;
        for (int c = 0; c < 3; ++c) m += cur.value(0, c) * cur.value(0, c);
        m = std::sqrt(m);
        CHECK(m == doctest::Approx(m_oracle).epsilon(1e-10));
        CHECK(m <= m_prev + 1e-14); // monotone decrease toward 1
        CHECK(m >= 1.0 - 1e-12);
        m_prev = m;
    }
    CHECK(m_prev < 1.01);
    // closed form m(t) = 1 + e^{-2t/eps^2} up to the Euler error
    const double t = 400 * cfg.dt;
    CHECK(m_prev ==
          doctest::Approx(1.0 + std::exp(-2.0 * t / 0.04)).epsilon(0.05));
}

TEST_CASE("flow_step: degenerate projection is reported") {
    const Grid g = Grid::centered_cube(3, 2.0, 5);
    FieldSnapshot f(g, 3, 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) f.set_value(i, 0, -1.0);
    // center node antipodal to all its neighbours
    const std::size_t center = g.flat_index({2, 2, 2});
    f.set_value(center, 0, 1.0);

    FlowConfig cfg = projected_cfg(g, 1.0); // dt = h^2/(4n) exactly
    cfg.scheme = Scheme::projected_explicit;
    CHECK_THROWS_AS(flow_step(f, cfg), guard_error);
}

TEST_CASE("projected scheme preserves the sphere constraint to 1e-12") {
    const Grid g = Grid::centered_cube(2, 2.0, 16);
    InitialParams ip;
    ip.seed = 42;
    FieldSnapshot f = make_initial_data(InitialKind::random_smooth, g, ip);
    FlowConfig cfg = projected_cfg(g);
    cfg.boundary = Boundary::periodic;
    for (int k = 0; k < 25; ++k) {
        f = flow_step(f, cfg);
        CHECK(f.max_unit_defect() <= 1e-12);
    }
}

TEST_CASE("flow_step equivariance: axis permutation and target sign flip") {
    const Grid g = Grid::centered_cube(2, 2.0, 12);
    InitialParams ip;
    ip.seed = 9;
    ip.target_dim = 3;
    const FieldSnapshot f = make_initial_data(InitialKind::random_smooth, g, ip);
    FlowConfig cfg = projected_cfg(g);
    cfg.boundary = Boundary::periodic;

    // symmetry: swap grid axes and negate target component 1
    auto transform = [&](const FieldSnapshot& in) {
        FieldSnapshot out = in;
        auto& vals = out.mutable_values();
        for (std::size_t node = 0; node < g.node_count(); ++node) {
            auto idx = g.multi_index(node);
            std::swap(idx[0], idx[1]);
            const std::size_t src = g.flat_index(idx);
            for (int c = 0; c < 3; ++c)
                vals[node * 3 + c] = (c == 1 ? -1.0 : 1.0) * in.value(src, c);
        }
        return out;
    };

    const FieldSnapshot a = transform(flow_step(f, cfg));
    const FieldSnapshot b = flow_step(transform(f), cfg);
    CHECK(max_change(a, b) <= 1e-12);
}

TEST_CASE("halving dt changes the end state at first order") {
    const Grid g = Grid::centered_cube(2, 2.0, 16);
    InitialParams ip;
    ip.seed = 4;
    ip.amplitude = 0.2;
    const FieldSnapshot f0 = make_initial_data(InitialKind::random_smooth, g, ip);

    const double T = 0.02;
    auto end_state = [&](double dt_factor) {
        FlowConfig cfg = projected_cfg(g, dt_factor);
        cfg.boundary = Boundary::periodic;
        cfg.end_time = T;
        cfg.record_every = 1000000;
        const FlowResult r = run_flow(f0, cfg);
        return r.trajectory.at(r.trajectory.size() - 1);
    };
    const auto u1 = end_state(0.4);
    const auto u2 = end_state(0.2);
    const auto u3 = end_state(0.1);
    const double e1 = max_change(u1, u2);
    const double e2 = max_change(u2, u3);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.35));
}

TEST_CASE("GL scheme drives | |u|-1 | below 10 eps") {
    const Grid g = Grid::centered_cube(2, 2.0, 12);
    InitialParams ip;
    ip.seed = 21;
    FieldSnapshot f = make_initial_data(InitialKind::random_smooth, g, ip);
    // push off the sphere
    for (auto& v : f.mutable_values()) v *= 1.3;

    FlowConfig cfg;
    cfg.scheme = Scheme::ginzburg_landau;
    cfg.boundary = Boundary::periodic;
    cfg.gl_epsilon = 0.05;
    const double h = g.spacing();
    cfg.dt = std::min(h * h / (4.0 * g.dim()),
                      0.2 * cfg.gl_epsilon * cfg.gl_epsilon);
    cfg.end_time = cfg.dt;
    for (int k = 0; k < 400; ++k) f = flow_step(f, cfg);
    CHECK(f.max_unit_defect() <= 10.0 * cfg.gl_epsilon);
}

TEST_CASE("run_flow: recording and monitoring") {
    const Grid g = Grid::centered_cube(2, 2.0, 8);
    InitialParams ip;
    ip.seed = 2;
    const FieldSnapshot f = make_initial_data(InitialKind::random_smooth, g, ip);

    FlowConfig cfg = projected_cfg(g);
    cfg.end_time = 0.0;
    const FlowResult r0 = run_flow(f, cfg);
    CHECK(r0.trajectory.size() == 1);
    CHECK(r0.step_max_dudt.empty());

    cfg.end_time = 20.0 * cfg.dt;
    cfg.record_every = 5;
    const FlowResult r = run_flow(f, cfg);
    CHECK(r.trajectory.size() == 5); // initial + steps 5,10,15,20
    CHECK(r.step_max_dudt.size() == 20);
    CHECK(r.trajectory.at(0).has_dudt());
    CHECK(r.trajectory.at(4).has_dudt());
}

TEST_CASE("smooth periodic flow: max |grad u| nonincreasing after transient") {
    const Grid g = Grid::centered_cube(2, 2.0, 24);
    InitialParams ip;
    ip.seed = 13;
    ip.amplitude = 0.15;
    const FieldSnapshot f = make_initial_data(InitialKind::random_smooth, g, ip);

    auto verdict = [&](double dt_factor) {
        FlowConfig cfg = projected_cfg(g, dt_factor);
        cfg.boundary = Boundary::periodic;
        cfg.end_time = 0.05;
        cfg.record_every = 20;
        const FlowResult r = run_flow(f, cfg);
        bool ok = true;
        double prev = 1e300;
        for (std::size_t i = 1; i < r.trajectory.size(); ++i) {
            const double m = max_grad_norm(r.trajectory.at(i));
            if (m > prev * (1.0 + 1e-9)) ok = false;
            prev = m;
        }
        return ok;
    };
    CHECK(verdict(0.5));
    // refined-dt oracle agrees
    CHECK(verdict(0.25));
}

TEST_CASE("make_initial_data: values and determinism") {
    // hedgehog at a node placed on (1,0,0)
    Grid shell(3, {0.5, -0.5, -0.5}, {5, 5, 5}, 0.25);
    const FieldSnapshot hh = make_initial_data(InitialKind::hedgehog, shell);
    const std::size_t node = shell.flat_index({2, 2, 2});
    CHECK(shell.node(node)[0] == doctest::Approx(1.0));
    CHECK(hh.value(node, 0) == doctest::Approx(1.0));
    CHECK(hh.value(node, 1) == doctest::Approx(0.0));

    // line-singular: a grid with nodes on the axis must refuse
    const Grid bad = Grid::centered_cube(3, 2.0, 5);
    CHECK_THROWS_AS(make_initial_data(InitialKind::line_singular, bad),
                    domain_error);
    const Grid good = Grid::centered_cube(3, 2.0, 6);
    const FieldSnapshot line =
        make_initial_data(InitialKind::line_singular, good);
    line.check_unit_constraint();

    // equivariant disk is unit-valued
    const Grid disk = Grid::centered_cube(2, 2.0, 16);
    const FieldSnapshot eq =
        make_initial_data(InitialKind::equivariant_disk, disk);
    eq.check_unit_constraint();

    // random-smooth determinism
    InitialParams ip;
    ip.seed = 77;
    const FieldSnapshot a = make_initial_data(InitialKind::random_smooth, disk, ip);
    const FieldSnapshot b = make_initial_data(InitialKind::random_smooth, disk, ip);
    CHECK(max_change(a, b) == 0.0);
    ip.seed = 78;
    const FieldSnapshot c = make_initial_data(InitialKind::random_smooth, disk, ip);
    CHECK(max_change(a, c) > 0.0);
}

TEST_CASE("local energy audit") {
    const Grid g = Grid::centered_cube(2, 2.0, 20);

    SUBCASE("constant field: both sides vanish") {
        SpaceTimeField traj;
        for (int i = 0; i < 3; ++i) {
            FieldSnapshot f(g, 3, 0.01 * i);
            for (std::size_t q = 0; q < g.node_count(); ++q)
                f.set_value(q, 0, 1.0);
            traj.append(std::move(f));
        }
        ensure_dudt(traj);
        const CutoffProfile phi(SpacePoint::zero(2), 0.3);
        const EnergyAuditReport rep =
            local_energy_audit(traj, {SpacePoint::zero(2), 0.8}, phi, 0.0, 0.02);
        CHECK(rep.left == doctest::Approx(0.0));
        CHECK(rep.right == doctest::Approx(0.0));
        CHECK(rep.residual == doctest::Approx(0.0));
    }

    SUBCASE("s = t degenerate case on a static field") {
        const Grid g3 = Grid::centered_cube(3, 2.0, 12);
        const HedgehogField hh(3);
        SpaceTimeField traj = static_trajectory(hh, g3, 0.0, 0.1);
        const CutoffProfile phi(SpacePoint::zero(3), 0.3);
        const EnergyAuditReport rep =
            local_energy_audit(traj, {SpacePoint::zero(3), 0.9}, phi, 0.1, 0.1);
        CHECK(rep.residual == doctest::Approx(0.0));
    }

    SUBCASE("unrecorded times are reported with the nearest recorded ones") {
        SpaceTimeField traj;
        for (int i = 0; i < 2; ++i) {
            FieldSnapshot f(g, 3, 0.01 * i);
            for (std::size_t q = 0; q < g.node_count(); ++q)
                f.set_value(q, 0, 1.0);
            traj.append(std::move(f));
        }
        ensure_dudt(traj);
        const CutoffProfile phi(SpacePoint::zero(2), 0.3);
        CHECK_THROWS_WITH_AS(
            local_energy_audit(traj, {SpacePoint::zero(2), 0.8}, phi, 0.004, 0.01),
            doctest::Contains("nearest recorded"), coverage_error);
    }

    SUBCASE("decaying smooth flow satisfies the inequality up to O(h^2 + dt)") {
        InitialParams ip;
        ip.seed = 31;
        ip.amplitude = 0.15;
        const FieldSnapshot f0 =
            make_initial_data(InitialKind::random_smooth, g, ip);
        FlowConfig cfg = projected_cfg(g);
        cfg.boundary = Boundary::periodic;
        cfg.end_time = 0.02;
        cfg.record_every = 4;
        const FlowResult r = run_flow(f0, cfg);
        const CutoffProfile phi(SpacePoint::zero(2), 0.3);
        const EnergyAuditReport rep = local_energy_audit(
            r.trajectory, {SpacePoint::zero(2), 0.8}, phi,
            r.trajectory.at(0).time(), r.trajectory.time_last());
        const double scale = std::max(std::abs(rep.left), std::abs(rep.right));
        CHECK(rep.residual >= -0.05 * scale - 1e-12);
    }
}
