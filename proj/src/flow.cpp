#include "hmf/flow.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "hmf/par.hpp"

namespace hmf {

void FlowConfig::validate(const Grid& grid) const {
    if (!(dt > 0.0)) throw domain_error("FlowConfig: dt must be > 0");
    const double h = grid.spacing();
    const double cap = h * h / (4.0 * grid.dim());
    if (dt > cap * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "FlowConfig: dt = " << dt << " violates the stability guard h^2/(4n) = "
           << cap;
        throw domain_error(os.str());
    }
    if (scheme == Scheme::ginzburg_landau && !(gl_epsilon > 0.0))
        throw domain_error("FlowConfig: gl_epsilon must be > 0 for the GL scheme");
    if (record_every == 0)
        throw domain_error("FlowConfig: record_every must be >= 1");
}

std::vector<double> second_fundamental_term(const std::vector<double>& value,
                                            const std::vector<double>& gradient,
                                            int n, int d) {
    if (int(value.size()) != d || int(gradient.size()) != n * d)
        throw domain_error("second_fundamental_term: shape mismatch");
    double norm2 = 0.0;
    for (double v : value) norm2 += v * v;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-8)
        throw structural_error("second_fundamental_term: |value| != 1 beyond 1e-8");
    double g2 = 0.0;
    for (double g : gradient) g2 += g * g;
    std::vector<double> out(d);
    for (int c = 0; c < d; ++c) out[c] = g2 * value[c];
    return out;
}

namespace {

// Stencil helpers shared by the step kernel. For periodic boundaries indices
// wrap; for Dirichlet the caller only visits interior nodes.
inline std::size_t shift_node(const Grid& g, std::size_t node,
                              const std::array<std::size_t, kMaxDim>& idx,
                              int axis, int dir, Boundary boundary) {
    const std::size_t cnt = g.count(axis);
    const std::size_t stride = g.stride(axis);
    const std::size_t i = idx[axis];
    if (dir > 0) {
        if (i + 1 < cnt) return node + stride;
        // periodic wrap
        (void)boundary;
        return node - stride * (cnt - 1);
    }
    if (i > 0) return node - stride;
    return node + stride * (cnt - 1);
}

} // namespace

FieldSnapshot flow_step(const FieldSnapshot& f, const FlowConfig& cfg) {
    const Grid& g = f.grid();
    cfg.validate(g);
    const int n = g.dim();
    const int d = f.target_dim();
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const double inv_2h = 1.0 / (2.0 * h);
    const std::size_t nn = g.node_count();
    const auto& in = f.values();

    FieldSnapshot out(g, d, f.time() + cfg.dt);
    auto& ov = out.mutable_values();

    const bool periodic = cfg.boundary == Boundary::periodic;
    std::atomic<long long> degenerate_node{-1};

    par::for_each(nn, [&](std::size_t node) {
        const auto idx = g.multi_index(node);
        if (!periodic) {
            for (int a = 0; a < n; ++a) {
                if (idx[a] == 0 || idx[a] + 1 == g.count(a)) {
                    // Dirichlet: boundary trace frozen
                    for (int c = 0; c < d; ++c) ov[node * d + c] = in[node * d + c];
                    return;
                }
            }
        }
        double lap[kMaxTarget] = {};
        double grad2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const std::size_t up = shift_node(g, node, idx, a, +1, cfg.boundary);
            const std::size_t dn = shift_node(g, node, idx, a, -1, cfg.boundary);
            for (int c = 0; c < d; ++c) {
                const double vp = in[up * d + c];
                const double vm = in[dn * d + c];
                const double v0 = in[node * d + c];
                lap[c] += (vp + vm - 2.0 * v0) * inv_h2;
                const double gc = (vp - vm) * inv_2h;
                grad2 += gc * gc;
            }
        }
        if (cfg.scheme == Scheme::projected_explicit) {
            double w[kMaxTarget];
            double w2 = 0.0;
            for (int c = 0; c < d; ++c) {
                w[c] = in[node * d + c] + cfg.dt * (lap[c] + grad2 * in[node * d + c]);
                w2 += w[c] * w[c];
            }
            const double wn = std::sqrt(w2);
            if (wn < 1e-8) {
                long long expected = -1;
                degenerate_node.compare_exchange_strong(expected, (long long)node);
                return;
            }
            for (int c = 0; c < d; ++c) ov[node * d + c] = w[c] / wn;
        } else {
            double u2 = 0.0;
            for (int c = 0; c < d; ++c) {
                const double v = in[node * d + c];
                u2 += v * v;
            }
            const double un = std::sqrt(u2);
            if (un < 1e-8) {
                long long expected = -1;
                degenerate_node.compare_exchange_strong(expected, (long long)node);
                return;
            }
            const double pen = 2.0 * (1.0 - un) / (cfg.gl_epsilon * cfg.gl_epsilon);
            for (int c = 0; c < d; ++c) {
                ov[node * d + c] =
                    in[node * d + c] +
                    cfg.dt * (lap[c] + pen * in[node * d + c] / un);
            }
        }
    });

    if (degenerate_node.load() >= 0) {
        const std::size_t node = std::size_t(degenerate_node.load());
        const SpacePoint p = g.node(node);
        std::ostringstream os;
        os << "flow_step: degenerate step (|w| < 1e-8) at node " << node << " (";
        for (int a = 0; a < n; ++a) os << (a ? "," : "") << p[a];
        os << ")";
        throw guard_error(os.str());
    }
    return out;
}

FlowResult run_flow(const FieldSnapshot& initial, const FlowConfig& cfg) {
    cfg.validate(initial.grid());
    FlowResult result;
    const double t0 = initial.time();
    const std::size_t nsteps =
        cfg.end_time <= t0 ? 0
                           : std::size_t((cfg.end_time - t0) / cfg.dt + 1e-9);
    result.trajectory.append(initial);
    if (nsteps == 0) return result;

    FieldSnapshot current = initial;
    const int d = current.target_dim();
    const std::size_t nn = current.grid().node_count();
    result.step_max_dudt.reserve(nsteps);

    for (std::size_t k = 1; k <= nsteps; ++k) {
        FieldSnapshot next;
        try {
            next = flow_step(current, cfg);
        } catch (const guard_error& e) {
            std::ostringstream os;
            os << "run_flow: step failed at t = " << current.time() + cfg.dt
               << ": " << e.what();
            throw guard_error(os.str());
        }
        // per-step max |du/dt| proxy
        const auto& a = current.values();
        const auto& b = next.values();
        const double max_rate =
            par::reduce_max(nn, [&](std::size_t node) {
                double s = 0.0;
                for (int c = 0; c < d; ++c) {
                    const double dv = b[node * d + c] - a[node * d + c];
                    s += dv * dv;
                }
                return s;
            });
        result.step_max_dudt.push_back(std::sqrt(max_rate) / cfg.dt);

        if (k % cfg.record_every == 0 || k == nsteps) {
            std::vector<double> dudt(nn * d);
            for (std::size_t i = 0; i < nn * d; ++i)
                dudt[i] = (b[i] - a[i]) / cfg.dt;
            FieldSnapshot rec = next;
            rec.set_dudt(std::move(dudt));
            result.trajectory.append(std::move(rec));
        }
        if (k == 1) {
            // initial snapshot gets the forward-difference derivative
            std::vector<double> dudt(nn * d);
            for (std::size_t i = 0; i < nn * d; ++i)
                dudt[i] = (b[i] - a[i]) / cfg.dt;
            result.trajectory.at_mutable(0).set_dudt(std::move(dudt));
        }
        current = std::move(next);
    }
    return result;
}

FieldSnapshot make_initial_data(InitialKind kind, const Grid& grid,
                                const InitialParams& params) {
    switch (kind) {
    case InitialKind::hedgehog: {
        SpacePoint c = params.center.n == grid.dim() ? params.center
                                                     : SpacePoint::zero(grid.dim());
        HedgehogField f(grid.dim(), c);
        return sample_analytic(f, grid, 0.0, params.min_singular_gap);
    }
    case InitialKind::line_singular: {
        if (grid.dim() != 3)
            throw domain_error("make_initial_data: line-singular needs n = 3");
        LineSingularField f;
        return sample_analytic(f, grid, 0.0, params.min_singular_gap);
    }
    case InitialKind::equivariant_disk: {
        if (grid.dim() != 2)
            throw domain_error("make_initial_data: equivariant-disk needs n = 2");
        FieldSnapshot snap(grid, 3, 0.0);
        auto& vals = snap.mutable_values();
        const double a = params.profile_factor;
        const double R = params.disk_radius;
        const double pi = std::acos(-1.0);
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            const SpacePoint x = grid.node(i);
            const double rho = x.norm();
            const double theta = a * pi * std::min(rho / R, 1.0);
            if (rho < 1e-14) {
                vals[i * 3 + 0] = 0.0;
                vals[i * 3 + 1] = 0.0;
                vals[i * 3 + 2] = 1.0;
            } else {
                const double s = std::sin(theta) / rho;
                vals[i * 3 + 0] = s * x[0];
                vals[i * 3 + 1] = s * x[1];
                vals[i * 3 + 2] = std::cos(theta);
            }
        }
        return snap;
    }
    case InitialKind::random_smooth: {
        const int n = grid.dim();
        const int d = params.target_dim > 0 ? params.target_dim : n;
        if (d < 2 || d > kMaxTarget)
            throw domain_error("make_initial_data: random-smooth target dim out of range");
        FieldSnapshot snap(grid, d, 0.0);
        auto& vals = snap.mutable_values();
        par::Rng rng(params.seed);
        // band-limited modes, periodic on the torus of period count*h per axis
        struct Mode {
            double k[kMaxDim];
            double phase;
            double amp;
            int comp;
        };
        std::vector<Mode> modes;
        const double pi = std::acos(-1.0);
        for (int c = 0; c < d; ++c) {
            for (int m = 0; m < params.max_mode; ++m) {
                Mode mode{};
                for (int axis = 0; axis < n; ++axis) {
                    const double period = grid.spacing() * double(grid.count(axis));
                    const int freq = 1 + int(rng.next_u64() % std::uint64_t(params.max_mode));
                    mode.k[axis] = 2.0 * pi * double(freq) / period;
                }
                mode.phase = rng.uniform(0.0, 2.0 * pi);
                mode.amp = params.amplitude * rng.uniform(0.5, 1.0);
                mode.comp = c;
                modes.push_back(mode);
            }
        }
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
            const SpacePoint x = grid.node(i);
            double v[kMaxTarget] = {};
            v[d - 1] = 1.0; // offset keeps |v| away from zero
            for (const Mode& m : modes) {
                double arg = m.phase;
                for (int axis = 0; axis < n; ++axis) arg += m.k[axis] * x[axis];
                v[m.comp] += m.amp * std::cos(arg);
            }
            double norm = 0.0;
            for (int c = 0; c < d; ++c) norm += v[c] * v[c];
            norm = std::sqrt(norm);
            for (int c = 0; c < d; ++c) vals[i * d + c] = v[c] / norm;
        }
        return snap;
    }
    }
    throw domain_error("make_initial_data: unknown kind");
}

void ensure_dudt(SpaceTimeField& f) {
    const std::size_t m = f.size();
    if (m == 0) return;
    for (std::size_t i = 0; i < m; ++i) {
        if (f.at(i).has_dudt()) continue;
        if (m == 1)
            throw coverage_error(
                "ensure_dudt: single snapshot without a derivative cache");
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == m ? i : i + 1;
        const auto& a = f.at(lo).values();
        const auto& b = f.at(hi).values();
        const double dt = f.at(hi).time() - f.at(lo).time();
        std::vector<double> dudt(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) dudt[j] = (b[j] - a[j]) / dt;
        f.at_mutable(i).set_dudt(std::move(dudt));
    }
}

namespace {

// grid quadrature of q(node) * phi-weight over nodes inside the ball
double ball_quadrature(const FieldSnapshot& snap, const SpatialBall& ball,
                       const std::function<double(std::size_t, const SpacePoint&)>& f) {
    const Grid& g = snap.grid();
    const double hn = std::pow(g.spacing(), g.dim());
    const double r2 = ball.radius * ball.radius;
    return hn * par::reduce_sum(g.node_count(), [&](std::size_t node) {
        const SpacePoint x = g.node(node);
        if ((x - ball.center).norm2() > r2) return 0.0;
        return f(node, x);
    });
}

} // namespace

EnergyAuditReport local_energy_audit(const SpaceTimeField& f,
                                     const SpatialBall& ball,
                                     const CutoffProfile& phi, double s,
                                     double t) {
    if (s > t) throw domain_error("local_energy_audit: need s <= t");
    if (phi.support_radius() > ball.radius * (1.0 + 1e-9))
        throw domain_error("local_energy_audit: cutoff not supported in the ball");
    if (dist(phi.center(), ball.center) > 1e-12 * (1.0 + ball.radius))
        throw domain_error("local_energy_audit: cutoff center must match the ball");

    // both s and t must be recorded times
    std::vector<std::size_t> knots;
    std::size_t is = f.size(), it = f.size();
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double ti = f.at(i).time();
        if (std::abs(ti - s) < 1e-12 * (1.0 + std::abs(s))) is = i;
        if (std::abs(ti - t) < 1e-12 * (1.0 + std::abs(t))) it = i;
    }
    if (is == f.size() || it == f.size()) {
        std::ostringstream os;
        os << "local_energy_audit: times (" << s << ", " << t
           << ") are not recorded; nearest recorded times are "
           << f.nearest_time(s) << " and " << f.nearest_time(t);
        throw coverage_error(os.str());
    }

    auto grad_term = [&](std::size_t i) {
        const FieldSnapshot& snap = f.at(i);
        const auto& e = snap.energy_density_array();
        return ball_quadrature(snap, ball, [&](std::size_t node, const SpacePoint& x) {
            const double p = phi(x);
            if (p == 0.0) return 0.0;
            return e[node] * p * p;
        });
    };
    auto dt_term = [&](std::size_t i) {
        const FieldSnapshot& snap = f.at(i);
        if (!snap.has_dudt())
            throw coverage_error("local_energy_audit: snapshot lacks du/dt cache; "
                                 "call ensure_dudt first");
        return ball_quadrature(snap, ball, [&](std::size_t node, const SpacePoint& x) {
            const double p = phi(x);
            if (p == 0.0) return 0.0;
            const double r = snap.dudt_norm(node);
            return r * r * p * p;
        });
    };
    auto gradphi_term = [&](std::size_t i) {
        const FieldSnapshot& snap = f.at(i);
        const auto& e = snap.energy_density_array();
        return ball_quadrature(snap, ball, [&](std::size_t node, const SpacePoint& x) {
            const double gp = phi.grad_norm(x);
            if (gp == 0.0) return 0.0;
            return e[node] * gp * gp;
        });
    };

    // trapezoid over recorded knots in [s, t]
    double time_dt = 0.0, time_gradphi = 0.0;
    for (std::size_t i = is; i < it; ++i) {
        const double w = 0.5 * (f.at(i + 1).time() - f.at(i).time());
        time_dt += w * (dt_term(i) + dt_term(i + 1));
        time_gradphi += w * (gradphi_term(i) + gradphi_term(i + 1));
    }

    EnergyAuditReport rep;
    rep.left = time_dt + grad_term(it);
    rep.right = grad_term(is) + 4.0 * time_gradphi;
    rep.residual = rep.right - rep.left;
    rep.cutoff_id = phi.id();
    rep.s = s;
    rep.t = t;
    return rep;
}

} // namespace hmf
