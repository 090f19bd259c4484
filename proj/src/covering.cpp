#include "hmf/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hmf {

namespace {
constexpr double kTol = 1.0 + 1e-12;
}

double DensityOracle::operator()(const SpacePoint& y, double s) const {
    double v;
    try {
        v = phi(y, s);
    } catch (const std::exception& e) {
        std::ostringstream os;
        os << "density oracle failed at (";
        for (int i = 0; i < y.n; ++i) os << (i ? "," : "") << y[i];
        os << ") scale " << s << ": " << e.what();
        throw error(os.str());
    }
    if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << "density oracle returned invalid value " << v << " at scale " << s;
        throw structural_error(os.str());
    }
    return v;
}

std::vector<std::size_t> greedy_net(const std::vector<SpacePoint>& pts,
                                    const std::vector<std::size_t>& candidates,
                                    double sep) {
    std::vector<std::size_t> net;
    if (candidates.empty()) return net;
    net.push_back(candidates.front());
    std::vector<double> d2net(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        d2net[i] = dist(pts[candidates[i]], pts[net.front()]);
    for (;;) {
        std::size_t far = 0;
        for (std::size_t i = 1; i < candidates.size(); ++i)
            if (d2net[i] > d2net[far]) far = i;
        if (d2net[far] < sep) break;
        net.push_back(candidates[far]);
        for (std::size_t i = 0; i < candidates.size(); ++i)
            d2net[i] = std::min(d2net[i],
                                dist(pts[candidates[i]], pts[net.back()]));
    }
    return net;
}

Classification classify_ball(const DensityOracle& oracle,
                             const std::vector<SpacePoint>& S,
                             const SpatialBall& ball,
                             const CoveringParams& p) {
    if (std::isnan(p.E))
        throw domain_error("classify_ball: params.E must be set");
    Classification cls;
    cls.good = true;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (dist(S[i], ball.center) <= ball.radius * kTol) members.push_back(i);

    for (std::size_t i : members) {
        if (oracle(S[i], p.gamma * p.rho * ball.radius) < p.E - p.eta_prime) {
            cls.good = false;
            break;
        }
    }
    if (cls.good) return cls;

    // pruning plane: best-fit (k-1)-plane of the high-density points
    WeightedPointCloud high;
    std::size_t densest = members.front();
    double densest_phi = -1.0;
    for (std::size_t i : members) {
        const double v = oracle(S[i], 2.0 * p.eta * ball.radius);
        if (v >= p.E - 0.5 * p.eta) high.add(S[i], 1.0);
        if (v > densest_phi) {
            densest_phi = v;
            densest = i;
        }
    }
    const int n = ball.center.n;
    const int plane_dim = std::max(p.k - 1, 0);
    if (high.points.size() >= std::size_t(p.k) && plane_dim > 0) {
        const MomentSpectrum spec =
            moment_spectrum(high, {ball.center, ball.radius * 2.0});
        cls.pruning_plane = spec.plane(plane_dim);
    } else if (high.points.size() >= 1 && plane_dim == 0) {
        cls.pruning_plane.base = high.points.front();
    } else {
        // fewer than k qualifying points: any plane through the densest point
        cls.pruning_plane.base = S[densest];
        for (int a = 0; a < plane_dim; ++a) {
            SpacePoint e = SpacePoint::zero(n);
            e[a] = 1.0;
            cls.pruning_plane.basis.push_back(e);
        }
    }
    // pad the basis to dimension k-1 with canonical directions when the
    // high-density cloud was degenerate
    while (int(cls.pruning_plane.basis.size()) < plane_dim) {
        for (int a = 0; a < n; ++a) {
            SpacePoint e = SpacePoint::zero(n);
            e[a] = 1.0;
            double proj = 0.0;
            for (const auto& b : cls.pruning_plane.basis) {
                const double c = e.dot(b);
                proj += c * c;
            }
            if (proj < 0.5) {
                for (const auto& b : cls.pruning_plane.basis) {
                    const double c = e.dot(b);
                    for (int q = 0; q < n; ++q) e[q] -= c * b[q];
                }
                const double nrm = e.norm();
                if (nrm > 1e-12) {
                    cls.pruning_plane.basis.push_back(e * (1.0 / nrm));
                    break;
                }
            }
        }
    }
    cls.plane_valid = true;
    return cls;
}

namespace {

struct TreeState {
    const DensityOracle* oracle;
    const std::vector<SpacePoint>* S;
    CoveringParams p;
    double stop_radius; // R * main_radius
    int tree_id;
    int parent_tree;
    int round;
    CoverResult* out;

    // stop-ball bookkeeping: window check plus drop certificate when outside
    void emit_stop(const SpacePoint& y, double r_y, bool expect_drop) {
        CoverBall b;
        b.center = y;
        b.radius = r_y;
        b.label = BallLabel::stop;
        b.tree_id = tree_id;
        b.parent_tree = parent_tree;
        b.round = round;
        b.radius_in_window = r_y >= p.eta * stop_radius * (1.0 - 1e-9) &&
                             r_y <= stop_radius * (1.0 + 1e-9);
        if (!b.radius_in_window || expect_drop) {
            double sup = (*oracle)(y, 2.0 * r_y);
            for (const auto& z : *S)
                if (dist(z, y) <= 2.0 * r_y * kTol)
                    sup = std::max(sup, (*oracle)(z, 2.0 * r_y));
            b.drop_sup = sup;
            b.has_drop_certificate = sup <= out->E - p.eta / 3.0;
        }
        out->balls.push_back(b);
    }

    void emit_final(const SpacePoint& y, double r_y, bool good) {
        CoverBall b;
        b.center = y;
        b.radius = r_y;
        b.label = good ? BallLabel::final_good : BallLabel::final_bad;
        b.tree_id = tree_id;
        b.parent_tree = parent_tree;
        b.round = round;
        out->balls.push_back(b);
    }
};

// indices of S inside the closed ball
std::vector<std::size_t> members_of(const std::vector<SpacePoint>& S,
                                    const SpacePoint& c, double r) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < S.size(); ++i)
        if (dist(S[i], c) <= r * kTol) idx.push_back(i);
    return idx;
}

void run_good_tree(TreeState& st, const SpatialBall& root) {
    const auto& S = *st.S;
    const auto root_members = members_of(S, root.center, root.radius);

    std::vector<SpacePoint> good_centers{root.center};
    std::vector<std::pair<SpacePoint, double>> bad_balls; // accumulated
    double r_prev = root.radius;

    while (!good_centers.empty()) {
        const double r_i = st.p.rho * r_prev;
        // net domain: within r_prev of a good center, outside all earlier
        // bad balls
        std::vector<std::size_t> domain;
        for (std::size_t i : root_members) {
            bool in_good = false;
            for (const auto& gc : good_centers)
                if (dist(S[i], gc) <= r_prev * kTol) {
                    in_good = true;
                    break;
                }
            if (!in_good) continue;
            bool in_bad = false;
            for (const auto& [bc, br] : bad_balls)
                if (dist(S[i], bc) < br) {
                    in_bad = true;
                    break;
                }
            if (!in_bad) domain.push_back(i);
        }
        const auto net = greedy_net(S, domain, 2.0 * r_i / 5.0);
        if (r_i <= st.stop_radius * kTol) {
            for (std::size_t i : net) st.emit_stop(S[i], r_i, false);
            break;
        }
        std::vector<SpacePoint> next_good;
        for (std::size_t i : net) {
            const Classification cls =
                classify_ball(*st.oracle, S, {S[i], r_i}, st.p);
            if (cls.good) {
                next_good.push_back(S[i]);
            } else {
                bad_balls.emplace_back(S[i], r_i);
                st.emit_final(S[i], r_i, /*good=*/false);
            }
        }
        good_centers = std::move(next_good);
        r_prev = r_i;
    }
}

void run_bad_tree(TreeState& st, const SpatialBall& root,
                  const AffineSubspace& root_plane) {
    const auto& S = *st.S;
    const auto root_members = members_of(S, root.center, root.radius);

    struct BadBall {
        SpacePoint center;
        AffineSubspace plane;
    };
    std::vector<BadBall> bad{{root.center, root_plane}};
    double r_prev = root.radius;

    while (!bad.empty()) {
        const double r_i = st.p.rho * r_prev;
        if (r_i <= st.stop_radius * kTol) {
            // terminal stop nets at radius eta * r_prev inside the bad balls
            std::vector<std::size_t> domain;
            for (std::size_t i : root_members)
                for (const auto& bb : bad)
                    if (dist(S[i], bb.center) <= r_prev * kTol) {
                        domain.push_back(i);
                        break;
                    }
            const auto net =
                greedy_net(S, domain, 2.0 * st.p.eta * r_prev / 5.0);
            for (std::size_t i : net)
                st.emit_stop(S[i], st.p.eta * r_prev, false);
            break;
        }
        // stop nets off the pruning tubes
        std::vector<std::size_t> off_tube;
        std::vector<std::size_t> in_tube;
        for (std::size_t i : root_members) {
            bool any_off = false, any_in = false;
            for (const auto& bb : bad) {
                if (dist(S[i], bb.center) > r_prev * kTol) continue;
                const double dplane = std::sqrt(bb.plane.dist2(S[i]));
                if (dplane >= 2.0 * st.p.rho * r_prev)
                    any_off = true;
                else
                    any_in = true;
            }
            if (any_off) off_tube.push_back(i);
            if (any_in) in_tube.push_back(i);
        }
        const auto stop_net =
            greedy_net(S, off_tube, 2.0 * st.p.eta * r_prev / 5.0);
        for (std::size_t i : stop_net)
            st.emit_stop(S[i], st.p.eta * r_prev, true);

        const auto cont_net = greedy_net(S, in_tube, 2.0 * r_i / 5.0);
        std::vector<BadBall> next_bad;
        for (std::size_t i : cont_net) {
            const Classification cls =
                classify_ball(*st.oracle, S, {S[i], r_i}, st.p);
            if (cls.good) {
                st.emit_final(S[i], r_i, /*good=*/true);
            } else {
                next_bad.push_back({S[i], cls.pruning_plane});
            }
        }
        bad = std::move(next_bad);
        r_prev = r_i;
    }
}

double compute_root_ceiling(const DensityOracle& oracle, const SpatialBall& root) {
    // E = max of Phi(z, 2r) over a lattice in B_{2r}(x0) at pitch r/4
    const int n = root.center.n;
    const double r = root.radius;
    const double pitch = r / 4.0;
    const int span = 8;
    double E = oracle(root.center, 2.0 * r);
    std::vector<int> counter(n, -span);
    for (;;) {
        SpacePoint x = root.center;
        for (int a = 0; a < n; ++a) x[a] += pitch * double(counter[a]);
        if (dist(x, root.center) <= 2.0 * r)
            E = std::max(E, oracle(x, 2.0 * r));
        int a = 0;
        for (; a < n; ++a) {
            if (++counter[a] <= span) break;
            counter[a] = -span;
        }
        if (a == n) break;
    }
    return E;
}

} // namespace

CoverResult build_good_tree(const DensityOracle& oracle,
                            const std::vector<SpacePoint>& S,
                            const SpatialBall& root, const CoveringParams& p,
                            double main_radius) {
    p.validate();
    CoverResult out;
    out.root = root;
    out.params = p;
    out.E = std::isnan(p.E) ? compute_root_ceiling(oracle, root) : p.E;
    CoveringParams pp = p;
    pp.E = out.E;
    TreeState st{&oracle, &S, pp,
                 p.R * (main_radius > 0.0 ? main_radius : root.radius),
                 0, -1, 0, &out};
    run_good_tree(st, root);
    return out;
}

CoverResult build_bad_tree(const DensityOracle& oracle,
                           const std::vector<SpacePoint>& S,
                           const SpatialBall& root, const CoveringParams& p,
                           double main_radius) {
    p.validate();
    CoverResult out;
    out.root = root;
    out.params = p;
    out.E = std::isnan(p.E) ? compute_root_ceiling(oracle, root) : p.E;
    CoveringParams pp = p;
    pp.E = out.E;
    const Classification cls = classify_ball(oracle, S, root, pp);
    AffineSubspace plane;
    if (cls.plane_valid) {
        plane = cls.pruning_plane;
    } else {
        plane.base = root.center; // degenerate: vacuous tube
    }
    TreeState st{&oracle, &S, pp,
                 p.R * (main_radius > 0.0 ? main_radius : root.radius),
                 0, -1, 0, &out};
    run_bad_tree(st, root, plane);
    return out;
}

CoverResult main_covering(const DensityOracle& oracle,
                          const std::vector<SpacePoint>& S,
                          const SpatialBall& root, const CoveringParams& p) {
    p.validate();
    CoverResult out;
    out.root = root;
    out.params = p;
    out.E = std::isnan(p.E) ? compute_root_ceiling(oracle, root) : p.E;
    CoveringParams pp = p;
    pp.E = out.E;

    // restrict the sample to the root ball
    std::vector<SpacePoint> S_root;
    for (const auto& z : S)
        if (dist(z, root.center) <= root.radius * kTol) S_root.push_back(z);

    const int max_rounds =
        int(std::ceil(std::log(p.R) / std::log(p.rho))) + 10;

    struct Front {
        SpatialBall ball;
        bool good;
        AffineSubspace plane;
        int tree_id;
    };
    const Classification root_cls = classify_ball(oracle, S_root, root, pp);
    std::vector<Front> front{{root, root_cls.good, root_cls.pruning_plane, -1}};
    int next_tree = 0;

    int round = 0;
    while (!front.empty()) {
        if (++round > max_rounds) {
            std::ostringstream os;
            os << "main_covering: no termination after " << max_rounds
               << " alternations (guard tripped)";
            throw guard_error(os.str());
        }
        std::vector<Front> next_front;
        for (const Front& fr : front) {
            TreeState st{&oracle, &S_root, pp, p.R * root.radius,
                         next_tree++, fr.tree_id, round, &out};
            const std::size_t before = out.balls.size();
            if (fr.good) {
                run_good_tree(st, fr.ball);
            } else {
                AffineSubspace plane = fr.plane;
                if (plane.base.n == 0) plane.base = fr.ball.center;
                run_bad_tree(st, fr.ball, plane);
            }
            // final balls spawn subtrees of the opposite type
            for (std::size_t i = before; i < out.balls.size(); ++i) {
                const CoverBall& b = out.balls[i];
                if (b.label == BallLabel::stop) continue;
                Front nf;
                nf.ball = {b.center, b.radius};
                nf.good = b.label == BallLabel::final_good;
                nf.tree_id = st.tree_id;
                if (!nf.good) {
                    const Classification cls =
                        classify_ball(oracle, S_root, nf.ball, pp);
                    nf.plane = cls.pruning_plane;
                    if (!cls.plane_valid) nf.plane.base = b.center;
                }
                next_front.push_back(std::move(nf));
            }
        }
        front = std::move(next_front);
    }
    out.alternations = round;
    return out;
}

CoverAudit cover_audit(const CoverResult& c, const std::vector<SpacePoint>& S,
                       int k) {
    CoverAudit audit;
    audit.stop_count = c.count(BallLabel::stop);
    audit.final_good_count = c.count(BallLabel::final_good);
    audit.final_bad_count = c.count(BallLabel::final_bad);
    audit.content_sum = c.stop_content_sum(k);
    audit.count_times_Rk =
        double(audit.stop_count) * std::pow(c.params.R, k);

    audit.covering_ok = true;
    for (const auto& z : S) {
        if (dist(z, c.root.center) > c.root.radius * kTol) continue;
        bool covered = false;
        for (const auto& b : c.balls) {
            if (b.label != BallLabel::stop) continue;
            if (dist(z, b.center) <= b.radius * kTol) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            audit.covering_ok = false;
            audit.uncovered.push_back(z);
        }
    }

    audit.certificates_ok = true;
    for (const auto& b : c.balls) {
        if (b.label != BallLabel::stop) continue;
        if (!b.radius_in_window && !b.has_drop_certificate) {
            audit.certificates_ok = false;
            ++audit.certificate_violations;
        }
    }
    return audit;
}

} // namespace hmf
