#include "hmf/strata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "hmf/par.hpp"

namespace hmf {

std::vector<double> DetectionParams::ladder() const {
    validate();
    std::vector<double> out;
    for (double r = r_min; r < r_max * (1.0 - 1e-12); r *= 2.0) out.push_back(r);
    out.push_back(r_max);
    return out;
}

namespace {

// times of recorded snapshots intersected with [ta, tb]; the snapshot nearest
// to tc is always included so the set is nonempty
std::vector<std::size_t> snapshots_in(const SpaceTimeField& f, double ta,
                                      double tb, double tc) {
    std::vector<std::size_t> idx;
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = f.at(i).time();
        if (t >= ta - 1e-12 && t <= tb + 1e-12) idx.push_back(i);
        if (std::abs(t - tc) < std::abs(f.at(nearest).time() - tc)) nearest = i;
    }
    if (idx.empty()) idx.push_back(nearest);
    return idx;
}

// trapezoid weights for the knot times {f.at(i).time()}, i in idx, over the
// interval they span (single knot -> weight = full interval length)
std::vector<double> trapezoid_weights(const SpaceTimeField& f,
                                      const std::vector<std::size_t>& idx,
                                      double ta, double tb) {
    std::vector<double> w(idx.size(), 0.0);
    if (idx.size() == 1) {
        w[0] = tb - ta;
        return w;
    }
    // endpoints of the covered interval are the first/last knot times,
    // extended to [ta, tb] by end-rectangles
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        const double dt = f.at(idx[i + 1]).time() - f.at(idx[i]).time();
        w[i] += 0.5 * dt;
        w[i + 1] += 0.5 * dt;
    }
    w.front() += std::max(0.0, f.at(idx.front()).time() - ta);
    w.back() += std::max(0.0, tb - f.at(idx.back()).time());
    return w;
}

} // namespace

double regularity_scale(const SpaceTimeField& f, const SpaceTimePoint& X,
                        const DetectionParams& p) {
    const Grid& g = f.grid();
    if (!g.inside_box(X.x))
        throw coverage_error("regularity_scale: point outside the grid box");
    auto ladder = p.ladder();
    std::sort(ladder.rbegin(), ladder.rend()); // largest first
    for (double r : ladder) {
        if (r > 1.0) continue;
        const auto idx = snapshots_in(f, X.t - r * r, X.t + r * r, X.t);
        double sup = -std::numeric_limits<double>::infinity();
        for (std::size_t i : idx) {
            const FieldSnapshot& snap = f.at(i);
            const auto& e = snap.energy_density_array();
            if (!snap.has_dudt())
                throw coverage_error(
                    "regularity_scale: snapshot lacks du/dt; call ensure_dudt");
            const double m = ball_window_max(g, X.x, r, [&](std::size_t node) {
                return r * r * snap.dudt_norm(node) + r * std::sqrt(e[node]);
            });
            sup = std::max(sup, m);
        }
        // a ball below the grid resolution holds no nodes: not certifiable
        if (std::isinf(sup)) continue;
        if (sup <= 1.0) return r;
    }
    return 0.0;
}

namespace {

// E_-(u,(x,t),s) for one node center: s^{-n} * trapezoid over covered knots
// of the ball energy integral
double eminus_at(const SpaceTimeField& f, const SpacePoint& x, double s,
                 const std::vector<std::size_t>& idx,
                 const std::vector<double>& w) {
    const Grid& g = f.grid();
    const int n = g.dim();
    const double hn = std::pow(g.spacing(), n);
    double total = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& e = f.at(idx[j]).energy_density_array();
        double s_int = 0.0;
        ball_window_visit(g, x, s, [&](std::size_t node) { s_int += e[node]; });
        total += w[j] * s_int * hn;
    }
    return std::pow(s, -n) * total;
}

} // namespace

StratumSample extract_singular_slice(const SpaceTimeField& f, double t,
                                     const DetectionParams& p) {
    p.validate();
    const Grid& g = f.grid();
    const auto ladder = p.ladder();
    const double eps2 = p.epsilon * p.epsilon;

    // per-radius knot sets over the band (t - (2r)^2, t)
    std::vector<std::vector<std::size_t>> knot_idx;
    std::vector<std::vector<double>> knot_w;
    for (double r : ladder) {
        const double s = 2.0 * r;
        f.require_time_range(t - s * s, t, "extract_singular_slice band");
        knot_idx.push_back(snapshots_in(f, t - s * s, t, t - 0.5 * s * s));
        knot_w.push_back(
            trapezoid_weights(f, knot_idx.back(), t - s * s, t));
        for (std::size_t i : knot_idx.back())
            f.at(i).energy_density_array(); // materialize caches up front
    }

    const std::size_t nn = g.node_count();
    std::vector<char> flagged(nn, 0);
    par::for_each(nn, [&](std::size_t node) {
        const SpacePoint x = g.node(node);
        for (std::size_t li = 0; li < ladder.size(); ++li) {
            const double s = 2.0 * ladder[li];
            const double em = eminus_at(f, x, s, knot_idx[li], knot_w[li]);
            if (!(em > eps2)) return; // some scale looks regular
        }
        flagged[node] = 1;
    });

    StratumSample out;
    out.t = t;
    out.k = -1;
    out.r_min = p.r_min;
    out.r_max = p.r_max;
    for (std::size_t node = 0; node < nn; ++node) {
        if (flagged[node]) {
            out.nodes.push_back(node);
            out.points.push_back(g.node(node));
        }
    }
    return out;
}

namespace {

// defect_k(M)/max(trace, floor) where defect_k = sum of (k+1) smallest
// eigenvalues of the n x n matrix m
double normalized_defect(const double m[kMaxDim][kMaxDim], int n, int k,
                         double floor_value) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>
        M(n, n);
    double trace = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) M(i, j) = m[i][j];
        trace += m[i][i];
    }
    Eigen::SelfAdjointEigenSolver<decltype(M)> es(M);
    double defect = 0.0;
    for (int i = 0; i <= k; ++i) defect += es.eigenvalues()(i);
    return defect / std::max(trace, floor_value);
}

} // namespace

StratumSample quantitative_stratum(const SpaceTimeField& f, double t, int k,
                                   const DetectionParams& p) {
    p.validate();
    const Grid& g = f.grid();
    const int n = g.dim();
    if (k < 0 || k > n - 1)
        throw domain_error("quantitative_stratum: k out of range [0, n-1]");
    const auto ladder = p.ladder();
    const double theta = p.threshold_for(k);
    const double hn = std::pow(g.spacing(), n);

    // normalization floor from the grid energy at the nearest snapshot
    const std::size_t near = f.lower_snapshot(f.nearest_time(t));
    const auto& e_near = f.at(near).energy_density_array();
    double grid_energy = 0.0;
    for (double e : e_near) grid_energy += e;
    grid_energy *= hn;
    const double floor_value =
        std::max(p.defect_floor_factor * grid_energy, 1e-300);

    // per-radius knots over the band [t - 4 s^2, t - s^2]
    std::vector<std::vector<std::size_t>> knot_idx;
    std::vector<std::vector<double>> knot_w;
    for (double s : ladder) {
        const double ta = t - 4.0 * s * s, tb = t - s * s;
        f.require_time_range(ta, tb, "quantitative_stratum band");
        knot_idx.push_back(snapshots_in(f, ta, tb, 0.5 * (ta + tb)));
        knot_w.push_back(trapezoid_weights(f, knot_idx.back(), ta, tb));
        for (std::size_t i : knot_idx.back()) {
            if (!f.at(i).gradient_fresh()) f.at(i).refresh_gradient();
        }
    }

    const std::size_t nn = g.node_count();
    std::vector<char> flagged(nn, 0);
    par::for_each(nn, [&](std::size_t node) {
        const SpacePoint x = g.node(node);
        for (std::size_t li = 0; li < ladder.size(); ++li) {
            const double s = ladder[li];
            double M[kMaxDim][kMaxDim] = {};
            for (std::size_t j = 0; j < knot_idx[li].size(); ++j) {
                const FieldSnapshot& snap = f.at(knot_idx[li][j]);
                const double w = knot_w[li][j] * hn;
                ball_window_visit(g, x, s, [&](std::size_t node2) {
                    double tns[kMaxDim][kMaxDim];
                    snap.directional_tensor(node2, tns);
                    for (int a = 0; a < n; ++a)
                        for (int b = a; b < n; ++b) M[a][b] += w * tns[a][b];
                });
            }
            const double rn = std::pow(s, -n);
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    M[a][b] *= rn;
                    M[b][a] = M[a][b];
                }
            if (normalized_defect(M, n, k, floor_value) <= theta) return;
        }
        flagged[node] = 1;
    });

    StratumSample out;
    out.t = t;
    out.k = k;
    out.r_min = p.r_min;
    out.r_max = p.r_max;
    for (std::size_t node = 0; node < nn; ++node) {
        if (flagged[node]) {
            out.nodes.push_back(node);
            out.points.push_back(g.node(node));
        }
    }
    return out;
}

ContentReport minkowski_content(const std::vector<SpacePoint>& S, double alpha,
                                double r, int refinement) {
    if (S.empty()) throw domain_error("minkowski_content: empty set");
    if (!(r > 0.0)) throw domain_error("minkowski_content: r must be > 0");
    if (refinement < 4) refinement = 4;
    const int n = S.front().n;
    const double cell = r / double(refinement);

    std::array<double, kMaxDim> lo{}, hi{};
    for (int a = 0; a < n; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& p : S)
        for (int a = 0; a < n; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    std::array<std::size_t, kMaxDim> counts{};
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) {
        lo[a] -= r + cell;
        counts[a] = std::size_t((hi[a] + r + cell - lo[a]) / cell) + 1;
        total *= counts[a];
    }

    const double r2 = r * r;
    const double inside = par::reduce_sum(total, [&](std::size_t flat) {
        SpacePoint c = SpacePoint::zero(n);
        std::size_t rem = flat;
        for (int a = n - 1; a >= 0; --a) {
            c[a] = lo[a] + cell * (double(rem % counts[a]) + 0.5);
            rem /= counts[a];
        }
        for (const auto& p : S)
            if ((c - p).norm2() < r2) return 1.0;
        return 0.0;
    });

    ContentReport rep;
    rep.alpha = alpha;
    rep.r = r;
    rep.flavor = ContentFlavor::spatial;
    rep.counting_cell = cell;
    rep.content = std::pow(2.0 * r, alpha - n) * inside * std::pow(cell, n);
    return rep;
}

ContentReport minkowski_content(const std::vector<SpaceTimePoint>& S,
                                double alpha, double r, int refinement) {
    if (S.empty()) throw domain_error("minkowski_content: empty set");
    if (!(r > 0.0)) throw domain_error("minkowski_content: r must be > 0");
    if (refinement < 4) refinement = 4;
    const int n = S.front().x.n;
    const double cell = r / double(refinement);
    const double tcell = r * r / double(refinement);

    std::array<double, kMaxDim> lo{}, hi{};
    double tlo = std::numeric_limits<double>::infinity();
    double thi = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& P : S) {
        for (int a = 0; a < n; ++a) {
            lo[a] = std::min(lo[a], P.x[a]);
            hi[a] = std::max(hi[a], P.x[a]);
        }
        tlo = std::min(tlo, P.t);
        thi = std::max(thi, P.t);
    }
    std::array<std::size_t, kMaxDim> counts{};
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) {
        lo[a] -= r + cell;
        counts[a] = std::size_t((hi[a] + r + cell - lo[a]) / cell) + 1;
        total *= counts[a];
    }
    tlo -= r * r + tcell;
    const std::size_t tcount = std::size_t((thi + r * r + tcell - tlo) / tcell) + 1;
    total *= tcount;

    const double r2 = r * r;
    const double inside = par::reduce_sum(total, [&](std::size_t flat) {
        const std::size_t tc = flat % tcount;
        std::size_t rem = flat / tcount;
        SpacePoint c = SpacePoint::zero(n);
        for (int a = n - 1; a >= 0; --a) {
            c[a] = lo[a] + cell * (double(rem % counts[a]) + 0.5);
            rem /= counts[a];
        }
        const double ct = tlo + tcell * (double(tc) + 0.5);
        for (const auto& P : S) {
            if ((c - P.x).norm2() < r2 && std::abs(ct - P.t) < r2) return 1.0;
        }
        return 0.0;
    });

    ContentReport rep;
    rep.alpha = alpha;
    rep.r = r;
    rep.flavor = ContentFlavor::parabolic;
    rep.counting_cell = cell;
    rep.content = std::pow(2.0 * r, alpha - double(n + 2)) * inside *
                  std::pow(cell, n) * tcell;
    return rep;
}

double weak_lorentz_norm(const Grid& g, const std::vector<double>& node_values,
                         const SpatialBall& ball, double p, int s_grid_points,
                         std::size_t resolution_floor) {
    if (!(p >= 1.0)) throw domain_error("weak_lorentz_norm: p must be >= 1");
    if (node_values.size() != g.node_count())
        throw domain_error("weak_lorentz_norm: value array size mismatch");

    std::vector<double> abs_in_ball;
    ball_window_visit(g, ball.center, ball.radius, [&](std::size_t node) {
        abs_in_ball.push_back(std::abs(node_values[node]));
    });
    if (abs_in_ball.empty()) throw domain_error("weak_lorentz_norm: empty ball");

    double vmax = 0.0, vmin_pos = std::numeric_limits<double>::infinity();
    for (double v : abs_in_ball) {
        vmax = std::max(vmax, v);
        if (v > 0.0) vmin_pos = std::min(vmin_pos, v);
    }
    if (vmax == 0.0) return 0.0;

    const double hn = std::pow(g.spacing(), g.dim());
    auto count_above = [&](double s) {
        std::size_t count = 0;
        for (double v : abs_in_ball)
            if (v > s) ++count;
        return count;
    };
    auto norm_at = [&](std::size_t count, double s) {
        return s * std::pow(double(count) * hn, 1.0 / p);
    };

    const double s_lo = std::max(vmin_pos, vmax * 1e-8);
    const double s_hi = vmax;
    double best = 0.0, best_unrestricted = 0.0;
    auto consider = [&](double s) {
        const std::size_t count = count_above(s);
        const double v = norm_at(count, s);
        best_unrestricted = std::max(best_unrestricted, v);
        if (count >= resolution_floor) best = std::max(best, v);
    };
    consider(s_hi * (1.0 - 1e-12));
    for (int i = 0; i < s_grid_points; ++i)
        consider(s_lo *
                 std::pow(s_hi / s_lo, double(i) / double(s_grid_points - 1)));
    return best > 0.0 ? best : best_unrestricted;
}

} // namespace hmf
