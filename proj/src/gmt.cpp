#include "hmf/gmt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "hmf/densities.hpp"
#include "hmf/par.hpp"

namespace hmf {

namespace {
const double kPi = std::acos(-1.0);
constexpr double kBallTol = 1.0 + 1e-12;
} // namespace

void WeightedPointCloud::validate() const {
    if (points.size() != weights.size())
        throw domain_error("WeightedPointCloud: size mismatch");
    const int n = dim();
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].n != n)
            throw domain_error("WeightedPointCloud: mixed dimensions");
        if (!(weights[i] > 0.0))
            throw domain_error("WeightedPointCloud: weights must be > 0");
    }
}

std::vector<std::size_t> WeightedPointCloud::inside(const SpatialBall& ball) const {
    std::vector<std::size_t> idx;
    const double r2 = ball.radius * ball.radius * kBallTol;
    for (std::size_t i = 0; i < points.size(); ++i)
        if ((points[i] - ball.center).norm2() <= r2) idx.push_back(i);
    return idx;
}

double WeightedPointCloud::mass(const SpatialBall& ball) const {
    double m = 0.0;
    for (std::size_t i : inside(ball)) m += weights[i];
    return m;
}

void AffineSubspace::check_orthonormal(double tol) const {
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i; j < basis.size(); ++j) {
            const double d = basis[i].dot(basis[j]);
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(d - want) > tol)
                throw structural_error("AffineSubspace: basis not orthonormal");
        }
    }
}

double AffineSubspace::dist2(const SpacePoint& y) const {
    const SpacePoint d = y - base;
    double s = d.norm2();
    for (const auto& b : basis) {
        const double c = d.dot(b);
        s -= c * c;
    }
    return std::max(s, 0.0);
}

AffineSubspace MomentSpectrum::plane(int k) const {
    if (k < 0 || k > int(v.size()))
        throw domain_error("MomentSpectrum::plane: k out of range");
    AffineSubspace L;
    L.base = x_cm;
    for (int i = 0; i < k; ++i) L.basis.push_back(v[i]);
    return L;
}

double unit_ball_volume(int k) {
    if (k < 0) throw domain_error("unit_ball_volume: negative dimension");
    return std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k + 1.0);
}

double PackingMeasure::weight(std::size_t i) const {
    return unit_ball_volume(k) * std::pow(radii[i], k);
}

WeightedPointCloud PackingMeasure::as_cloud() const {
    WeightedPointCloud mu;
    for (std::size_t i = 0; i < centers.size(); ++i)
        mu.add(centers[i], weight(i));
    return mu;
}

double PackingMeasure::min_radius() const {
    double m = std::numeric_limits<double>::infinity();
    for (double r : radii) m = std::min(m, r);
    return m;
}

void PackingMeasure::verify_disjoint() const {
    if (centers.size() != radii.size())
        throw domain_error("PackingMeasure: size mismatch");
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j) {
            const double d = dist(centers[i], centers[j]);
            if (d < 2.0 * (radii[i] + radii[j]) * (1.0 - 1e-12)) {
                std::ostringstream os;
                os << "PackingMeasure: doubled balls " << i << " and " << j
                   << " overlap (|y_i - y_j| = " << d << " < 2(r_i + r_j) = "
                   << 2.0 * (radii[i] + radii[j]) << ")";
                throw structural_error(os.str());
            }
        }
}

SpacePoint center_of_mass(const WeightedPointCloud& mu, const SpatialBall& ball) {
    mu.validate();
    const auto idx = mu.inside(ball);
    double m = 0.0;
    SpacePoint c = SpacePoint::zero(ball.center.n);
    for (std::size_t i : idx) {
        m += mu.weights[i];
        c = c + mu.points[i] * mu.weights[i];
    }
    if (!(m > 0.0)) throw domain_error("center_of_mass: zero mass in the ball");
    return c * (1.0 / m);
}

MomentSpectrum moment_spectrum(const WeightedPointCloud& mu,
                               const SpatialBall& ball) {
    const int n = ball.center.n;
    MomentSpectrum spec;
    spec.x_cm = center_of_mass(mu, ball);
    const auto idx = mu.inside(ball);
    double m = 0.0;
    for (std::size_t i : idx) m += mu.weights[i];
    spec.mass = m;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i : idx) {
        const SpacePoint d = mu.points[i] - spec.x_cm;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) M(a, b) += mu.weights[i] * d[a] * d[b];
    }
    M /= m;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    // ascending -> descending, with a deterministic sign convention
    spec.lambda.resize(n);
    spec.v.resize(n, SpacePoint::zero(n));
    for (int i = 0; i < n; ++i) {
        const int src = n - 1 - i;
        spec.lambda[i] = std::max(es.eigenvalues()(src), 0.0);
        Eigen::VectorXd col = es.eigenvectors().col(src);
        int pivot = 0;
        for (int a = 1; a < n; ++a)
            if (std::abs(col(a)) > std::abs(col(pivot))) pivot = a;
        if (col(pivot) < 0.0) col = -col;
        for (int a = 0; a < n; ++a) spec.v[i][a] = col(a);
    }
    return spec;
}

double displacement(const WeightedPointCloud& mu, const SpatialBall& ball,
                    int k) {
    const int n = ball.center.n;
    if (k < 0 || k > n) throw domain_error("displacement: k out of range [0, n]");
    const MomentSpectrum spec = moment_spectrum(mu, ball);
    double tail = 0.0;
    for (int i = k; i < n; ++i) tail += spec.lambda[i];
    return std::pow(ball.radius, -double(k) - 2.0) * spec.mass * tail;
}

namespace {

SpacePoint direction_from_angles(int n, const double* ang) {
    SpacePoint d = SpacePoint::zero(n);
    if (n == 2) {
        d[0] = std::cos(ang[0]);
        d[1] = std::sin(ang[0]);
    } else {
        d[0] = std::sin(ang[0]) * std::cos(ang[1]);
        d[1] = std::sin(ang[0]) * std::sin(ang[1]);
        d[2] = std::cos(ang[0]);
    }
    return d;
}

// objective r^{-k-2} sum_i w_i dist^2(y_i, L) for the plane encoded by the
// parameter vector (base coords, then angles)
struct PlaneSearch {
    const WeightedPointCloud* mu;
    std::vector<std::size_t> idx;
    int n;
    int k;
    double r;

    double objective(const std::vector<double>& par) const {
        AffineSubspace L;
        L.base = SpacePoint::zero(n);
        for (int a = 0; a < n; ++a) L.base[a] = par[a];
        if (k == 1) {
            L.basis.push_back(direction_from_angles(n, par.data() + n));
        } else if (k == 2 && n == 3) {
            // plane with unit normal nu: dist^2 = <y-b, nu>^2
            const SpacePoint nu = direction_from_angles(n, par.data() + n);
            double s = 0.0;
            for (std::size_t i : idx) {
                const double c = (mu->points[i] - L.base).dot(nu);
                s += mu->weights[i] * c * c;
            }
            return std::pow(r, -double(k) - 2.0) * s;
        }
        double s = 0.0;
        for (std::size_t i : idx) s += mu->weights[i] * L.dist2(mu->points[i]);
        return std::pow(r, -double(k) - 2.0) * s;
    }
};

} // namespace

double displacement_bruteforce(const WeightedPointCloud& mu,
                               const SpatialBall& ball, int k,
                               int resolution) {
    const int n = ball.center.n;
    if (n > 3)
        throw guard_error("displacement_bruteforce: cost guard n <= 3");
    if (k < 0 || k > n)
        throw domain_error("displacement_bruteforce: k out of range");

    PlaneSearch search;
    search.mu = &mu;
    search.idx = mu.inside(ball);
    search.n = n;
    search.k = k;
    search.r = ball.radius;
    if (search.idx.size() > 60)
        throw guard_error("displacement_bruteforce: cost guard <= 60 points");
    if (search.idx.empty())
        throw domain_error("displacement_bruteforce: zero mass in the ball");
    if (k == n) return 0.0;

    const int n_ang = k == 0 ? 0 : (n == 2 ? 1 : 2);
    std::vector<double> lo(n + n_ang), hi(n + n_ang);
    std::vector<int> steps(n + n_ang);
    for (int a = 0; a < n; ++a) {
        lo[a] = ball.center[a] - ball.radius;
        hi[a] = ball.center[a] + ball.radius;
        steps[a] = std::max(4, resolution / 2);
    }
    for (int a = 0; a < n_ang; ++a) {
        lo[n + a] = 0.0;
        hi[n + a] = kPi;
        steps[n + a] = std::max(6, resolution);
    }

    std::vector<double> best_par(n + n_ang, 0.0);
    double best = std::numeric_limits<double>::infinity();

    const int rounds = 10;
    for (int round = 0; round < rounds; ++round) {
        // scan the product grid
        const int m = n + n_ang;
        std::vector<int> counter(m, 0);
        std::vector<double> par(m);
        for (;;) {
            for (int a = 0; a < m; ++a) {
                par[a] = steps[a] == 1
                             ? 0.5 * (lo[a] + hi[a])
                             : lo[a] + (hi[a] - lo[a]) * double(counter[a]) /
                                           double(steps[a] - 1);
            }
            const double val = search.objective(par);
            if (val < best) {
                best = val;
                best_par = par;
            }
            int a = 0;
            for (; a < m; ++a) {
                if (++counter[a] < steps[a]) break;
                counter[a] = 0;
            }
            if (a == m) break;
        }
        // shrink the window around the best parameters
        for (int a = 0; a < m; ++a) {
            const double cell =
                (hi[a] - lo[a]) / double(std::max(steps[a] - 1, 1));
            lo[a] = best_par[a] - 1.5 * cell;
            hi[a] = best_par[a] + 1.5 * cell;
            steps[a] = 7;
        }
    }
    return best;
}

ReifenbergReport reifenberg_check(const PackingMeasure& P,
                                  const SpatialBall& root, double delta) {
    P.verify_disjoint();
    for (std::size_t i = 0; i < P.centers.size(); ++i) {
        if (dist(P.centers[i], root.center) > root.radius * kBallTol) {
            std::ostringstream os;
            os << "reifenberg_check: atom " << i << " lies outside the root ball";
            throw structural_error(os.str());
        }
    }

    const WeightedPointCloud mu = P.as_cloud();
    const int n = root.center.n;
    const int k = P.k;
    const double r = root.radius;
    const double scale_floor = 4.0 * P.min_radius();

    // global dyadic scale set s_m = 2r * 2^{-m}
    std::vector<double> scales;
    for (double s = 2.0 * r; s >= scale_floor * (1.0 - 1e-12); s *= 0.5)
        scales.push_back(s);

    // memoized per-atom displacements: D^k_mu(y_j, s_m); zero local mass
    // contributes zero (single-atom balls give 0 as well)
    std::vector<std::vector<double>> disp(P.centers.size(),
                                          std::vector<double>(scales.size(), 0.0));
    for (std::size_t j = 0; j < P.centers.size(); ++j) {
        for (std::size_t m = 0; m < scales.size(); ++m) {
            const SpatialBall b{P.centers[j], scales[m]};
            if (mu.inside(b).empty()) continue;
            disp[j][m] = displacement(mu, b, k);
        }
    }

    ReifenbergReport rep;
    rep.delta = delta;
    rep.k = k;

    // test-ball mesh: lattice pitch r/4, dyadic radii, B_t(x) inside B_2r(x0)
    const double pitch = r / 4.0;
    const int span = int(std::floor(2.0 * r / pitch));
    std::vector<SpacePoint> lattice;
    std::vector<int> counter(n, -span);
    for (;;) {
        SpacePoint x = root.center;
        for (int a = 0; a < n; ++a) x[a] += pitch * double(counter[a]);
        if (dist(x, root.center) <= 2.0 * r) lattice.push_back(x);
        int a = 0;
        for (; a < n; ++a) {
            if (++counter[a] <= span) break;
            counter[a] = -span;
        }
        if (a == n) break;
    }

    rep.all_passed = true;
    for (double t = 2.0 * r; t >= scale_floor * (1.0 - 1e-12); t *= 0.5) {
        for (const SpacePoint& x : lattice) {
            if (dist(x, root.center) + t > 2.0 * r * kBallTol) continue;
            ReifenbergBallRecord rec;
            rec.center = x;
            rec.t = t;
            const SpatialBall tb{x, t};
            for (std::size_t j = 0; j < P.centers.size(); ++j) {
                if (dist(P.centers[j], x) > t * kBallTol) continue;
                for (std::size_t m = 0; m < scales.size(); ++m) {
                    if (scales[m] > 2.0 * t * kBallTol) continue;
                    rec.sum += mu.weights[j] * disp[j][m];
                }
            }
            rec.bound = delta * std::pow(t, k);
            rec.passed = rec.sum < rec.bound;
            if (!rec.passed) rep.all_passed = false;
            rep.balls.push_back(rec);
        }
    }

    double root_mass = 0.0;
    for (std::size_t i : mu.inside(root)) root_mass += mu.weights[i];
    rep.packing_ratio = root_mass / std::pow(r, k);
    return rep;
}

double jones_functional(const WeightedPointCloud& mu, const SpacePoint& x,
                        int k, const std::vector<double>& scales) {
    if (scales.empty()) throw domain_error("jones_functional: empty scale list");
    double top = 0.0;
    for (double s : scales) top = std::max(top, s);
    if (mu.inside({x, top}).empty())
        throw domain_error("jones_functional: zero mass at the largest scale");
    const double log2 = std::log(2.0);
    double sum = 0.0;
    for (double s : scales) {
        const SpatialBall b{x, s};
        if (mu.inside(b).empty()) continue;
        sum += displacement(mu, b, k) * log2;
    }
    return sum;
}

L2BestAuditReport l2_best_audit(const SpaceTimeField& f,
                                const WeightedPointCloud& mu,
                                const SpatialBall& ball, double t0, int k,
                                const DensityOptions& opts) {
    mu.validate();
    for (const auto& p : mu.points)
        if (dist(p, ball.center) > ball.radius * kBallTol)
            throw domain_error("l2_best_audit: mu not supported in the ball");

    L2BestAuditReport rep;
    rep.r = ball.radius;
    rep.k = k;
    rep.lhs = displacement(mu, ball, k);

    const double r = ball.radius;
    double integral = 0.0;
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
        const SpaceTimePoint y(mu.points[i], t0);
        const double w = density_gap_W(f, y, 2.0 * r, 0.5 * r, opts);
        rep.atom_gaps.push_back(w);
        integral += mu.weights[i] * (w + r);
    }
    rep.rhs_raw = std::pow(r, -double(k)) * integral;
    rep.ratio = rep.rhs_raw != 0.0 ? rep.lhs / rep.rhs_raw : 0.0;
    return rep;
}

} // namespace hmf
