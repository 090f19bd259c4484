#include "hmf/densities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "hmf/par.hpp"

namespace hmf {

namespace {
const double kPi = std::acos(-1.0);
}

CutoffProfile::CutoffProfile(SpacePoint center, double scale)
    : center_(center), scale_(scale) {
    if (!(scale > 0.0)) throw domain_error("CutoffProfile: scale must be > 0");
}

namespace {
// quintic smoothstep and its derivative on [0,1]
inline double smoothstep5(double t) {
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}
inline double smoothstep5_d(double t) {
    return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}
} // namespace

double CutoffProfile::operator()(const SpacePoint& x) const {
    const double rho = dist(x, center_) / scale_;
    if (rho <= 1.0) return 1.0;
    if (rho >= 2.0) return 0.0;
    return 1.0 - smoothstep5(rho - 1.0);
}

double CutoffProfile::grad_norm(const SpacePoint& x) const {
    const double rho = dist(x, center_) / scale_;
    if (rho <= 1.0 || rho >= 2.0) return 0.0;
    return smoothstep5_d(rho - 1.0) / scale_;
}

std::string CutoffProfile::id() const {
    std::ostringstream os;
    os << "quintic-bump(scale=" << scale_ << ",center=(";
    for (int i = 0; i < center_.n; ++i) os << (i ? "," : "") << center_[i];
    os << "))";
    return os.str();
}

void CutoffProfile::validate() const {
    const int samples = 4096;
    for (int i = 0; i <= samples; ++i) {
        const double rho = 2.5 * double(i) / samples;
        SpacePoint x = center_;
        x[0] += rho * scale_;
        const double p = (*this)(x);
        if (p < 0.0 || p > 1.0)
            throw structural_error("CutoffProfile: range bound violated");
        if (rho <= 1.0 && p != 1.0)
            throw structural_error("CutoffProfile: must be 1 on the inner ball");
        if (grad_norm(x) > 10.0 / scale_)
            throw structural_error("CutoffProfile: gradient bound violated");
    }
}

double backward_heat_kernel(const SpaceTimePoint& X0, const SpaceTimePoint& X) {
    if (X0.x.n != X.x.n)
        throw domain_error("backward_heat_kernel: dimension mismatch");
    const double tau = X0.t - X.t;
    if (!(tau > 0.0))
        throw domain_error("backward_heat_kernel: requires t < t0");
    const int n = X0.x.n;
    const double r2 = (X.x - X0.x).norm2();
    return std::pow(4.0 * kPi * tau, -0.5 * n) * std::exp(-r2 / (4.0 * tau));
}

// ---------------------------------------------------------------------------
// Discrete path

namespace {

// integral of e(x,t) * phi^2(x) * G_{X0}(x,t) dx at an exact time t, with the
// energy density linearly blended between the bracketing snapshots
double kernel_slice_at_time(const SpaceTimeField& f, const SpaceTimePoint& X0,
                            double t, const DensityOptions& opts,
                            double* trunc_radius, double* interp_gap) {
    const double tau = X0.t - t;
    if (!(tau > 0.0))
        throw domain_error("kernel slice at or after the kernel center time");
    const Grid& g = f.grid();
    const std::size_t lo = f.lower_snapshot(t);
    std::size_t hi = lo;
    double w = 0.0;
    if (std::abs(f.at(lo).time() - t) > 1e-12 * (1.0 + std::abs(t)) &&
        lo + 1 < f.size()) {
        hi = lo + 1;
        w = (t - f.at(lo).time()) / (f.at(hi).time() - f.at(lo).time());
    }
    if (interp_gap)
        *interp_gap = std::max(*interp_gap, f.at(hi).time() - f.at(lo).time());
    const auto& e_lo = f.at(lo).energy_density_array();
    const auto& e_hi = f.at(hi).energy_density_array();

    const int n = g.dim();
    const double hn = std::pow(g.spacing(), n);
    const double norm = std::pow(4.0 * kPi * tau, -0.5 * n);
    // G/Gmax < kernel_cut  <=>  |x-x0|^2 > 4 tau ln(1/cut)
    const double rcut2 = 4.0 * tau * std::log(1.0 / opts.kernel_cut);
    if (trunc_radius) *trunc_radius = std::max(*trunc_radius, std::sqrt(rcut2));
    const SpacePoint x0 = X0.x;
    const bool has_cut = opts.cutoff.has_value();
    return hn * ball_window_sum(g, x0, std::sqrt(rcut2), [&](std::size_t node) {
        const SpacePoint x = g.node(node);
        const double r2 = (x - x0).norm2();
        double wk = norm * std::exp(-r2 / (4.0 * tau));
        if (has_cut) {
            const double p = (*opts.cutoff)(x);
            if (p == 0.0) return 0.0;
            wk *= p * p;
        }
        const double e = (1.0 - w) * e_lo[node] + w * e_hi[node];
        return e * wk;
    });
}

// trapezoid of the kernel slice over [ta, tb] with knots at the recorded
// times plus the exact interval endpoints
double kernel_band_integral(const SpaceTimeField& f, const SpaceTimePoint& X0,
                            double ta, double tb, const DensityOptions& opts,
                            std::size_t* knots_out) {
    f.require_time_range(ta, tb, "density band integral");
    std::vector<double> ts{ta};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = f.at(i).time();
        if (t > ta + 1e-12 && t < tb - 1e-12) ts.push_back(t);
    }
    ts.push_back(tb);
    // subdivide coarse intervals; interpolated knots blend the field linearly
    if (opts.min_time_knots > 2) {
        const double max_dt =
            (tb - ta) / double(opts.min_time_knots - 1);
        std::vector<double> refined;
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            refined.push_back(ts[i]);
            const double gap = ts[i + 1] - ts[i];
            const int extra = int(std::ceil(gap / max_dt)) - 1;
            for (int j = 1; j <= extra; ++j)
                refined.push_back(ts[i] + gap * double(j) / double(extra + 1));
        }
        refined.push_back(ts.back());
        ts = std::move(refined);
    }
    std::vector<double> vs;
    vs.reserve(ts.size());
    for (double t : ts)
        vs.push_back(kernel_slice_at_time(f, X0, t, opts, nullptr, nullptr));
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        sum += 0.5 * (vs[i] + vs[i + 1]) * (ts[i + 1] - ts[i]);
    if (knots_out) *knots_out = ts.size();
    return sum;
}

// integral over B_rho(x0) of |grad u|^2 dx
double ball_energy_integral(const FieldSnapshot& snap, const SpacePoint& x0,
                            double rho) {
    const Grid& g = snap.grid();
    const double hn = std::pow(g.spacing(), g.dim());
    const auto& e = snap.energy_density_array();
    return hn *
           ball_window_sum(g, x0, rho, [&](std::size_t node) { return e[node]; });
}

// Trapezoid of a per-snapshot integral I over [ta, tb], with linear
// interpolation of I at the interval endpoints. knots_out counts the
// trapezoid knots used.
double time_trapezoid(const SpaceTimeField& f, double ta, double tb,
                      const std::function<double(std::size_t)>& integral_at,
                      std::size_t* knots_out) {
    f.require_time_range(ta, tb, "density time integral");
    if (tb <= ta) return 0.0;

    std::vector<double> ts;
    std::vector<double> vs;
    std::vector<double> cache(f.size(),
                              std::numeric_limits<double>::quiet_NaN());
    auto at = [&](std::size_t i) {
        if (std::isnan(cache[i])) cache[i] = integral_at(i);
        return cache[i];
    };
    auto interpolated = [&](double t) {
        const std::size_t lo = f.lower_snapshot(t);
        if (std::abs(f.at(lo).time() - t) < 1e-12 * (1.0 + std::abs(t)))
            return at(lo);
        const std::size_t hi = std::min(lo + 1, f.size() - 1);
        if (hi == lo) return at(lo);
        const double t0 = f.at(lo).time(), t1 = f.at(hi).time();
        const double w = (t - t0) / (t1 - t0);
        return (1.0 - w) * at(lo) + w * at(hi);
    };

    ts.push_back(ta);
    vs.push_back(interpolated(ta));
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = f.at(i).time();
        if (t > ta + 1e-12 && t < tb - 1e-12) {
            ts.push_back(t);
            vs.push_back(at(i));
        }
    }
    ts.push_back(tb);
    vs.push_back(interpolated(tb));

    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        sum += 0.5 * (vs[i] + vs[i + 1]) * (ts[i + 1] - ts[i]);
    if (knots_out) *knots_out = ts.size();
    return sum;
}

} // namespace

double density_E(const SpaceTimeField& f, const SpaceTimePoint& X0, double rho) {
    if (!(rho > 0.0)) throw domain_error("density_E: rho must be > 0");
    const double n = f.grid().dim();
    const double v = time_trapezoid(
        f, X0.t - rho * rho, X0.t + rho * rho,
        [&](std::size_t i) { return ball_energy_integral(f.at(i), X0.x, rho); },
        nullptr);
    return std::pow(rho, -n) * v;
}

double density_E_minus(const SpaceTimeField& f, const SpaceTimePoint& X0,
                       double rho) {
    if (!(rho > 0.0)) throw domain_error("density_E_minus: rho must be > 0");
    const double n = f.grid().dim();
    const double v = time_trapezoid(
        f, X0.t - rho * rho, X0.t,
        [&](std::size_t i) { return ball_energy_integral(f.at(i), X0.x, rho); },
        nullptr);
    return std::pow(rho, -n) * v;
}

double density_Psi(const SpaceTimeField& f, const SpaceTimePoint& X0, double rho,
                   const DensityOptions& opts) {
    if (!(rho > 0.0)) throw domain_error("density_Psi: rho must be > 0");
    const double ts = X0.t - rho * rho;
    f.require_time_range(ts, ts, "Psi slice");
    return 0.5 * rho * rho *
           kernel_slice_at_time(f, X0, ts, opts, nullptr, nullptr);
}

double density_Phi(const SpaceTimeField& f, const SpaceTimePoint& X0, double rho,
                   const DensityOptions& opts) {
    if (!(rho > 0.0)) throw domain_error("density_Phi: rho must be > 0");
    return 0.5 * kernel_band_integral(f, X0, X0.t - 4.0 * rho * rho,
                                      X0.t - rho * rho, opts, nullptr);
}

DensityReport density_suite(const SpaceTimeField& f, const SpaceTimePoint& X0,
                            double rho, const DensityOptions& opts) {
    DensityReport rep;
    rep.center = X0;
    rep.radius = rho;
    rep.E = density_E(f, X0, rho);
    rep.E_minus = density_E_minus(f, X0, rho);
    const double ts = X0.t - rho * rho;
    f.require_time_range(ts, ts, "Psi slice");
    double gap = 0.0, trunc = 0.0;
    rep.Psi = 0.5 * rho * rho *
              kernel_slice_at_time(f, X0, ts, opts, &trunc, &gap);
    std::size_t knots = 0;
    rep.Phi = 0.5 * kernel_band_integral(f, X0, X0.t - 4.0 * rho * rho,
                                         X0.t - rho * rho, opts, &knots);
    rep.space_nodes = f.grid().node_count();
    rep.slice_interp_gap = gap;
    rep.truncation_radius = trunc;
    rep.time_knots = knots;
    return rep;
}

double density_gap_W(const SpaceTimeField& f, const SpaceTimePoint& X0,
                     double R, double r, const DensityOptions& opts) {
    if (!(r > 0.0) || r > R)
        throw domain_error("density_gap_W: need 0 < r <= R");
    return density_Phi(f, X0, R, opts) - density_Phi(f, X0, r, opts);
}

// ---------------------------------------------------------------------------
// Analytic path

namespace {

// integral over R^n (box-truncated) of e(x) phi^2(x) G_tau(x - x0) dx,
// per-slice box, with subdivision of cells near the singular locus
double analytic_slice_integral(const AnalyticField& f, const SpacePoint& x0,
                               double tau, const AnalyticQuadrature& q) {
    const int n = f.dim();
    const double L = q.box_factor * std::sqrt(tau);
    const std::size_t N = q.nodes_per_axis;
    const double h = 2.0 * L / double(N - 1);
    const double norm = std::pow(4.0 * kPi * tau, -0.5 * n);
    const double refine_r = q.refine_radius * h;
    const int m = q.refine_factor;
    const bool has_cut = q.cutoff.has_value();

    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= N;

    auto integrand = [&](const SpacePoint& x) {
        const double r2 = (x - x0).norm2();
        double w = norm * std::exp(-r2 / (4.0 * tau));
        if (has_cut) {
            const double p = (*q.cutoff)(x);
            if (p == 0.0) return 0.0;
            w *= p * p;
        }
        return f.energy_density(x) * w;
    };

    const double cell = std::pow(h, n);
    const double subcell = cell / std::pow(double(m), n);

    return par::reduce_sum(total, [&](std::size_t flat) {
        // decode node index
        SpacePoint x = SpacePoint::zero(n);
        std::size_t rem = flat;
        std::array<std::size_t, kMaxDim> idx{};
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = rem % N;
            rem /= N;
        }
        for (int a = 0; a < n; ++a) x[a] = x0[a] - L + h * double(idx[a]);
        if (f.singular_distance(x) >= refine_r) return integrand(x) * cell;
        // subdivide this cell
        double sum = 0.0;
        std::array<int, kMaxDim> sub{};
        for (;;) {
            SpacePoint y = x;
            for (int a = 0; a < n; ++a)
                y[a] += ((double(sub[a]) + 0.5) / double(m) - 0.5) * h;
            if (f.singular_distance(y) > 1e-14) sum += integrand(y) * subcell;
            int a = 0;
            for (; a < n; ++a) {
                if (++sub[a] < m) break;
                sub[a] = 0;
            }
            if (a == n) break;
        }
        return sum;
    });
}

// integral over B_rho(x0) of e(x) dx with the same refinement
double analytic_ball_energy(const AnalyticField& f, const SpacePoint& x0,
                            double rho, const AnalyticQuadrature& q) {
    const int n = f.dim();
    const double L = rho;
    const std::size_t N = q.nodes_per_axis;
    const double h = 2.0 * L / double(N - 1);
    const double refine_r = q.refine_radius * h;
    const int m = q.refine_factor;
    const double rho2 = rho * rho;
    std::size_t total = 1;
    for (int a = 0; a < n; ++a) total *= N;
    const double cell = std::pow(h, n);
    const double subcell = cell / std::pow(double(m), n);

    return par::reduce_sum(total, [&](std::size_t flat) {
        SpacePoint x = SpacePoint::zero(n);
        std::size_t rem = flat;
        for (int a = n - 1; a >= 0; --a) {
            x[a] = x0[a] - L + h * double(rem % N);
            rem /= N;
        }
        const bool near_sing = f.singular_distance(x) < refine_r;
        if (!near_sing) {
            if ((x - x0).norm2() > rho2) return 0.0;
            return f.energy_density(x) * cell;
        }
        double sum = 0.0;
        std::array<int, kMaxDim> sub{};
        for (;;) {
            SpacePoint y = x;
            for (int a = 0; a < n; ++a)
                y[a] += ((double(sub[a]) + 0.5) / double(m) - 0.5) * h;
            if ((y - x0).norm2() <= rho2 && f.singular_distance(y) > 1e-14)
                sum += f.energy_density(y) * subcell;
            int a = 0;
            for (; a < n; ++a) {
                if (++sub[a] < m) break;
                sub[a] = 0;
            }
            if (a == n) break;
        }
        return sum;
    });
}

} // namespace

double density_E(const AnalyticField& f, const SpaceTimePoint& X0, double rho,
                 const AnalyticQuadrature& q) {
    if (!(rho > 0.0)) throw domain_error("density_E: rho must be > 0");
    const double s = analytic_ball_energy(f, X0.x, rho, q);
    return std::pow(rho, -f.dim()) * 2.0 * rho * rho * s;
}

double density_E_minus(const AnalyticField& f, const SpaceTimePoint& X0,
                       double rho, const AnalyticQuadrature& q) {
    if (!(rho > 0.0)) throw domain_error("density_E_minus: rho must be > 0");
    const double s = analytic_ball_energy(f, X0.x, rho, q);
    return std::pow(rho, -f.dim()) * rho * rho * s;
}

double density_Psi(const AnalyticField& f, const SpaceTimePoint& X0, double rho,
                   const AnalyticQuadrature& q) {
    if (!(rho > 0.0)) throw domain_error("density_Psi: rho must be > 0");
    return 0.5 * rho * rho * analytic_slice_integral(f, X0.x, rho * rho, q);
}

double density_Phi(const AnalyticField& f, const SpaceTimePoint& X0, double rho,
                   const AnalyticQuadrature& q) {
    if (!(rho > 0.0)) throw domain_error("density_Phi: rho must be > 0");
    const std::size_t K = std::max<std::size_t>(q.time_slices, 2);
    const double ta = rho * rho, tb = 4.0 * rho * rho;
    double sum = 0.0;
    double prev = analytic_slice_integral(f, X0.x, ta, q);
    for (std::size_t i = 1; i < K; ++i) {
        const double tau = ta + (tb - ta) * double(i) / double(K - 1);
        const double cur = analytic_slice_integral(f, X0.x, tau, q);
        sum += 0.5 * (prev + cur) * (tb - ta) / double(K - 1);
        prev = cur;
    }
    return 0.5 * sum;
}

DensityReport density_suite(const AnalyticField& f, const SpaceTimePoint& X0,
                            double rho, const AnalyticQuadrature& q) {
    DensityReport rep;
    rep.center = X0;
    rep.radius = rho;
    rep.E = density_E(f, X0, rho, q);
    rep.E_minus = density_E_minus(f, X0, rho, q);
    rep.Psi = density_Psi(f, X0, rho, q);
    rep.Phi = density_Phi(f, X0, rho, q);
    std::size_t total = 1;
    for (int a = 0; a < f.dim(); ++a) total *= q.nodes_per_axis;
    rep.space_nodes = total;
    rep.time_knots = q.time_slices;
    rep.truncation_radius = q.box_factor * 2.0 * rho;
    rep.slice_interp_gap = 0.0;
    return rep;
}

double density_gap_W(const AnalyticField& f, const SpaceTimePoint& X0, double R,
                     double r, const AnalyticQuadrature& q) {
    if (!(r > 0.0) || r > R)
        throw domain_error("density_gap_W: need 0 < r <= R");
    return density_Phi(f, X0, R, q) - density_Phi(f, X0, r, q);
}

// ---------------------------------------------------------------------------
// Monotonicity audit

namespace {

MonotonicityAudit fit_c1(std::vector<double> radii, std::vector<double> phis,
                         std::vector<double> psis) {
    MonotonicityAudit a;
    a.radii = std::move(radii);
    a.phi_values = std::move(phis);
    a.psi_values = std::move(psis);

    double scale = 0.0;
    for (double v : a.phi_values) scale = std::max(scale, std::abs(v));
    for (double v : a.psi_values) scale = std::max(scale, std::abs(v));
    const double tol = 1e-13 * (1.0 + scale);

    // candidate grid: 0 plus 40 logarithmic points in [1e-4, 1e4]
    std::vector<double> grid{0.0};
    for (int i = 0; i < 40; ++i)
        grid.push_back(std::pow(10.0, -4.0 + 8.0 * double(i) / 39.0));

    auto feasible_phi = [&](double c1) {
        for (std::size_t i = 0; i + 1 < a.radii.size(); ++i) {
            const double r = a.radii[i], R = a.radii[i + 1];
            const double expr = a.phi_values[i + 1] * std::exp(c1 * (R - r)) -
                                a.phi_values[i] + c1 * (R - r);
            if (expr < -tol) return false;
        }
        return true;
    };
    auto feasible_psi = [&](double c1) {
        for (std::size_t i = 0; i + 1 < a.radii.size(); ++i) {
            const double r = a.radii[i], R = a.radii[i + 1];
            const double expr =
                a.psi_values[i + 1] - a.psi_values[i] + c1 * (R - r);
            if (expr < -tol) return false;
        }
        return true;
    };

    for (double c1 : grid) {
        if (!a.phi_feasible && feasible_phi(c1)) {
            a.phi_feasible = true;
            a.c1_phi = c1;
        }
        if (!a.psi_feasible && feasible_psi(c1)) {
            a.psi_feasible = true;
            a.c1_psi = c1;
        }
    }
    a.note = "Psi monotonicity holds for a.e. r only; isolated violations at "
             "tabulated radii are treated as quadrature noise";
    if (!a.phi_feasible || !a.psi_feasible)
        a.note += "; no feasible C1 on the candidate grid";
    return a;
}

} // namespace

MonotonicityAudit monotonicity_audit(const SpaceTimeField& f,
                                     const SpaceTimePoint& X0,
                                     const std::vector<double>& radii,
                                     const DensityOptions& opts) {
    if (radii.size() < 2)
        throw domain_error("monotonicity_audit: need at least two radii");
    std::vector<double> phis, psis;
    for (double r : radii) {
        phis.push_back(density_Phi(f, X0, r, opts));
        psis.push_back(density_Psi(f, X0, r, opts));
    }
    return fit_c1(radii, std::move(phis), std::move(psis));
}

MonotonicityAudit monotonicity_audit(const AnalyticField& f,
                                     const SpaceTimePoint& X0,
                                     const std::vector<double>& radii,
                                     const AnalyticQuadrature& q) {
    if (radii.size() < 2)
        throw domain_error("monotonicity_audit: need at least two radii");
    std::vector<double> phis, psis;
    for (double r : radii) {
        phis.push_back(density_Phi(f, X0, r, q));
        psis.push_back(density_Psi(f, X0, r, q));
    }
    return fit_c1(radii, std::move(phis), std::move(psis));
}

// ---------------------------------------------------------------------------
// Directional energy

std::vector<double> DirectionalEnergyMatrix::eigenvalues() const {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = m[i][j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = es.eigenvalues()(i);
    return out;
}

void DirectionalEnergyMatrix::check_symmetric_psd(double tol_factor) const {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (std::abs(m[i][j] - m[j][i]) > 1e-12 * (1.0 + trace()))
                throw structural_error("DirectionalEnergyMatrix: not symmetric");
    const auto ev = eigenvalues();
    if (!ev.empty() && ev.front() < -tol_factor * std::max(trace(), 1e-300))
        throw structural_error("DirectionalEnergyMatrix: not positive semidefinite");
}

DirectionalEnergyMatrix directional_energy_matrix(const SpaceTimeField& f,
                                                  const SpacePoint& x0,
                                                  double t0, double r) {
    if (!(r > 0.0)) throw domain_error("directional_energy_matrix: r must be > 0");
    const Grid& g = f.grid();
    const int n = g.dim();
    const double hn = std::pow(g.spacing(), n);

    auto tensor_integral = [&](std::size_t snap_idx, int i, int j) {
        const FieldSnapshot& snap = f.at(snap_idx);
        if (!snap.gradient_fresh()) snap.refresh_gradient();
        return hn * ball_window_sum(g, x0, r, [&](std::size_t node) {
            double t[kMaxDim][kMaxDim];
            snap.directional_tensor(node, t);
            return t[i][j];
        });
    };

    DirectionalEnergyMatrix M;
    M.n = n;
    M.center = SpaceTimePoint(x0, t0);
    M.radius = r;
    const double ta = t0 - 4.0 * r * r, tb = t0 - r * r;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = time_trapezoid(
                f, ta, tb,
                [&](std::size_t s) { return tensor_integral(s, i, j); }, nullptr);
            M.m[i][j] = std::pow(r, -n) * v;
            M.m[j][i] = M.m[i][j];
        }
    return M;
}

double symmetry_defect(const DirectionalEnergyMatrix& M, int k) {
    if (k < 0 || k >= M.n)
        throw domain_error("symmetry_defect: k out of range [0, n-1]");
    const auto ev = M.eigenvalues(); // ascending
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += ev[i];
    return s;
}

} // namespace hmf
