#include "hmf/geometry.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "hmf/par.hpp"

namespace hmf {

double parabolic_distance(const SpaceTimePoint& X, const SpaceTimePoint& Y) {
    if (X.x.n != Y.x.n)
        throw domain_error("parabolic_distance: dimension mismatch");
    return std::sqrt((X.x - Y.x).norm2() + std::abs(X.t - Y.t));
}

Grid::Grid(int dim, const std::array<double, kMaxDim>& origin,
           const std::array<std::size_t, kMaxDim>& counts, double spacing)
    : dim_(dim), origin_(origin), counts_(counts), h_(spacing) {
    if (dim < 1 || dim > kMaxDim)
        throw domain_error("Grid: dimension must be in [1,4]");
    if (!(spacing > 0.0)) throw domain_error("Grid: spacing must be > 0");
    total_ = 1;
    for (int a = 0; a < dim_; ++a) {
        if (counts_[a] < 3)
            throw domain_error("Grid: node count must be >= 3 per axis");
        total_ *= counts_[a];
    }
    // row-major: last axis fastest
    std::size_t s = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
        strides_[a] = s;
        s *= counts_[a];
    }
}

Grid Grid::centered_cube(int dim, double side, std::size_t nodes_per_axis) {
    std::array<double, kMaxDim> origin{};
    std::array<std::size_t, kMaxDim> counts{};
    for (int a = 0; a < dim; ++a) {
        origin[a] = -side / 2.0;
        counts[a] = nodes_per_axis;
    }
    const double h = side / double(nodes_per_axis - 1);
    return Grid(dim, origin, counts, h);
}

SpacePoint Grid::node(std::size_t flat) const {
    const auto idx = multi_index(flat);
    SpacePoint p = SpacePoint::zero(dim_);
    for (int a = 0; a < dim_; ++a) p[a] = coord(a, idx[a]);
    return p;
}

std::size_t Grid::flat_index(const std::array<std::size_t, kMaxDim>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim_; ++a) f += idx[a] * strides_[a];
    return f;
}

std::array<std::size_t, kMaxDim> Grid::multi_index(std::size_t flat) const {
    std::array<std::size_t, kMaxDim> idx{};
    for (int a = 0; a < dim_; ++a) {
        idx[a] = flat / strides_[a];
        flat %= strides_[a];
    }
    return idx;
}

bool Grid::inside_box(const SpacePoint& x, double tol) const {
    if (x.n != dim_) throw domain_error("Grid: dimension mismatch");
    for (int a = 0; a < dim_; ++a) {
        if (x[a] < origin_[a] - tol || x[a] > axis_max(a) + tol) return false;
    }
    return true;
}

std::pair<std::size_t, std::size_t> Grid::index_window(int axis, double c,
                                                       double r) const {
    const double lo_f = std::ceil((c - r - origin_[axis]) / h_ - 1e-12);
    const double hi_f = std::floor((c + r - origin_[axis]) / h_ + 1e-12);
    if (hi_f < 0.0 || lo_f > double(counts_[axis] - 1)) return {1, 0};
    const std::size_t lo = lo_f < 0.0 ? 0 : std::size_t(lo_f);
    std::size_t hi = hi_f < 0.0 ? 0 : std::size_t(hi_f);
    if (hi > counts_[axis] - 1) hi = counts_[axis] - 1;
    if (lo > hi) return {1, 0};
    return {lo, hi};
}

FieldSnapshot::FieldSnapshot(Grid grid, int target_dim, double time)
    : grid_(std::move(grid)), d_(target_dim), time_(time) {
    if (d_ < 1 || d_ > kMaxTarget)
        throw domain_error("FieldSnapshot: target dimension must be in [1,4]");
    values_.assign(grid_.node_count() * d_, 0.0);
}

void FieldSnapshot::refresh_gradient() const {
    const int n = grid_.dim();
    const std::size_t nn = grid_.node_count();
    grad_.assign(nn * std::size_t(n) * d_, 0.0);
    const double h = grid_.spacing();
    const auto& vals = values_;
    const int d = d_;
    const Grid& g = grid_;

    par::for_each(nn, [&](std::size_t node) {
        const auto idx = g.multi_index(node);
        for (int a = 0; a < n; ++a) {
            const std::size_t cnt = g.count(a);
            const std::size_t stride = g.stride(a);
            const std::size_t i = idx[a];
            for (int c = 0; c < d; ++c) {
                double val;
                if (i > 0 && i + 1 < cnt) {
                    val = (vals[(node + stride) * d + c] -
                           vals[(node - stride) * d + c]) / (2.0 * h);
                } else if (i == 0) {
                    val = (-3.0 * vals[node * d + c] +
                            4.0 * vals[(node + stride) * d + c] -
                            vals[(node + 2 * stride) * d + c]) / (2.0 * h);
                } else {
                    val = (3.0 * vals[node * d + c] -
                           4.0 * vals[(node - stride) * d + c] +
                           vals[(node - 2 * stride) * d + c]) / (2.0 * h);
                }
                grad_[(node * n + a) * d + c] = val;
            }
        }
    });
    grad_fresh_ = true;
}

double FieldSnapshot::gradient(std::size_t node, int axis, int comp) const {
    if (!grad_fresh_) refresh_gradient();
    return grad_[(node * grid_.dim() + axis) * d_ + comp];
}

double FieldSnapshot::energy_density(std::size_t node) const {
    return energy_density_array()[node];
}

const std::vector<double>& FieldSnapshot::energy_density_array() const {
    if (!energy_fresh_) {
        if (!grad_fresh_) refresh_gradient();
        const int n = grid_.dim();
        const std::size_t nn = grid_.node_count();
        energy_.assign(nn, 0.0);
        const int d = d_;
        par::for_each(nn, [&](std::size_t node) {
            double s = 0.0;
            for (int a = 0; a < n; ++a)
                for (int c = 0; c < d; ++c) {
                    const double gv = grad_[(node * n + a) * d + c];
                    s += gv * gv;
                }
            energy_[node] = s;
        });
        energy_fresh_ = true;
    }
    return energy_;
}

void FieldSnapshot::directional_tensor(std::size_t node,
                                       double out[kMaxDim][kMaxDim]) const {
    if (!grad_fresh_) refresh_gradient();
    const int n = grid_.dim();
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int c = 0; c < d_; ++c)
                s += grad_[(node * n + i) * d_ + c] * grad_[(node * n + j) * d_ + c];
            out[i][j] = s;
            out[j][i] = s;
        }
}

double FieldSnapshot::dudt_norm(std::size_t node) const {
    if (!dudt_set_) throw coverage_error("snapshot has no time derivative cache");
    double s = 0.0;
    for (int c = 0; c < d_; ++c) {
        const double v = dudt_[node * d_ + c];
        s += v * v;
    }
    return std::sqrt(s);
}

void FieldSnapshot::set_dudt(std::vector<double> dudt) {
    if (dudt.size() != values_.size())
        throw domain_error("set_dudt: size mismatch");
    dudt_ = std::move(dudt);
    dudt_set_ = true;
}

double FieldSnapshot::max_unit_defect() const {
    const std::size_t nn = grid_.node_count();
    const int d = d_;
    return par::reduce_max(nn, [&](std::size_t node) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) {
            const double v = values_[node * d + c];
            s += v * v;
        }
        return std::abs(std::sqrt(s) - 1.0);
    });
}

void FieldSnapshot::check_unit_constraint(double tol) const {
    const double defect = max_unit_defect();
    if (defect > tol) {
        std::ostringstream os;
        os << "sphere constraint violated: max | |u|-1 | = " << defect
           << " > " << tol;
        throw structural_error(os.str());
    }
}

std::vector<double> sample_field(const FieldSnapshot& f, const SpacePoint& x) {
    const Grid& g = f.grid();
    if (!g.inside_box(x, 1e-12 * g.spacing()))
        throw coverage_error("sample_field: point outside the grid box");
    const int n = g.dim();
    const int d = f.target_dim();
    const double h = g.spacing();

    std::array<std::size_t, kMaxDim> base{};
    std::array<double, kMaxDim> frac{};
    for (int a = 0; a < n; ++a) {
        double u = (x[a] - g.origin(a)) / h;
        const double max_u = double(g.count(a) - 1);
        if (u < 0.0) u = 0.0;
        if (u > max_u) u = max_u;
        std::size_t i = std::size_t(u);
        if (i >= g.count(a) - 1) i = g.count(a) - 2;
        base[a] = i;
        frac[a] = u - double(i);
    }

    std::vector<double> out(d, 0.0);
    const int corners = 1 << n;
    for (int corner = 0; corner < corners; ++corner) {
        double w = 1.0;
        std::array<std::size_t, kMaxDim> idx = base;
        for (int a = 0; a < n; ++a) {
            if (corner & (1 << a)) {
                idx[a] += 1;
                w *= frac[a];
            } else {
                w *= 1.0 - frac[a];
            }
        }
        const std::size_t node = g.flat_index(idx);
        for (int c = 0; c < d; ++c) out[c] += w * f.value(node, c);
    }
    return out;
}

namespace {

struct BallWindow {
    std::array<std::size_t, kMaxDim> lo{};
    std::array<std::size_t, kMaxDim> width{};
    std::size_t total = 0;
    double r2 = 0.0;

    BallWindow(const Grid& g, const SpacePoint& center, double radius) {
        const int n = g.dim();
        if (center.n != n) throw domain_error("ball_window: dimension mismatch");
        total = 1;
        for (int a = 0; a < n; ++a) {
            const auto [l, h] = g.index_window(a, center[a], radius);
            if (l > h) {
                total = 0;
                return;
            }
            lo[a] = l;
            width[a] = h - l + 1;
            total *= width[a];
        }
        r2 = radius * radius * (1.0 + 1e-12);
    }

    // returns node index, or SIZE_MAX when outside the ball
    std::size_t node(const Grid& g, const SpacePoint& center,
                     std::size_t flat) const {
        std::array<std::size_t, kMaxDim> idx{};
        std::size_t rem = flat;
        const int n = g.dim();
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = lo[a] + rem % width[a];
            rem /= width[a];
        }
        double d2 = 0.0;
        for (int a = 0; a < n; ++a) {
            const double dx = g.coord(a, idx[a]) - center[a];
            d2 += dx * dx;
        }
        if (d2 > r2) return std::size_t(-1);
        return g.flat_index(idx);
    }
};

} // namespace

double ball_window_sum(const Grid& g, const SpacePoint& center, double radius,
                       const std::function<double(std::size_t)>& f) {
    const BallWindow w(g, center, radius);
    if (w.total == 0) return 0.0;
    return par::reduce_sum(w.total, [&](std::size_t flat) {
        const std::size_t node = w.node(g, center, flat);
        return node == std::size_t(-1) ? 0.0 : f(node);
    });
}

double ball_window_max(const Grid& g, const SpacePoint& center, double radius,
                       const std::function<double(std::size_t)>& f) {
    const BallWindow w(g, center, radius);
    if (w.total == 0) return -std::numeric_limits<double>::infinity();
    return par::reduce_max(w.total, [&](std::size_t flat) {
        const std::size_t node = w.node(g, center, flat);
        return node == std::size_t(-1)
                   ? -std::numeric_limits<double>::infinity()
                   : f(node);
    });
}

void ball_window_visit(const Grid& g, const SpacePoint& center, double radius,
                       const std::function<void(std::size_t)>& f) {
    const BallWindow w(g, center, radius);
    for (std::size_t flat = 0; flat < w.total; ++flat) {
        const std::size_t node = w.node(g, center, flat);
        if (node != std::size_t(-1)) f(node);
    }
}

void SpaceTimeField::append(FieldSnapshot snap) {
    if (!snaps_.empty()) {
        if (!(snap.grid() == snaps_.front().grid()))
            throw structural_error("SpaceTimeField: snapshots must share one grid");
        if (!(snap.time() > snaps_.back().time()))
            throw structural_error("SpaceTimeField: times must be strictly increasing");
    }
    snaps_.push_back(std::move(snap));
}

const Grid& SpaceTimeField::grid() const {
    if (snaps_.empty()) throw coverage_error("SpaceTimeField: empty");
    return snaps_.front().grid();
}

double SpaceTimeField::time_first() const {
    if (snaps_.empty()) throw coverage_error("SpaceTimeField: empty");
    return snaps_.front().time();
}

double SpaceTimeField::time_last() const {
    if (snaps_.empty()) throw coverage_error("SpaceTimeField: empty");
    return snaps_.back().time();
}

std::size_t SpaceTimeField::lower_snapshot(double t) const {
    if (snaps_.empty()) throw coverage_error("SpaceTimeField: empty");
    if (t < snaps_.front().time() - 1e-12)
        throw coverage_error("SpaceTimeField: time precedes first snapshot");
    std::size_t lo = 0;
    for (std::size_t i = 0; i < snaps_.size(); ++i) {
        if (snaps_[i].time() <= t + 1e-12) lo = i;
        else break;
    }
    return lo;
}

double SpaceTimeField::nearest_time(double t) const {
    if (snaps_.empty()) throw coverage_error("SpaceTimeField: empty");
    double best = snaps_.front().time();
    for (const auto& s : snaps_)
        if (std::abs(s.time() - t) < std::abs(best - t)) best = s.time();
    return best;
}

void SpaceTimeField::require_time_range(double t0, double t1,
                                        const std::string& what) const {
    if (snaps_.empty()) throw coverage_error(what + ": no recorded snapshots");
    const double tol = 1e-9 * (1.0 + std::abs(t1 - t0));
    if (t0 < time_first() - tol || t1 > time_last() + tol) {
        std::ostringstream os;
        os << what << ": requested time interval [" << t0 << ", " << t1
           << "] not covered by recorded range [" << time_first() << ", "
           << time_last() << "]";
        throw coverage_error(os.str());
    }
}

} // namespace hmf
