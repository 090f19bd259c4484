#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hmf/errors.hpp"

namespace hmf {

inline constexpr int kMaxDim = 4;    // ambient dimension cap
inline constexpr int kMaxTarget = 4; // target dimension cap

// A point of R^n, n in {1..4}. Fixed capacity, value semantics.
struct SpacePoint {
    std::array<double, kMaxDim> c{};
    int n = 0;

    SpacePoint() = default;
    SpacePoint(std::initializer_list<double> v) {
        if (v.size() == 0 || v.size() > kMaxDim)
            throw domain_error("SpacePoint: dimension must be in [1,4]");
        n = static_cast<int>(v.size());
        int i = 0;
        for (double x : v) c[i++] = x;
    }
    static SpacePoint zero(int dim) {
        if (dim < 1 || dim > kMaxDim)
            throw domain_error("SpacePoint: dimension must be in [1,4]");
        SpacePoint p;
        p.n = dim;
        return p;
    }
    double operator[](int i) const { return c[i]; }
    double& operator[](int i) { return c[i]; }

    SpacePoint operator+(const SpacePoint& o) const {
        SpacePoint r = *this;
        for (int i = 0; i < n; ++i) r.c[i] += o.c[i];
        return r;
    }
    SpacePoint operator-(const SpacePoint& o) const {
        SpacePoint r = *this;
        for (int i = 0; i < n; ++i) r.c[i] -= o.c[i];
        return r;
    }
    SpacePoint operator*(double s) const {
        SpacePoint r = *this;
        for (int i = 0; i < n; ++i) r.c[i] *= s;
        return r;
    }
    double dot(const SpacePoint& o) const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += c[i] * o.c[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }
};

inline double dist(const SpacePoint& a, const SpacePoint& b) {
    if (a.n != b.n) throw domain_error("dist: dimension mismatch");
    return (a - b).norm();
}

struct SpaceTimePoint {
    SpacePoint x;
    double t = 0.0;

    SpaceTimePoint() = default;
    SpaceTimePoint(SpacePoint x_, double t_) : x(x_), t(t_) {}
};

// dist_P(X,Y) = (|x-y|^2 + |t-s|)^{1/2}
double parabolic_distance(const SpaceTimePoint& X, const SpaceTimePoint& Y);

struct SpatialBall {
    SpacePoint center;
    double radius = 0.0;
};

// B_r(x) x (t - r^2, t + r^2)
struct ParabolicBall {
    SpaceTimePoint center;
    double radius = 0.0;

    ParabolicBall(SpaceTimePoint c, double r) : center(c), radius(r) {
        if (!(r > 0.0)) throw domain_error("ParabolicBall: radius must be > 0");
    }
    bool contains(const SpaceTimePoint& Y) const {
        if (Y.x.n != center.x.n)
            throw domain_error("ParabolicBall: dimension mismatch");
        return (Y.x - center.x).norm2() < radius * radius &&
               std::abs(Y.t - center.t) < radius * radius;
    }
};

// Uniform axis-aligned grid. Box = prod_i [origin_i, origin_i + h*(count_i-1)].
class Grid {
public:
    Grid() = default;
    Grid(int dim, const std::array<double, kMaxDim>& origin,
         const std::array<std::size_t, kMaxDim>& counts, double spacing);

    int dim() const { return dim_; }
    double spacing() const { return h_; }
    std::size_t count(int axis) const { return counts_[axis]; }
    double origin(int axis) const { return origin_[axis]; }
    double extent(int axis) const { return h_ * double(counts_[axis] - 1); }
    double axis_max(int axis) const { return origin_[axis] + extent(axis); }
    std::size_t node_count() const { return total_; }

    double coord(int axis, std::size_t i) const { return origin_[axis] + h_ * double(i); }
    std::size_t stride(int axis) const { return strides_[axis]; }
    SpacePoint node(std::size_t flat) const;
    std::size_t flat_index(const std::array<std::size_t, kMaxDim>& idx) const;
    std::array<std::size_t, kMaxDim> multi_index(std::size_t flat) const;

    bool inside_box(const SpacePoint& x, double tol = 0.0) const;

    // Index range [lo, hi] of nodes with coord in [c - r, c + r] on an axis,
    // clamped to the grid; empty = lo > hi.
    std::pair<std::size_t, std::size_t> index_window(int axis, double c,
                                                     double r) const;

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && counts_ == o.counts_ && origin_ == o.origin_ &&
               h_ == o.h_;
    }

    // Convenience: cubic grid centered on the origin with full side length.
    static Grid centered_cube(int dim, double side, std::size_t nodes_per_axis);

private:
    int dim_ = 0;
    std::array<double, kMaxDim> origin_{};
    std::array<std::size_t, kMaxDim> counts_{};
    double h_ = 0.0;
    std::size_t total_ = 0;
    std::array<std::size_t, kMaxDim> strides_{};
};

// One time slice of a discretized map u: grid -> R^d, with cached gradient
// (second-order central differences, one-sided at faces) and an optional
// cached time derivative. Treat as immutable once published; mutation through
// set_value invalidates the caches.
class FieldSnapshot {
public:
    FieldSnapshot() = default;
    FieldSnapshot(Grid grid, int target_dim, double time);

    const Grid& grid() const { return grid_; }
    int target_dim() const { return d_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

    double value(std::size_t node, int comp) const {
        return values_[node * d_ + comp];
    }
    void set_value(std::size_t node, int comp, double v) {
        values_[node * d_ + comp] = v;
        grad_fresh_ = false;
        dudt_set_ = false;
        energy_fresh_ = false;
    }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() {
        grad_fresh_ = false;
        dudt_set_ = false;
        energy_fresh_ = false;
        return values_;
    }

    // d_i u^a at a node; computes and caches the full gradient on first use.
    double gradient(std::size_t node, int axis, int comp) const;
    bool gradient_fresh() const { return grad_fresh_; }
    void refresh_gradient() const;

    // |grad u|^2 per node, derived from the gradient cache.
    double energy_density(std::size_t node) const;
    const std::vector<double>& energy_density_array() const;

    // Directional tensor e_ij = sum_a d_i u^a d_j u^a at a node.
    void directional_tensor(std::size_t node, double out[kMaxDim][kMaxDim]) const;

    bool has_dudt() const { return dudt_set_; }
    double dudt(std::size_t node, int comp) const {
        if (!dudt_set_) throw coverage_error("snapshot has no time derivative cache");
        return dudt_[node * d_ + comp];
    }
    double dudt_norm(std::size_t node) const;
    void set_dudt(std::vector<double> dudt);

    // max over nodes of | |u| - 1 |
    double max_unit_defect() const;
    // throws structural_error when the sphere constraint is violated
    void check_unit_constraint(double tol = 1e-12) const;

private:
    Grid grid_;
    int d_ = 0;
    double time_ = 0.0;
    std::vector<double> values_; // node-major, d components per node

    mutable std::vector<double> grad_;   // node-major, n*d per node
    mutable bool grad_fresh_ = false;
    mutable std::vector<double> energy_; // |grad u|^2 per node
    mutable bool energy_fresh_ = false;
    std::vector<double> dudt_;
    bool dudt_set_ = false;
};

// Multilinear interpolation of node values; exact at nodes and on affine
// fields. x must lie inside the grid box.
std::vector<double> sample_field(const FieldSnapshot& f, const SpacePoint& x);

// Sum of f(node) over grid nodes with |node - center| <= radius, iterating
// only the bounding-box index window. Deterministic for any thread count.
double ball_window_sum(const Grid& g, const SpacePoint& center, double radius,
                       const std::function<double(std::size_t)>& f);
// Max of f(node) over the same node set; -inf when the set is empty.
double ball_window_max(const Grid& g, const SpacePoint& center, double radius,
                       const std::function<double(std::size_t)>& f);
// Serial visit of the same node set (for accumulations into local state).
void ball_window_visit(const Grid& g, const SpacePoint& center, double radius,
                       const std::function<void(std::size_t)>& f);

// Ordered snapshots at strictly increasing times on one shared grid.
class SpaceTimeField {
public:
    SpaceTimeField() = default;

    void append(FieldSnapshot snap);
    std::size_t size() const { return snaps_.size(); }
    bool empty() const { return snaps_.empty(); }
    const FieldSnapshot& at(std::size_t i) const { return snaps_[i]; }
    FieldSnapshot& at_mutable(std::size_t i) { return snaps_[i]; }
    const Grid& grid() const;

    double time_first() const;
    double time_last() const;
    // Index of the last snapshot with time <= t (throws coverage_error when
    // t precedes the first snapshot).
    std::size_t lower_snapshot(double t) const;
    // Nearest recorded time to t.
    double nearest_time(double t) const;
    // Throws coverage_error naming the missing interval unless
    // [t0,t1] is within the recorded range (with tolerance).
    void require_time_range(double t0, double t1, const std::string& what) const;

private:
    std::vector<FieldSnapshot> snaps_;
};

} // namespace hmf
