#include "hmf/analytic.hpp"

#include <cmath>
#include <sstream>

#include "hmf/par.hpp"

namespace hmf {

HedgehogField::HedgehogField(int dim, SpacePoint center)
    : n_(dim), center_(center) {
    if (dim < 2 || dim > kMaxDim)
        throw domain_error("HedgehogField: dimension must be in [2,4]");
    if (center.n != dim) throw domain_error("HedgehogField: center dimension mismatch");
}

std::vector<double> HedgehogField::value(const SpacePoint& x) const {
    const SpacePoint r = x - center_;
    const double nr = r.norm();
    if (nr == 0.0) throw domain_error("HedgehogField: evaluation at the singular point");
    std::vector<double> v(n_);
    for (int i = 0; i < n_; ++i) v[i] = r[i] / nr;
    return v;
}

double HedgehogField::energy_density(const SpacePoint& x) const {
    const double r2 = (x - center_).norm2();
    if (r2 == 0.0) return std::numeric_limits<double>::infinity();
    return double(n_ - 1) / r2;
}

double HedgehogField::singular_distance(const SpacePoint& x) const {
    return (x - center_).norm();
}

std::vector<double> LineSingularField::value(const SpacePoint& x) const {
    if (x.n != 3) throw domain_error("LineSingularField: expects n = 3");
    const double p = std::sqrt(x[1] * x[1] + x[2] * x[2]);
    if (p == 0.0)
        throw domain_error("LineSingularField: evaluation on the singular axis");
    return {x[1] / p, x[2] / p};
}

double LineSingularField::energy_density(const SpacePoint& x) const {
    const double p2 = x[1] * x[1] + x[2] * x[2];
    if (p2 == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / p2;
}

double LineSingularField::singular_distance(const SpacePoint& x) const {
    return std::sqrt(x[1] * x[1] + x[2] * x[2]);
}

FieldSnapshot sample_analytic(const AnalyticField& f, const Grid& grid,
                              double time, double min_singular_gap) {
    if (grid.dim() != f.dim())
        throw domain_error("sample_analytic: grid dimension mismatch");
    FieldSnapshot snap(grid, f.target_dim(), time);
    const std::size_t nn = grid.node_count();
    // first a serial pass for the singular-node guard, so the error names
    // the offending node deterministically
    for (std::size_t i = 0; i < nn; ++i) {
        if (f.singular_distance(grid.node(i)) < min_singular_gap) {
            std::ostringstream os;
            os << "sample_analytic: node " << i << " lies within "
               << min_singular_gap
               << " of the singular locus; shift the grid box";
            throw domain_error(os.str());
        }
    }
    auto& vals = snap.mutable_values();
    const int d = f.target_dim();
    par::for_each(nn, [&](std::size_t i) {
        const auto v = f.value(grid.node(i));
        for (int c = 0; c < d; ++c) vals[i * d + c] = v[c];
    });
    return snap;
}

SpaceTimeField static_trajectory(const AnalyticField& f, const Grid& grid,
                                 double t0, double t1) {
    if (!(t1 > t0)) throw domain_error("static_trajectory: need t1 > t0");
    SpaceTimeField traj;
    FieldSnapshot a = sample_analytic(f, grid, t0);
    a.set_dudt(std::vector<double>(a.values().size(), 0.0));
    FieldSnapshot b = a;
    b.set_time(t1);
    traj.append(std::move(a));
    traj.append(std::move(b));
    return traj;
}

} // namespace hmf
