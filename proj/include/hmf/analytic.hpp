#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "hmf/geometry.hpp"

namespace hmf {

// A static map with closed-form value and energy density, used as exact
// reference data by the density, strata and covering modules. The singular
// distance lets quadratures subdivide cells near a known singular locus.
class AnalyticField {
public:
    virtual ~AnalyticField() = default;
    virtual int dim() const = 0;
    virtual int target_dim() const = 0;
    virtual std::vector<double> value(const SpacePoint& x) const = 0;
    // |grad u|^2 at x
    virtual double energy_density(const SpacePoint& x) const = 0;
    // distance from x to the singular locus; +inf for smooth fields
    virtual double singular_distance(const SpacePoint& x) const {
        (void)x;
        return std::numeric_limits<double>::infinity();
    }
};

// u(x) = (x-c)/|x-c| into S^{n-1}; |grad u|^2 = (n-1)/|x-c|^2.
class HedgehogField : public AnalyticField {
public:
    HedgehogField(int dim, SpacePoint center);
    explicit HedgehogField(int dim) : HedgehogField(dim, SpacePoint::zero(dim)) {}

    int dim() const override { return n_; }
    int target_dim() const override { return n_; }
    std::vector<double> value(const SpacePoint& x) const override;
    double energy_density(const SpacePoint& x) const override;
    double singular_distance(const SpacePoint& x) const override;
    const SpacePoint& center() const { return center_; }

private:
    int n_;
    SpacePoint center_;
};

// n = 3 only: u(x) = (x2,x3)/|(x2,x3)| into S^1, singular along the x1-axis;
// |grad u|^2 = 1/(x2^2+x3^2).
class LineSingularField : public AnalyticField {
public:
    LineSingularField() = default;

    int dim() const override { return 3; }
    int target_dim() const override { return 2; }
    std::vector<double> value(const SpacePoint& x) const override;
    double energy_density(const SpacePoint& x) const override;
    double singular_distance(const SpacePoint& x) const override;
};

// Samples an analytic field onto a grid. Throws when a node is within
// min_singular_gap of the singular locus (caller shifts the grid instead).
FieldSnapshot sample_analytic(const AnalyticField& f, const Grid& grid,
                              double time, double min_singular_gap = 1e-9);

// A static two-snapshot trajectory spanning [t0, t1], for running the
// discrete analysis pipeline on analytic reference data.
SpaceTimeField static_trajectory(const AnalyticField& f, const Grid& grid,
                                 double t0, double t1);

} // namespace hmf
