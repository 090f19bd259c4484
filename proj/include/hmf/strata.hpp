#pragma once

#include <vector>

#include "hmf/densities.hpp"
#include "hmf/geometry.hpp"

namespace hmf {

// Thresholds for singular-set detection and quantitative-stratum sampling.
// The backward density E_- drives detection: a point is flagged when
// E_-(u,(x,t),2r) > epsilon^2 at every ladder radius r. epsilon defaults to
// the value calibrated on the analytic hedgehog and line fields so that the
// flagged sets match the known singular sets within one grid cell.
struct DetectionParams {
    double epsilon = 3.18;
    double r_min = 0.0;
    double r_max = 0.0;
    std::vector<double> defect_thresholds; // per k; empty = 0.1 for every k
    double defect_floor_factor = 1e-12;

    void validate() const {
        if (!(epsilon > 0.0)) throw domain_error("DetectionParams: epsilon <= 0");
        if (!(r_min > 0.0) || !(r_min < r_max))
            throw domain_error("DetectionParams: need 0 < r_min < r_max");
    }
    // dyadic radii r_min, 2 r_min, ... up to r_max (r_max always included)
    std::vector<double> ladder() const;
    double threshold_for(int k) const {
        if (k >= 0 && k < int(defect_thresholds.size()))
            return defect_thresholds[k];
        return 0.1;
    }
};

struct StratumSample {
    double t = 0.0;
    int k = -1; // -1 for the E_- singular-slice detector
    std::vector<std::size_t> nodes;
    std::vector<SpacePoint> points;
    double r_min = 0.0;
    double r_max = 0.0;
};

enum class ContentFlavor { spatial, parabolic };

struct ContentReport {
    double alpha = 0.0;
    double r = 0.0;
    double content = 0.0;
    ContentFlavor flavor = ContentFlavor::spatial;
    double counting_cell = 0.0; // spatial cell edge of the counting grid
};

// Largest ladder radius r <= 1 with sup_{P_r(X)} (r^2 |du/dt| + r |grad u|)
// <= 1, taking the grid max over covered snapshots; 0 when none qualifies.
double regularity_scale(const SpaceTimeField& f, const SpaceTimePoint& X,
                        const DetectionParams& p);

// Grid nodes x inside the analysis region where E_-(u,(x,t),2r) > epsilon^2
// for every ladder radius r.
StratumSample extract_singular_slice(const SpaceTimeField& f, double t,
                                     const DetectionParams& p);

// Grid nodes x where at every ladder radius s the normalized symmetry defect
// sum of the (k+1) smallest eigenvalues of M(x,t,s) over max(trace, floor)
// exceeds the per-k threshold (no scale looks spatially (k+1)-symmetric).
StratumSample quantitative_stratum(const SpaceTimeField& f, double t, int k,
                                   const DetectionParams& p);

// Minkowski r-content (2r)^{alpha-n} Vol(B_r(S)) by counting-grid volume;
// refinement >= 4 relative to r.
ContentReport minkowski_content(const std::vector<SpacePoint>& S, double alpha,
                                double r, int refinement = 4);
// Parabolic variant (2r)^{alpha-(n+2)} Vol(P_r(S)).
ContentReport minkowski_content(const std::vector<SpaceTimePoint>& S,
                                double alpha, double r, int refinement = 4);

// sup over a logarithmic s-grid of s * Vol{|g| > s}^{1/p}, node-counting
// volume over grid nodes inside the ball. Levels whose superlevel set counts
// fewer than resolution_floor cells are skipped (the counting volume is not
// meaningful below the grid scale); when no level qualifies the plain sup is
// returned.
double weak_lorentz_norm(const Grid& g, const std::vector<double>& node_values,
                         const SpatialBall& ball, double p,
                         int s_grid_points = 400,
                         std::size_t resolution_floor = 1024);

} // namespace hmf
