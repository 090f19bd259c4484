#pragma once

#include <vector>

#include "hmf/densities.hpp"
#include "hmf/geometry.hpp"

namespace hmf {

struct WeightedPointCloud {
    std::vector<SpacePoint> points;
    std::vector<double> weights;

    void add(const SpacePoint& p, double w) {
        points.push_back(p);
        weights.push_back(w);
    }
    int dim() const { return points.empty() ? 0 : points.front().n; }
    void validate() const;
    // indices of points inside the (closed) ball
    std::vector<std::size_t> inside(const SpatialBall& ball) const;
    double mass(const SpatialBall& ball) const;
};

struct AffineSubspace {
    SpacePoint base;
    std::vector<SpacePoint> basis; // k orthonormal vectors

    int k() const { return int(basis.size()); }
    void check_orthonormal(double tol = 1e-12) const;
    // squared distance from y to the subspace
    double dist2(const SpacePoint& y) const;
};

// Eigenstructure of the mass-normalized second moment of a cloud in a ball:
// lambda_1 >= ... >= lambda_n >= 0 with orthonormal eigenvectors, and the
// best-fit planes L_k = x_cm + span{v_1..v_k}.
struct MomentSpectrum {
    SpacePoint x_cm;
    double mass = 0.0;
    std::vector<double> lambda;   // descending
    std::vector<SpacePoint> v;    // eigenvectors matching lambda
    AffineSubspace plane(int k) const;
};

// volume of the k-dimensional unit ball, pi^{k/2}/Gamma(k/2+1)
double unit_ball_volume(int k);

// Dirac sum mu = sum omega_k r_y^k delta_y over pairwise disjoint doubled
// balls B_{2 r_y}(y).
struct PackingMeasure {
    std::vector<SpacePoint> centers;
    std::vector<double> radii;
    int k = 0;

    double weight(std::size_t i) const;
    WeightedPointCloud as_cloud() const;
    double min_radius() const;
    // throws structural_error naming the offending pair when the doubled
    // balls overlap
    void verify_disjoint() const;
};

SpacePoint center_of_mass(const WeightedPointCloud& mu, const SpatialBall& ball);

MomentSpectrum moment_spectrum(const WeightedPointCloud& mu,
                               const SpatialBall& ball);

// D^k_mu(x0, r) = r^{-k-2} mu(B_r) sum_{i>k} lambda_i
//              = r^{-k-2} int_{B_r} dist^2(y, L_k) dmu(y).
double displacement(const WeightedPointCloud& mu, const SpatialBall& ball,
                    int k);

// Direct minimization over a grid of affine k-planes (base lattice plus
// sphere-mesh directions, refined locally). Cost guard: n <= 3 and at most
// 60 points in the ball.
double displacement_bruteforce(const WeightedPointCloud& mu,
                               const SpatialBall& ball, int k,
                               int resolution = 16);

struct ReifenbergBallRecord {
    SpacePoint center;
    double t = 0.0;      // test ball radius
    double sum = 0.0;    // discrete displacement sum
    double bound = 0.0;  // delta * t^k
    bool passed = false;
};

struct ReifenbergReport {
    std::vector<ReifenbergBallRecord> balls;
    bool all_passed = false;
    double packing_ratio = 0.0; // mu(B_r(x0)) / r^k
    double delta = 0.0;
    int k = 0;
};

// Evaluates sum_{s_i <= 2t} int_{B_t(x)} D^k_mu(y, s_i) dmu(y) over dyadic
// scales for a mesh of test balls B_t(x) inside B_{2r}(x0), against the
// threshold delta * t^k.
ReifenbergReport reifenberg_check(const PackingMeasure& P,
                                  const SpatialBall& root, double delta);

// sum over the given dyadic scales of D^k_mu(x, s) * log 2, approximating
// int_0^1 D^k_mu(x, s) ds/s; zero-mass scales contribute 0.
double jones_functional(const WeightedPointCloud& mu, const SpacePoint& x,
                        int k, const std::vector<double>& scales);

struct L2BestAuditReport {
    double lhs = 0.0;     // D^k_mu(x0, r)
    double rhs_raw = 0.0; // r^{-k} int [ W(u,(y,t0),2r,r/2) + r ] dmu(y)
    double ratio = 0.0;
    double r = 0.0;
    int k = 0;
    std::vector<double> atom_gaps; // per-atom W values
};

L2BestAuditReport l2_best_audit(const SpaceTimeField& f,
                                const WeightedPointCloud& mu,
                                const SpatialBall& ball, double t0, int k,
                                const DensityOptions& opts = {});

} // namespace hmf
