#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmf/analytic.hpp"
#include "hmf/geometry.hpp"

namespace hmf {

// Radial bump: 1 on |x-c| <= scale, 0 on |x-c| >= 2*scale, quintic
// smoothstep in between. At unit scale 0 <= phi <= 1 and |grad phi| <= 10.
class CutoffProfile {
public:
    CutoffProfile(SpacePoint center, double scale);

    double operator()(const SpacePoint& x) const;
    // gradient magnitude at x
    double grad_norm(const SpacePoint& x) const;
    double support_radius() const { return 2.0 * scale_; }
    double scale() const { return scale_; }
    const SpacePoint& center() const { return center_; }
    std::string id() const;

    // spot-checks the three stated bounds on a fine radial grid
    void validate() const;

private:
    SpacePoint center_;
    double scale_;
};

struct DensityReport {
    SpaceTimePoint center;
    double radius = 0.0;
    double E = 0.0;
    double E_minus = 0.0;
    double Psi = 0.0;
    double Phi = 0.0;
    // quadrature metadata
    std::size_t space_nodes = 0;
    std::size_t time_knots = 0;
    double truncation_radius = 0.0;
    double slice_interp_gap = 0.0; // recorded-time gap bracketing the Psi slice
};

// G_{X0}(x,t) = (4 pi (t0-t))^{-n/2} exp(-|x-x0|^2 / (4 (t0-t))), t < t0.
double backward_heat_kernel(const SpaceTimePoint& X0, const SpaceTimePoint& X);

// ---------------------------------------------------------------------------
// Discrete path: densities of a recorded trajectory, trapezoid in time over
// recorded snapshots, midpoint-on-nodes in space.

struct DensityOptions {
    // cutoff profile phi_{x0}; nullopt = the global (phi == 1) variant
    std::optional<CutoffProfile> cutoff;
    // drop kernel values below this fraction of the kernel maximum
    double kernel_cut = 1e-16;
    // kernel band integrals subdivide recorded-time intervals down to at
    // least this many knots, interpolating the field linearly in time
    std::size_t min_time_knots = 33;
};

double density_E(const SpaceTimeField& f, const SpaceTimePoint& X0, double rho);
double density_E_minus(const SpaceTimeField& f, const SpaceTimePoint& X0,
                       double rho);
double density_Psi(const SpaceTimeField& f, const SpaceTimePoint& X0, double rho,
                   const DensityOptions& opts = {});
double density_Phi(const SpaceTimeField& f, const SpaceTimePoint& X0, double rho,
                   const DensityOptions& opts = {});
DensityReport density_suite(const SpaceTimeField& f, const SpaceTimePoint& X0,
                            double rho, const DensityOptions& opts = {});

// W(u, X0, R, r) = Phi(u, X0, R) - Phi(u, X0, r), 0 < r <= R.
double density_gap_W(const SpaceTimeField& f, const SpaceTimePoint& X0,
                     double R, double r, const DensityOptions& opts = {});

// ---------------------------------------------------------------------------
// Analytic path: densities of a static analytic field by direct quadrature.
// Each time slice integrates on its own box (half-width box_factor * sqrt(tau)
// around x0), with subdivision of cells near the singular locus.

struct AnalyticQuadrature {
    std::size_t nodes_per_axis = 96;
    std::size_t time_slices = 33;
    double box_factor = 8.0;     // slice box half-width = box_factor*sqrt(tau)
    int refine_factor = 8;       // per-axis subdivision of singular cells
    double refine_radius = 3.0;  // refine cells within this many h of the locus
    std::optional<CutoffProfile> cutoff;
};

double density_E(const AnalyticField& f, const SpaceTimePoint& X0, double rho,
                 const AnalyticQuadrature& q = {});
double density_E_minus(const AnalyticField& f, const SpaceTimePoint& X0,
                       double rho, const AnalyticQuadrature& q = {});
double density_Psi(const AnalyticField& f, const SpaceTimePoint& X0, double rho,
                   const AnalyticQuadrature& q = {});
double density_Phi(const AnalyticField& f, const SpaceTimePoint& X0, double rho,
                   const AnalyticQuadrature& q = {});
DensityReport density_suite(const AnalyticField& f, const SpaceTimePoint& X0,
                            double rho, const AnalyticQuadrature& q = {});
double density_gap_W(const AnalyticField& f, const SpaceTimePoint& X0, double R,
                     double r, const AnalyticQuadrature& q = {});

// ---------------------------------------------------------------------------
// Monotonicity audit: least C1 on a log grid making
//   Phi(R) exp(C1 (R-r)) - Phi(r) + C1 (R-r) >= 0   and
//   Psi(R) - Psi(r) + C1 (R-r) >= 0
// across all adjacent radius pairs.

struct MonotonicityAudit {
    std::vector<double> radii;
    std::vector<double> phi_values;
    std::vector<double> psi_values;
    double c1_phi = 0.0;       // least feasible C1 for Phi
    double c1_psi = 0.0;       // least feasible C1 for Psi (a.e.-r caveat)
    bool phi_feasible = false; // false if no grid C1 works
    bool psi_feasible = false;
    std::string note;
};

MonotonicityAudit monotonicity_audit(const SpaceTimeField& f,
                                     const SpaceTimePoint& X0,
                                     const std::vector<double>& radii,
                                     const DensityOptions& opts = {});
MonotonicityAudit monotonicity_audit(const AnalyticField& f,
                                     const SpaceTimePoint& X0,
                                     const std::vector<double>& radii,
                                     const AnalyticQuadrature& q = {});

// ---------------------------------------------------------------------------
// Directional energy matrix over B_r(x0) x [t0-4r^2, t0-r^2]:
//   M_ij = r^{-n} int sum_a d_i u^a d_j u^a.

struct DirectionalEnergyMatrix {
    int n = 0;
    double m[kMaxDim][kMaxDim] = {};
    SpaceTimePoint center;
    double radius = 0.0;

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += m[i][i];
        return s;
    }
    // ascending eigenvalues
    std::vector<double> eigenvalues() const;
    void check_symmetric_psd(double tol_factor = 1e-10) const;
};

DirectionalEnergyMatrix directional_energy_matrix(const SpaceTimeField& f,
                                                  const SpacePoint& x0,
                                                  double t0, double r);

// inf over (k+1)-dimensional subspaces V of the directional energy
// = sum of the (k+1) smallest eigenvalues of M, 0 <= k <= n-1.
double symmetry_defect(const DirectionalEnergyMatrix& M, int k);

} // namespace hmf
