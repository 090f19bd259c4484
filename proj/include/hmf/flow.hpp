#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmf/densities.hpp"
#include "hmf/geometry.hpp"

namespace hmf {

enum class Scheme { projected_explicit, ginzburg_landau };
enum class Boundary { fixed_dirichlet, periodic };

struct FlowConfig {
    Scheme scheme = Scheme::projected_explicit;
    double dt = 0.0;
    double end_time = 0.0;
    double gl_epsilon = 0.0; // GL only
    Boundary boundary = Boundary::fixed_dirichlet;
    std::size_t record_every = 1;

    // stability guard dt <= h^2/(4n); gl_epsilon > 0 for the GL scheme
    void validate(const Grid& grid) const;
};

// Sphere specialization of A(u)(grad u, grad u): returns |grad u|^2 * u.
// gradient is row-major n x d (row i = d_i u). |value| must be 1 within 1e-8.
std::vector<double> second_fundamental_term(const std::vector<double>& value,
                                            const std::vector<double>& gradient,
                                            int n, int d);

// One explicit Euler step.
//   projected-explicit: w = u + dt (Lap u + |grad u|^2 u), then w/|w| nodewise
//   ginzburg-landau:    u + dt (Lap u + (1/eps^2) 2 (1-|u|) u/|u|)
FieldSnapshot flow_step(const FieldSnapshot& f, const FlowConfig& cfg);

struct FlowResult {
    SpaceTimeField trajectory;
    std::vector<double> step_max_dudt; // per-step max |u_new - u_old| / dt
};

FlowResult run_flow(const FieldSnapshot& initial, const FlowConfig& cfg);

// ---------------------------------------------------------------------------
// Initial data generators.

enum class InitialKind { hedgehog, line_singular, equivariant_disk, random_smooth };

struct InitialParams {
    SpacePoint center;            // hedgehog center (defaults to the origin)
    double min_singular_gap = 1e-9;
    double profile_factor = 1.2;  // equivariant disk: theta(1) = factor * pi
    double disk_radius = 1.0;
    double amplitude = 0.08;      // random-smooth mode amplitude
    int max_mode = 2;             // random-smooth band limit per axis
    std::uint64_t seed = 1;
    int target_dim = 0;           // random-smooth target (0 = grid dim)
};

FieldSnapshot make_initial_data(InitialKind kind, const Grid& grid,
                                const InitialParams& params = {});

// ---------------------------------------------------------------------------
// Discrete audit of the localized energy inequality
//   int_s^t int |du/dt|^2 phi^2 + int |grad u(.,t)|^2 phi^2
//     <= int |grad u(.,s)|^2 phi^2 + 4 int_s^t int |grad u|^2 |grad phi|^2.

struct EnergyAuditReport {
    double left = 0.0;
    double right = 0.0;
    double residual = 0.0; // right - left
    std::string cutoff_id;
    double s = 0.0;
    double t = 0.0;
};

// Fills missing du/dt caches by finite differences of recorded snapshots.
void ensure_dudt(SpaceTimeField& f);

EnergyAuditReport local_energy_audit(const SpaceTimeField& f,
                                     const SpatialBall& ball,
                                     const CutoffProfile& phi, double s,
                                     double t);

} // namespace hmf
