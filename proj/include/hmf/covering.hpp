#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hmf/geometry.hpp"
#include "hmf/gmt.hpp"

namespace hmf {

// Parameters of the good/bad-tree covering. The defaults follow the
// desk-scale calibration; every constant is existential in the source
// analysis, so all are exposed.
struct CoveringParams {
    double eta = 1.0 / 20.0 / 200.0; // eta << rho (eta <= rho/100 enforced)
    double eta_prime = 1.0 / 20.0;
    double gamma = 1.0 / 10.0;
    double rho = 1.0 / 20.0;
    double R = 1.0 / 8.0; // stop-scale ratio
    int k = 1;
    double E = std::nan(""); // density ceiling; NaN = compute at the root

    void validate() const {
        if (!(eta > 0.0) || !(eta_prime > 0.0) || !(gamma > 0.0) ||
            !(rho > 0.0) || !(R > 0.0))
            throw domain_error("CoveringParams: parameters must be positive");
        if (!(rho < 0.1) || !(gamma < 0.25) || !(eta_prime < 0.25) ||
            !(R < 0.25))
            throw domain_error("CoveringParams: parameter out of range");
        if (eta > rho / 100.0)
            throw domain_error("CoveringParams: need eta <= rho/100");
        if (k < 0) throw domain_error("CoveringParams: k must be >= 0");
    }
};

// Evaluation contract (y, s) -> Phi(u, (y, t0), s), backed by the densities
// module or by an analytic closed form for tests.
struct DensityOracle {
    std::function<double(const SpacePoint&, double)> phi;

    double operator()(const SpacePoint& y, double s) const;
};

enum class BallLabel { stop, final_good, final_bad };

struct CoverBall {
    SpacePoint center;
    double radius = 0.0;
    BallLabel label = BallLabel::stop;
    int tree_id = -1;   // tree that produced this ball
    int parent_tree = -1;
    int round = 0;      // alternation round
    // stop-ball certificates
    bool radius_in_window = false;
    bool has_drop_certificate = false;
    double drop_sup = std::nan("");
};

struct CoverResult {
    std::vector<CoverBall> balls;
    SpatialBall root;
    CoveringParams params;
    double E = 0.0;
    int alternations = 0;

    double stop_content_sum(int k) const {
        double s = 0.0;
        for (const auto& b : balls)
            if (b.label == BallLabel::stop) s += std::pow(b.radius, k);
        return s;
    }
    std::size_t count(BallLabel label) const {
        std::size_t c = 0;
        for (const auto& b : balls)
            if (b.label == label) ++c;
        return c;
    }
};

struct Classification {
    bool good = false;
    AffineSubspace pruning_plane; // set when bad
    bool plane_valid = false;
};

// Greedy farthest-point maximal sep-separated net over the candidate subset
// of pts; returns selected candidate indices. Deterministic.
std::vector<std::size_t> greedy_net(const std::vector<SpacePoint>& pts,
                                    const std::vector<std::size_t>& candidates,
                                    double sep);

// Good iff Phi(z, gamma*rho*s) >= E - eta' for every stratum point
// z in S cap B_s(y). Bad balls also return the pruning plane: the best-fit
// (k-1)-plane of the high-density points {z : Phi(z, 2 eta s) >= E - eta/2}.
Classification classify_ball(const DensityOracle& oracle,
                             const std::vector<SpacePoint>& S,
                             const SpatialBall& ball,
                             const CoveringParams& p);

// Tree expansions. main_radius fixes the global stop scale R * main_radius;
// 0 = use the root radius.
CoverResult build_good_tree(const DensityOracle& oracle,
                            const std::vector<SpacePoint>& S,
                            const SpatialBall& root, const CoveringParams& p,
                            double main_radius = 0.0);
CoverResult build_bad_tree(const DensityOracle& oracle,
                           const std::vector<SpacePoint>& S,
                           const SpatialBall& root, const CoveringParams& p,
                           double main_radius = 0.0);

// Alternating construction from F_0 = {x0} until F_N is empty. Every stop
// ball satisfies the radius window [eta R r, R r] or carries the
// density-drop certificate sup_{z in B_{2 r_y}(y)} Phi(z, 2 r_y) <= E - eta/3.
CoverResult main_covering(const DensityOracle& oracle,
                          const std::vector<SpacePoint>& S,
                          const SpatialBall& root, const CoveringParams& p);

struct CoverAudit {
    bool covering_ok = false;
    std::vector<SpacePoint> uncovered;
    double content_sum = 0.0;     // sum of r_y^k over stop balls
    double count_times_Rk = 0.0;  // (#stop) * R^k
    std::size_t stop_count = 0;
    std::size_t final_good_count = 0;
    std::size_t final_bad_count = 0;
    bool certificates_ok = false; // every stop ball in window or with drop cert
    std::size_t certificate_violations = 0;
};

CoverAudit cover_audit(const CoverResult& c, const std::vector<SpacePoint>& S,
                       int k);

} // namespace hmf
