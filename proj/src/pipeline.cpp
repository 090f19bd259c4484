#include "hmf/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "hmf/analytic.hpp"
#include "hmf/covering.hpp"
#include "hmf/densities.hpp"
#include "hmf/field_io.hpp"
#include "hmf/flow.hpp"
#include "hmf/gmt.hpp"
#include "hmf/par.hpp"
#include "hmf/strata.hpp"

namespace fs = std::filesystem;

namespace hmf {

namespace {

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Grid grid_from(const RunConfig& c) {
    return Grid::centered_cube(c.grid.n, c.grid.side,
                               std::size_t(c.grid.nodes));
}

SpacePoint center_from(const RunConfig& c, int n) {
    SpacePoint x = SpacePoint::zero(n);
    for (int a = 0; a < n && a < int(c.densities.center.size()); ++a)
        x[a] = c.densities.center[a];
    return x;
}

Scheme scheme_from(const RunConfig& c) {
    if (c.flow.scheme == "projected-explicit") return Scheme::projected_explicit;
    if (c.flow.scheme == "ginzburg-landau") return Scheme::ginzburg_landau;
    throw config_error("unknown flow scheme '" + c.flow.scheme + "'");
}

Boundary boundary_from(const RunConfig& c) {
    if (c.flow.boundary == "fixed-dirichlet") return Boundary::fixed_dirichlet;
    if (c.flow.boundary == "periodic") return Boundary::periodic;
    throw config_error("unknown boundary '" + c.flow.boundary + "'");
}

InitialKind initial_from(const RunConfig& c) {
    if (c.flow.initial == "hedgehog") return InitialKind::hedgehog;
    if (c.flow.initial == "line-singular") return InitialKind::line_singular;
    if (c.flow.initial == "equivariant-disk")
        return InitialKind::equivariant_disk;
    if (c.flow.initial == "random-smooth") return InitialKind::random_smooth;
    throw config_error("unknown initial data '" + c.flow.initial + "'");
}

SpaceTimeField load_trajectory(const std::string& dir, const char* needed_by) {
    const std::string index = dir + "/snapshots/snap_index.json";
    if (!fs::exists(index)) {
        std::ostringstream os;
        os << needed_by
           << ": missing trajectory " << index
           << "; run the simulate stage first";
        throw dependency_error(os.str());
    }
    return read_trajectory(index);
}

void stage_simulate(const RunConfig& c, const std::string& dir) {
    const Grid grid = grid_from(c);
    InitialParams ip;
    ip.center = SpacePoint::zero(grid.dim());
    ip.profile_factor = c.flow.profile_factor;
    ip.amplitude = c.flow.amplitude;
    ip.max_mode = c.flow.max_mode;
    ip.seed = par::Rng(c.seed).split(par::hash_str("simulate")).next_u64();
    ip.target_dim = c.grid.d;
    const FieldSnapshot initial = make_initial_data(initial_from(c), grid, ip);

    FlowConfig fc;
    fc.scheme = scheme_from(c);
    fc.boundary = boundary_from(c);
    const double h = grid.spacing();
    fc.dt = c.flow.dt_factor * h * h / (4.0 * grid.dim());
    fc.end_time = c.flow.end_time;
    fc.gl_epsilon = c.flow.gl_epsilon;
    fc.record_every = std::size_t(c.flow.record_every);

    const FlowResult result = run_flow(initial, fc);
    if (c.output.write_fields)
        write_trajectory(result.trajectory, dir + "/snapshots", "snap");

    std::ofstream mon(dir + "/monitor.csv");
    mon << "step,max_dudt\n";
    for (std::size_t i = 0; i < result.step_max_dudt.size(); ++i)
        mon << i + 1 << "," << g17(result.step_max_dudt[i]) << "\n";
}

void stage_densities(const RunConfig& c, const std::string& dir) {
    std::ofstream csv(dir + "/densities.csv");
    const bool analytic = c.densities.analytic != "none";

    std::vector<DensityReport> reports;
    int n = c.grid.n;
    if (analytic) {
        std::unique_ptr<AnalyticField> field;
        if (c.densities.analytic == "hedgehog")
            field = std::make_unique<HedgehogField>(n);
        else if (c.densities.analytic == "line-singular")
            field = std::make_unique<LineSingularField>();
        else
            throw config_error("unknown analytic field '" +
                               c.densities.analytic + "'");
        n = field->dim();
        AnalyticQuadrature q;
        q.nodes_per_axis = std::size_t(c.densities.quad_nodes);
        q.time_slices = std::size_t(c.densities.time_slices);
        const SpacePoint x0 = center_from(c, n);
        if (c.densities.cutoff == "bump")
            q.cutoff = CutoffProfile(x0, c.densities.cutoff_scale);
        const SpaceTimePoint X0(x0, 0.0);
        for (double rho : c.densities.radii)
            reports.push_back(density_suite(*field, X0, rho, q));
        const MonotonicityAudit audit =
            monotonicity_audit(*field, X0, c.densities.radii, q);
        nlohmann::json j;
        j["c1_phi"] = audit.c1_phi;
        j["c1_psi"] = audit.c1_psi;
        j["phi_feasible"] = audit.phi_feasible;
        j["psi_feasible"] = audit.psi_feasible;
        j["radii"] = audit.radii;
        j["phi"] = audit.phi_values;
        j["psi"] = audit.psi_values;
        j["note"] = audit.note;
        std::ofstream(dir + "/monotonicity.json") << j.dump(2) << "\n";
    } else {
        const SpaceTimeField traj = load_trajectory(dir, "densities stage");
        n = traj.grid().dim();
        const SpacePoint x0 = center_from(c, n);
        DensityOptions opts;
        if (c.densities.cutoff == "bump")
            opts.cutoff = CutoffProfile(x0, c.densities.cutoff_scale);
        const SpaceTimePoint X0(x0, traj.time_last());
        for (double rho : c.densities.radii)
            reports.push_back(density_suite(traj, X0, rho, opts));
    }

    for (int a = 0; a < n; ++a) csv << "x" << a + 1 << ",";
    csv << "t,rho,E,E_minus,Psi,Phi\n";
    for (const auto& r : reports) {
        for (int a = 0; a < n; ++a) csv << g17(r.center.x[a]) << ",";
        csv << g17(r.center.t) << "," << g17(r.radius) << "," << g17(r.E) << ","
            << g17(r.E_minus) << "," << g17(r.Psi) << "," << g17(r.Phi) << "\n";
    }
}

void stage_strata(const RunConfig& c, const std::string& dir) {
    SpaceTimeField traj;
    double t_analysis = 0.0;
    const bool analytic = c.densities.analytic != "none";
    Grid grid = grid_from(c);
    DetectionParams p;
    p.epsilon = c.strata.epsilon;
    p.r_min = c.strata.r_min_factor * grid.spacing();
    p.r_max = c.strata.r_max_factor * grid.spacing();
    p.defect_thresholds.assign(std::size_t(grid.dim()),
                               c.strata.defect_threshold);

    if (analytic) {
        std::unique_ptr<AnalyticField> field;
        if (c.densities.analytic == "hedgehog")
            field = std::make_unique<HedgehogField>(grid.dim());
        else
            field = std::make_unique<LineSingularField>();
        const double depth = 5.0 * 4.0 * p.r_max * p.r_max;
        traj = static_trajectory(*field, grid, -depth, 0.0);
        t_analysis = 0.0;
    } else {
        traj = load_trajectory(dir, "strata stage");
        ensure_dudt(traj);
        grid = traj.grid();
        t_analysis = traj.time_last();
        p.r_min = c.strata.r_min_factor * grid.spacing();
        p.r_max = c.strata.r_max_factor * grid.spacing();
    }

    const StratumSample sing = extract_singular_slice(traj, t_analysis, p);
    const StratumSample strat =
        quantitative_stratum(traj, t_analysis, c.strata.k, p);

    std::ofstream csv(dir + "/flags.csv");
    for (int a = 0; a < grid.dim(); ++a) csv << "x" << a + 1 << ",";
    csv << "t,k,flag\n";
    auto dump = [&](const StratumSample& s) {
        for (const auto& x : s.points) {
            for (int a = 0; a < grid.dim(); ++a) csv << g17(x[a]) << ",";
            csv << g17(s.t) << "," << s.k << ",1\n";
        }
    };
    dump(sing);
    dump(strat);

    std::ofstream content_csv(dir + "/content.csv");
    content_csv << "alpha,r,content\n";
    if (!sing.points.empty()) {
        for (double r : c.strata.content_radii) {
            const ContentReport rep =
                minkowski_content(sing.points, c.strata.content_alpha, r);
            content_csv << g17(rep.alpha) << "," << g17(rep.r) << ","
                        << g17(rep.content) << "\n";
        }
    }

    nlohmann::json j;
    j["epsilon"] = p.epsilon;
    j["r_min"] = p.r_min;
    j["r_max"] = p.r_max;
    j["defect_threshold"] = c.strata.defect_threshold;
    j["k"] = c.strata.k;
    j["t"] = t_analysis;
    j["singular_flag_count"] = sing.points.size();
    j["stratum_flag_count"] = strat.points.size();
    std::ofstream(dir + "/strata_params.json") << j.dump(2) << "\n";
}

void stage_gmt(const RunConfig& c, const std::string& dir) {
    par::Rng rng = par::Rng(c.seed).split(par::hash_str("gmt"));
    nlohmann::json j;

    // spectral displacement against the brute-force search
    double max_rel = 0.0, max_resid = 0.0;
    for (int trial = 0; trial < c.gmt.random_clouds; ++trial) {
        const int n = 2 + int(rng.next_u64() % 2);
        const int k = 1 + int(rng.next_u64() % std::uint64_t(n - 1));
        const int npts = 5 + int(rng.next_u64() % std::uint64_t(
                                     std::max(1, c.gmt.max_points - 4)));
        WeightedPointCloud mu;
        for (int i = 0; i < npts; ++i) {
            SpacePoint x = SpacePoint::zero(n);
            for (int a = 0; a < n; ++a) x[a] = rng.uniform(-0.8, 0.8);
            mu.add(x, rng.uniform(0.2, 2.0));
        }
        const SpatialBall ball{SpacePoint::zero(n), 1.0};
        const double ds = displacement(mu, ball, k);
        const double db = displacement_bruteforce(mu, ball, k);
        max_rel = std::max(max_rel,
                           std::abs(ds - db) / std::max({ds, db, 1e-12}));
        const MomentSpectrum spec = moment_spectrum(mu, ball);
        for (int i = 0; i < n; ++i) {
            SpacePoint acc = SpacePoint::zero(n);
            double mass = 0.0;
            for (std::size_t q = 0; q < mu.points.size(); ++q) {
                const SpacePoint d = mu.points[q] - spec.x_cm;
                acc = acc + d * (mu.weights[q] * d.dot(spec.v[i]));
                mass += mu.weights[q];
            }
            acc = acc * (1.0 / mass) - spec.v[i] * spec.lambda[i];
            max_resid =
                std::max(max_resid,
                         acc.norm() / std::max(spec.lambda.front(), 1e-300));
        }
    }
    j["random_clouds"] = c.gmt.random_clouds;
    j["max_rel_displacement_diff"] = max_rel;
    j["max_moment_identity_residual"] = max_resid;

    if (c.gmt.packing != "none") {
        PackingMeasure P;
        P.k = c.gmt.packing_k;
        const double atom_r = 0.01;
        if (c.gmt.packing == "k-plane") {
            // atoms on a k-plane lattice spaced 4 * atom_r
            const double step = 4.0 * atom_r;
            for (double u = -0.45; u <= 0.45; u += step) {
                if (P.k == 1) {
                    P.centers.push_back(SpacePoint{u, 0.0, 0.0});
                    P.radii.push_back(atom_r);
                } else {
                    for (double v = -0.45; v <= 0.45; v += step) {
                        P.centers.push_back(SpacePoint{u, v, 0.0});
                        P.radii.push_back(atom_r);
                    }
                }
            }
        } else if (c.gmt.packing == "arc") {
            const double kappa = 8.0;
            const double radius = 1.0 / kappa;
            const double step = 4.0 * atom_r / radius;
            for (double th = -1.2; th <= 1.2; th += step) {
                P.centers.push_back(SpacePoint{radius * std::cos(th) - radius,
                                               radius * std::sin(th), 0.0});
                P.radii.push_back(atom_r);
            }
            P.k = 1;
        } else {
            throw config_error("unknown packing '" + c.gmt.packing + "'");
        }
        const SpatialBall root{SpacePoint::zero(3), 0.5};
        const ReifenbergReport rep = reifenberg_check(P, root, c.gmt.delta);
        std::size_t failed = 0;
        for (const auto& b : rep.balls)
            if (!b.passed) ++failed;
        j["packing"] = {{"kind", c.gmt.packing},
                        {"k", rep.k},
                        {"all_passed", rep.all_passed},
                        {"failed_balls", failed},
                        {"packing_ratio", rep.packing_ratio},
                        {"delta", rep.delta}};
    }
    std::ofstream(dir + "/gmt_report.json") << j.dump(2) << "\n";

    // sample cloud emission for downstream tooling
    std::ofstream csv(dir + "/clouds.csv");
    csv << "x1,x2,x3,weight\n";
}

void stage_cover(const RunConfig& c, const std::string& dir) {
    CoveringParams p;
    p.k = c.cover.k;
    p.rho = c.cover.rho;
    p.gamma = c.cover.gamma;
    p.eta_prime = c.cover.eta_prime;
    p.eta = c.cover.eta_over_rho * c.cover.rho;
    p.R = c.cover.R;

    const double E0 = 1.0;
    DensityOracle oracle;
    std::vector<SpacePoint> S;
    const double r0 = c.cover.root_radius;
    if (c.cover.oracle == "line") {
        oracle.phi = [E0](const SpacePoint& y, double s) {
            const double d2 = y[1] * y[1] + y[2] * y[2];
            return E0 * std::exp(-d2 / (s * s));
        };
        for (int i = 0; i < c.cover.samples; ++i) {
            const double u =
                -0.9 * r0 + 1.8 * r0 * double(i) / double(c.cover.samples - 1);
            S.push_back(SpacePoint{u, 0.0, 0.0});
        }
    } else if (c.cover.oracle == "hedgehog") {
        oracle.phi = [E0](const SpacePoint& y, double s) {
            return E0 * std::exp(-y.norm2() / (s * s));
        };
        S.push_back(SpacePoint{0.0, 0.0, 0.0});
    } else {
        throw config_error("unknown cover oracle '" + c.cover.oracle + "'");
    }

    const SpatialBall root{SpacePoint::zero(3), r0};
    const CoverResult cover = main_covering(oracle, S, root, p);
    const CoverAudit audit = cover_audit(cover, S, p.k);

    nlohmann::json j;
    j["E"] = cover.E;
    j["alternations"] = cover.alternations;
    j["stop_count"] = audit.stop_count;
    j["final_good_count"] = audit.final_good_count;
    j["final_bad_count"] = audit.final_bad_count;
    j["content_sum"] = audit.content_sum;
    j["count_times_Rk"] = audit.count_times_Rk;
    j["covering_ok"] = audit.covering_ok;
    j["certificates_ok"] = audit.certificates_ok;
    nlohmann::json balls = nlohmann::json::array();
    for (const auto& b : cover.balls) {
        nlohmann::json jb;
        jb["center"] = {b.center[0], b.center[1], b.center[2]};
        jb["radius"] = b.radius;
        jb["label"] = b.label == BallLabel::stop
                          ? "stop"
                          : (b.label == BallLabel::final_good ? "final-good"
                                                              : "final-bad");
        jb["tree"] = b.tree_id;
        jb["parent_tree"] = b.parent_tree;
        jb["round"] = b.round;
        balls.push_back(jb);
    }
    j["balls"] = balls;
    std::ofstream(dir + "/cover.json") << j.dump(2) << "\n";

    std::ofstream csv(dir + "/cover.csv");
    csv << "x1,x2,x3,radius,label,tree,round\n";
    for (const auto& b : cover.balls) {
        csv << g17(b.center[0]) << "," << g17(b.center[1]) << ","
            << g17(b.center[2]) << "," << g17(b.radius) << ",";
        csv << (b.label == BallLabel::stop
                    ? "stop"
                    : (b.label == BallLabel::final_good ? "final-good"
                                                        : "final-bad"));
        csv << "," << b.tree_id << "," << b.round << "\n";
    }
}

void stage_report(const RunConfig& c, const std::string& dir) {
    (void)c;
    nlohmann::json summary;
    bool any = false;
    auto attach_json = [&](const char* name, const char* key) {
        const std::string path = dir + "/" + name;
        if (!fs::exists(path)) return;
        std::ifstream is(path);
        nlohmann::json j;
        is >> j;
        summary[key] = j;
        any = true;
    };
    auto note_csv = [&](const char* name, const char* key) {
        const std::string path = dir + "/" + name;
        if (!fs::exists(path)) return;
        std::ifstream is(path);
        std::string line;
        std::size_t rows = 0;
        while (std::getline(is, line))
            if (!line.empty()) ++rows;
        summary[key] = {{"file", name}, {"rows", rows > 0 ? rows - 1 : 0}};
        any = true;
    };
    attach_json("monotonicity.json", "monotonicity");
    attach_json("strata_params.json", "strata");
    attach_json("gmt_report.json", "gmt");
    attach_json("cover.json", "cover");
    note_csv("densities.csv", "densities");
    note_csv("flags.csv", "flags");
    note_csv("content.csv", "content");
    note_csv("monitor.csv", "monitor");
    if (!any)
        throw dependency_error(
            "report stage: no artifacts found; run earlier stages first");

    std::ofstream(dir + "/summary.json") << summary.dump(2) << "\n";

    std::ofstream plot(dir + "/plot_summary.csv");
    plot << "key,value\n";
    for (const auto& [key, val] : summary.items()) {
        if (val.is_object())
            for (const auto& [k2, v2] : val.items()) {
                if (v2.is_number())
                    plot << key << "." << k2 << "," << v2.dump() << "\n";
            }
    }
}

} // namespace

Stage parse_stage(const std::string& name) {
    if (name == "simulate") return Stage::simulate;
    if (name == "densities") return Stage::densities;
    if (name == "strata") return Stage::strata;
    if (name == "gmt") return Stage::gmt;
    if (name == "cover") return Stage::cover;
    if (name == "report") return Stage::report;
    throw config_error("unknown stage '" + name + "'");
}

std::vector<Stage> parse_stages(const std::string& csv) {
    std::vector<Stage> out;
    std::string tok;
    std::istringstream is(csv);
    while (std::getline(is, tok, ',')) {
        if (!tok.empty()) out.push_back(parse_stage(tok));
    }
    if (out.empty()) throw config_error("empty stage list");
    return out;
}

std::string run_pipeline(const ConfigTable& table, const std::string& out_base,
                         std::vector<Stage> stages) {
    const RunConfig cfg = RunConfig::from_table(table);
    const std::string dir = out_base + "/" + config_hash(table);
    fs::create_directories(dir);
    // persist the canonical config next to the artifacts
    std::ofstream(dir + "/config.toml") << table.emit();

    std::sort(stages.begin(), stages.end(),
              [](Stage a, Stage b) { return int(a) < int(b); });
    stages.erase(std::unique(stages.begin(), stages.end()), stages.end());
    for (Stage s : stages) {
        switch (s) {
        case Stage::simulate: stage_simulate(cfg, dir); break;
        case Stage::densities: stage_densities(cfg, dir); break;
        case Stage::strata: stage_strata(cfg, dir); break;
        case Stage::gmt: stage_gmt(cfg, dir); break;
        case Stage::cover: stage_cover(cfg, dir); break;
        case Stage::report: stage_report(cfg, dir); break;
        }
    }
    return dir;
}

} // namespace hmf
