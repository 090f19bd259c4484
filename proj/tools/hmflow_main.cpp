#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmf/config.hpp"
#include "hmf/errors.hpp"
#include "hmf/par.hpp"
#include "hmf/pipeline.hpp"

namespace {

// exit codes: 0 ok, 2 config error, 3 dependency error, 4 numeric guard
int run_stages(const std::string& config_path, const std::string& out_dir,
               long long seed_override, const std::string& stages_csv) {
    try {
        hmf::ConfigTable table = config_path.empty()
                                     ? hmf::ConfigTable()
                                     : hmf::ConfigTable::parse_file(config_path);
        if (seed_override >= 0) {
            hmf::ConfigValue v;
            v.data = seed_override;
            table.set("", "seed", v);
        }
        const auto stages = hmf::parse_stages(stages_csv);
        const std::string dir = hmf::run_pipeline(table, out_dir, stages);
        std::cout << "artifacts: " << dir << "\n";
        return 0;
    } catch (const hmf::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hmf::dependency_error& e) {
        std::cerr << "dependency error: " << e.what() << "\n";
        return 3;
    } catch (const hmf::guard_error& e) {
        std::cerr << "numeric guard: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"harmonic map flow toolkit: simulation, monotone densities, "
                 "singular-set detection, Reifenberg checks and coverings"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    long long seed = -1;
    bool serial = false;
    app.add_option("--config", config_path, "TOML config file");
    app.add_option("--out", out_dir, "output directory (artifacts land in "
                                     "<out>/<config hash>/)");
    app.add_option("--seed", seed, "override the config seed");
    app.add_flag("--serial", serial, "run kernels on the serial reference path");

    std::string stages_csv = "simulate,densities,strata,gmt,cover,report";
    auto* sub_simulate = app.add_subcommand("simulate", "run the flow solver");
    auto* sub_analyze =
        app.add_subcommand("analyze", "densities and strata of a trajectory");
    auto* sub_gmt =
        app.add_subcommand("gmt", "displacement / Reifenberg checks");
    auto* sub_cover = app.add_subcommand("cover", "good/bad tree covering");
    auto* sub_report = app.add_subcommand("report", "aggregate artifacts");
    auto* sub_all = app.add_subcommand("all", "run a stage list");
    sub_all->add_option("--stages", stages_csv, "comma-separated stages");

    CLI11_PARSE(app, argc, argv);

    if (serial) hmf::par::set_default_exec(hmf::par::Exec::serial);

    std::string stages;
    if (sub_simulate->parsed()) stages = "simulate";
    else if (sub_analyze->parsed()) stages = "densities,strata";
    else if (sub_gmt->parsed()) stages = "gmt";
    else if (sub_cover->parsed()) stages = "cover";
    else if (sub_report->parsed()) stages = "report";
    else stages = stages_csv;

    return run_stages(config_path, out_dir, seed, stages);
}
