#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fds/analysis.hpp"
#include "fds/config.hpp"
#include "fds/container.hpp"
#include "fds/design.hpp"
#include "fds/studies.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;  // -1: keep the config's seed
    int threads = 0;      // accepted for interface stability; execution is single-threaded
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_option("--threads", args.threads, "worker threads (0 = auto)");
}

fds::ExperimentConfig load(const CommonArgs& args) {
    fds::ExperimentConfig cfg = fds::load_config(args.config_path);
    if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
    if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
    std::filesystem::create_directories(cfg.output_dir);
    return cfg;
}

std::string out_path(const fds::ExperimentConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

nlohmann::json provenance(const fds::ExperimentConfig& cfg) {
    return {{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}};
}

nlohmann::json report_to_json(const fds::DesignReport& r) {
    return {{"na_eff", r.na_eff},
            {"magnification", r.magnification},
            {"r_lateral_um", r.r_lateral_um},
            {"r_axial_um", r.r_axial_um},
            {"dof_microlens_um", r.dof_microlens_um},
            {"fov_mla_um", r.fov_mla_um},
            {"fov_random_um", r.fov_random_um},
            {"depth_range_upper_bound_um", r.depth_range_upper_bound_um},
            {"depth_range_design_um", r.depth_range_design_um},
            {"nyquist_pixel_um", r.nyquist_pixel_um}};
}

int cmd_design(const CommonArgs& args) {
    fds::ExperimentConfig cfg = load(args);
    nlohmann::json j = report_to_json(fds::make_design_report(cfg.system));
    j["provenance"] = provenance(cfg);
    std::cout << j.dump(2) << "\n";
    fds::write_text_atomic(out_path(cfg, "design_report.json"), j.dump(2) + "\n");
    return 0;
}

int cmd_surface(const CommonArgs& args) {
    fds::ExperimentConfig cfg = load(args);
    fds::DiffuserSurface surf =
        fds::generate_surface(cfg.system, cfg.layout, cfg.mask_index, cfg.grid.sim_pitch_um,
                              cfg.z_half_range_um, cfg.seed);
    const std::string path =
        out_path(cfg, "surface_" + fds::layout_name(cfg.layout) + ".arr");
    fds::save_surface(path, surf, {{"provenance", provenance(cfg)}});
    std::cout << path << "\n";
    return 0;
}

int cmd_psfs(const CommonArgs& args, const std::string& surface_path) {
    fds::ExperimentConfig cfg = load(args);
    if (cfg.z_planes_um.empty())
        throw std::invalid_argument("config: z_planes_um is required for psfs");
    fds::DiffuserSurface surf;
    nlohmann::json prov = provenance(cfg);
    if (!surface_path.empty()) {
        surf = fds::load_surface(surface_path);
        prov["surface"] = fds::file_content_hash(surface_path);
    } else {
        surf = fds::generate_surface(cfg.system, cfg.layout, cfg.mask_index,
                                     cfg.grid.sim_pitch_um, cfg.z_half_range_um, cfg.seed);
    }
    std::vector<double> zs = cfg.z_planes_um;
    std::sort(zs.begin(), zs.end());
    fds::PSFStack stack = fds::simulate_psf_stack(cfg.system, surf, cfg.grid, zs);
    const std::string path = out_path(cfg, "psfs_" + fds::layout_name(cfg.layout) + ".arr");
    fds::save_psf_stack(path, stack, {{"provenance", prov}});
    std::cout << path << "\n";
    return 0;
}

int cmd_forward(const CommonArgs& args, const std::string& volume_path,
                const std::string& psf_path) {
    fds::ExperimentConfig cfg = load(args);
    fds::Volume vol = fds::load_volume(volume_path);
    fds::PSFStack stack = fds::load_psf_stack(psf_path);
    fds::Measurement meas = fds::forward_project(vol, stack);
    if (cfg.noise_fraction > 0)
        meas = fds::add_gaussian_noise(meas, cfg.noise_fraction, cfg.seed);
    nlohmann::json prov = provenance(cfg);
    prov["volume"] = fds::file_content_hash(volume_path);
    prov["psfs"] = fds::file_content_hash(psf_path);
    const std::string path = out_path(cfg, "measurement.arr");
    fds::save_measurement(path, meas, {{"provenance", prov}});
    std::cout << path << "\n";
    return 0;
}

int cmd_reconstruct(const CommonArgs& args, const std::string& meas_path,
                    const std::string& psf_path) {
    fds::ExperimentConfig cfg = load(args);
    fds::Measurement meas = fds::load_measurement(meas_path);
    fds::PSFStack stack = fds::load_psf_stack(psf_path);
    fds::ReconResult rr = cfg.solver_method == "rl"
                              ? fds::richardson_lucy(meas, stack, cfg.rl_iters)
                              : fds::admm_tv(meas, stack, cfg.solver);
    nlohmann::json prov = provenance(cfg);
    prov["measurement"] = fds::file_content_hash(meas_path);
    prov["psfs"] = fds::file_content_hash(psf_path);
    const std::string path = out_path(cfg, "recon.arr");
    fds::save_volume(path, rr.volume, {{"provenance", prov}});
    std::string jsonl;
    for (const auto& s : rr.telemetry) {
        nlohmann::json line{{"iter", s.iter},
                            {"objective", s.objective},
                            {"primal_residual", s.primal_residual},
                            {"dual_residual", s.dual_residual}};
        jsonl += line.dump() + "\n";
    }
    fds::write_text_atomic(out_path(cfg, "telemetry.jsonl"), jsonl);
    if (!rr.warning.empty()) std::cerr << "warning: " << rr.warning << "\n";
    std::cout << path << "\n";
    return 0;
}

int cmd_study(const CommonArgs& args) {
    fds::ExperimentConfig cfg = load(args);
    nlohmann::json results = fds::run_study(cfg, cfg.output_dir);
    std::cout << results.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier diffuser-scope design, simulation and reconstruction toolbox"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string volume_path, psf_path, meas_path, surface_path;

    CLI::App* c_design = app.add_subcommand("design", "closed-form design report");
    CLI::App* c_surface = app.add_subcommand("surface", "generate the phase-mask surface");
    CLI::App* c_psfs = app.add_subcommand("psfs", "simulate the per-depth PSF stack");
    CLI::App* c_forward = app.add_subcommand("forward", "forward-project a volume");
    CLI::App* c_recon = app.add_subcommand("reconstruct", "reconstruct a measurement");
    CLI::App* c_study = app.add_subcommand("study", "run the configured study");
    for (CLI::App* c : {c_design, c_surface, c_psfs, c_forward, c_recon, c_study})
        add_common(c, args);
    c_psfs->add_option("--surface", surface_path, "surface artifact (default: regenerate)");
    c_forward->add_option("--volume", volume_path, "volume artifact")->required();
    c_forward->add_option("--psfs", psf_path, "PSF stack artifact")->required();
    c_recon->add_option("--measurement", meas_path, "measurement artifact")->required();
    c_recon->add_option("--psfs", psf_path, "PSF stack artifact")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_design->parsed()) return cmd_design(args);
        if (c_surface->parsed()) return cmd_surface(args);
        if (c_psfs->parsed()) return cmd_psfs(args, surface_path);
        if (c_forward->parsed()) return cmd_forward(args, volume_path, psf_path);
        if (c_recon->parsed()) return cmd_reconstruct(args, meas_path, psf_path);
        if (c_study->parsed()) return cmd_study(args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
