#include "fds/studies.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fds/analysis.hpp"
#include "fds/container.hpp"
#include "fds/design.hpp"

namespace fds {

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

namespace {

nlohmann::json provenance_base(const ExperimentConfig& cfg) {
    return {{"config_hash", cfg.config_hash()}, {"seed", cfg.seed}};
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

DiffuserSurface make_surface(const ExperimentConfig& cfg, LayoutKind kind) {
    return generate_surface(cfg.system, kind, cfg.mask_index, cfg.grid.sim_pitch_um,
                            cfg.z_half_range_um, cfg.seed);
}

}  // namespace

nlohmann::json run_resolution_study(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto& sp = cfg.study;
    nlohmann::json results{{"study", "resolution"},
                           {"provenance", provenance_base(cfg)},
                           {"z_positions_um", sp.z_list_um}};
    const bool do_lat = sp.axis == "lateral" || sp.axis == "both";
    const bool do_ax = sp.axis == "axial" || sp.axis == "both";

    for (const auto& lname : sp.layouts) {
        const LayoutKind kind = layout_from_name(lname);
        DiffuserSurface surf = make_surface(cfg, kind);
        nlohmann::json prov = provenance_base(cfg);
        const std::string surf_path = join_path(out_dir, "surface_" + lname + ".arr");
        save_surface(surf_path, surf, {{"provenance", prov}});

        TwoPointHarness harness(cfg.system, surf, cfg.grid, cfg.rl_iters);
        nlohmann::json lat = nlohmann::json::array(), ax = nlohmann::json::array();
        nlohmann::json lat_ok = nlohmann::json::array(), ax_ok = nlohmann::json::array();
        for (double z : sp.z_list_um) {
            if (do_lat) {
                auto r = harness.lateral_resolution(z, sp.search_step_um, sp.max_separation_um);
                lat.push_back(r.separation_um);
                lat_ok.push_back(r.resolved);
            }
            if (do_ax) {
                auto r = harness.axial_resolution(z, sp.axial_search_step_um,
                                                 sp.max_axial_separation_um);
                ax.push_back(r.separation_um);
                ax_ok.push_back(r.resolved);
            }
        }
        results["layouts"][lname] = {{"lateral_res_um", lat},
                                     {"lateral_resolved", lat_ok},
                                     {"axial_res_um", ax},
                                     {"axial_resolved", ax_ok}};

        // PSF stack at the probed depths (cache hits by now).
        PSFStack stack;
        std::vector<double> zs = sp.z_list_um;
        std::sort(zs.begin(), zs.end());
        for (double z : zs) stack.kernels.push_back(harness.psf_at(z));
        stack.z_positions_um = zs;
        stack.sensor_pitch_um = cfg.system.pixel_um;
        nlohmann::json pprov = provenance_base(cfg);
        pprov["surface"] = file_content_hash(surf_path);
        save_psf_stack(join_path(out_dir, "psfs_" + lname + ".arr"), stack,
                       {{"provenance", pprov}});
    }

    std::ostringstream csv;
    csv << "z_um";
    for (const auto& l : sp.layouts) {
        if (do_lat) csv << "," << l << "_lateral_um";
        if (do_ax) csv << "," << l << "_axial_um";
    }
    csv << "\n";
    for (std::size_t i = 0; i < sp.z_list_um.size(); ++i) {
        csv << sp.z_list_um[i];
        for (const auto& l : sp.layouts) {
            if (do_lat) csv << "," << results["layouts"][l]["lateral_res_um"][i].get<double>();
            if (do_ax) csv << "," << results["layouts"][l]["axial_res_um"][i].get<double>();
        }
        csv << "\n";
    }
    write_text_atomic(join_path(out_dir, "resolution.csv"), csv.str());
    write_text_atomic(join_path(out_dir, "resolution_results.json"), results.dump(2) + "\n");
    return results;
}

nlohmann::json run_fov_study(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto& sp = cfg.study;
    const double mag = magnification(cfg.system);
    const double obj_pitch = cfg.system.pixel_um / mag;

    Array2D<Real> phantom = fov_phantom(sp.phantom_extent_um, "chart", obj_pitch);
    const std::size_t n = phantom.rows();
    // Ghost replicas of an MLA sit one lenslet pitch away in object space;
    // keep them inside the reconstruction grid.
    const long ghost_px = std::lround(fov(cfg.system, LayoutKind::MLA) / obj_pitch);
    std::size_t vol_n = n + 2 * static_cast<std::size_t>(ghost_px);
    vol_n = next_fast_size(vol_n);
    const std::size_t n_blocks = 8;
    const std::size_t block_px = n / n_blocks;

    nlohmann::json results{{"study", "fov"},
                           {"provenance", provenance_base(cfg)},
                           {"phantom_extent_um", sp.phantom_extent_um}};
    save_real_array(join_path(out_dir, "fov_phantom.arr"), phantom.raw(), {n, n},
                    {{"pitch_um", obj_pitch}, {"provenance", provenance_base(cfg)}});

    for (const auto& lname : sp.layouts) {
        const LayoutKind kind = layout_from_name(lname);
        DiffuserSurface surf = make_surface(cfg, kind);

        // Shift-varying forward model: one PSF per block of the phantom.
        std::vector<std::vector<Array2D<Real>>> field(n_blocks);
        std::vector<double> diag_shift_um;
        std::vector<Array2D<Real>> diag_psfs;
        for (std::size_t by = 0; by < n_blocks; ++by)
            for (std::size_t bx = 0; bx < n_blocks; ++bx) {
                const double ox =
                    ((bx + 0.5) * block_px - n / 2.0) * obj_pitch;
                const double oy =
                    ((by + 0.5) * block_px - n / 2.0) * obj_pitch;
                field[by].push_back(simulate_psf(cfg.system, surf, cfg.grid, {ox, oy, 0}));
                if (by == bx) {
                    diag_shift_um.push_back(std::hypot(ox, oy) * (ox < 0 ? -1 : 1));
                    diag_psfs.push_back(field[by].back());
                }
            }
        Array2D<Real> onaxis = simulate_psf(cfg.system, surf, cfg.grid, {0, 0, 0});

        Measurement meas =
            forward_project_blockwise(phantom, field, block_px, cfg.system.pixel_um);
        if (cfg.noise_fraction > 0) meas = add_gaussian_noise(meas, cfg.noise_fraction, cfg.seed);
        nlohmann::json mprov = provenance_base(cfg);
        const std::string meas_path = join_path(out_dir, "fov_measurement_" + lname + ".arr");
        save_measurement(meas_path, meas, {{"provenance", mprov}});

        PSFStack stack;
        stack.kernels.push_back(onaxis);
        stack.z_positions_um = {0.0};
        stack.sensor_pitch_um = cfg.system.pixel_um;
        ReconResult rr = richardson_lucy(meas, stack, cfg.rl_iters, vol_n, vol_n);
        const auto& vol = rr.volume.intensities;
        nlohmann::json rprov = provenance_base(cfg);
        rprov["measurement"] = file_content_hash(meas_path);
        save_volume(join_path(out_dir, "fov_recon_" + lname + ".arr"), rr.volume,
                    {{"provenance", rprov}});

        // Ghost metric: reconstruction energy inside the +-one-pitch shifted
        // copies of the phantom support (minus the true support), relative to
        // the energy inside the true support. Any deconvolution halo decays
        // isotropically, so the energy in four control zones at the same
        // radius but rotated 45 degrees (where a square-lattice replica
        // cannot sit) is subtracted as background; what remains is
        // pitch-specific replica energy.
        const long off0 = static_cast<long>(vol_n / 2 - n / 2);
        auto in_support = [&](long y, long x) {
            const long py = y - off0, px = x - off0;
            return py >= 0 && px >= 0 && py < static_cast<long>(n) && px < static_cast<long>(n) &&
                   phantom(py, px) > 0.5;
        };
        double signal = 0;
        for (long y = 0; y < static_cast<long>(vol_n); ++y)
            for (long x = 0; x < static_cast<long>(vol_n); ++x)
                if (in_support(y, x)) signal += vol(0, y, x) * vol(0, y, x);
        auto zone_energy = [&](long gy, long gx) {
            double e = 0;
            for (long y = 0; y < static_cast<long>(vol_n); ++y)
                for (long x = 0; x < static_cast<long>(vol_n); ++x)
                    if (in_support(y - gy, x - gx) && !in_support(y, x))
                        e += vol(0, y, x) * vol(0, y, x);
            return e;
        };
        double ghost_raw = 0;
        for (auto [gy, gx] : {std::pair<long, long>{ghost_px, 0},
                              {-ghost_px, 0},
                              {0, ghost_px},
                              {0, -ghost_px}})
            ghost_raw = std::max(ghost_raw, zone_energy(gy, gx));
        const long diag = std::lround(ghost_px / std::sqrt(2.0));
        double control = 0;
        for (auto [gy, gx] : {std::pair<long, long>{diag, diag},
                              {-diag, diag},
                              {diag, -diag},
                              {-diag, -diag}})
            control += zone_energy(gy, gx) / 4.0;
        const double ghost_fraction =
            signal > 0 ? std::max(0.0, ghost_raw - control) / signal : 0.0;

        // PSNR of the central crop against the phantom, least-squares scaled.
        Array2D<Real> crop(n, n);
        for (std::size_t y = 0; y < n; ++y)
            for (std::size_t x = 0; x < n; ++x) crop(y, x) = vol(0, off0 + y, off0 + x);
        const double rr2 = dot_value(crop, crop);
        const double alpha = rr2 > 0 ? dot_value(crop, phantom) / rr2 : 0.0;
        for (auto& v : crop.raw()) v *= alpha;
        const double p = psnr(crop, phantom);

        SimilarityProfile prof = cosine_similarity_profile(onaxis, diag_psfs, diag_shift_um);
        double min_sim = 1.0;
        for (double s : prof.cosine_similarity) min_sim = std::min(min_sim, s);

        results["layouts"][lname] = {
            {"ghost_fraction", ghost_fraction},
            {"ghost_fraction_raw", signal > 0 ? ghost_raw / signal : 0.0},
            {"ghost_control_fraction", signal > 0 ? control / signal : 0.0},
            {"psnr_db", std::isfinite(p) ? p : 1e9},
            {"cosine_similarity", prof.cosine_similarity},
            {"similarity_shift_um", prof.shift_positions_um},
            {"min_cosine_similarity", min_sim}};
    }

    std::ostringstream csv;
    csv << "shift_um";
    for (const auto& l : sp.layouts) csv << "," << l << "_cosine_similarity";
    csv << "\n";
    const auto& shifts = results["layouts"][sp.layouts[0]]["similarity_shift_um"];
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        csv << shifts[i].get<double>();
        for (const auto& l : sp.layouts)
            csv << "," << results["layouts"][l]["cosine_similarity"][i].get<double>();
        csv << "\n";
    }
    write_text_atomic(join_path(out_dir, "fov_similarity.csv"), csv.str());
    write_text_atomic(join_path(out_dir, "fov_results.json"), results.dump(2) + "\n");
    return results;
}

nlohmann::json run_depthrange_study(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto& sp = cfg.study;
    const double obj_pitch = cfg.system.pixel_um / magnification(cfg.system);

    SpiralSpec spec;
    spec.n_spheres = sp.n_spheres;
    spec.sphere_diameter_um = sp.sphere_diameter_um;
    spec.z_top_um = sp.z_top_um;
    spec.z_step_um = sp.z_step_um;
    spec.lateral_pitch_um = obj_pitch;
    SpiralPhantom phantom = spiral_phantom(spec);
    save_volume(join_path(out_dir, "spiral_phantom.arr"), phantom.volume,
                {{"provenance", provenance_base(cfg)}});

    nlohmann::json results{{"study", "depthrange"},
                           {"provenance", provenance_base(cfg)},
                           {"n_spheres", sp.n_spheres}};
    for (const auto& lname : sp.layouts) {
        const LayoutKind kind = layout_from_name(lname);
        DiffuserSurface surf = make_surface(cfg, kind);
        PSFStack stack = simulate_psf_stack(cfg.system, surf, cfg.grid,
                                            phantom.volume.z_positions_um);
        nlohmann::json pprov = provenance_base(cfg);
        const std::string psf_path = join_path(out_dir, "spiral_psfs_" + lname + ".arr");
        save_psf_stack(psf_path, stack, {{"provenance", pprov}});

        Measurement meas = forward_project(phantom.volume, stack);
        if (cfg.noise_fraction > 0) meas = add_gaussian_noise(meas, cfg.noise_fraction, cfg.seed);
        nlohmann::json mprov = provenance_base(cfg);
        mprov["psfs"] = file_content_hash(psf_path);
        const std::string meas_path = join_path(out_dir, "spiral_measurement_" + lname + ".arr");
        save_measurement(meas_path, meas, {{"provenance", mprov}});

        ReconResult rr = admm_tv(meas, stack, cfg.solver, phantom.volume.intensities.ny(),
                                 phantom.volume.intensities.nx());
        rr.volume.lateral_pitch_um = obj_pitch;
        nlohmann::json rprov = provenance_base(cfg);
        rprov["measurement"] = file_content_hash(meas_path);
        save_volume(join_path(out_dir, "spiral_recon_" + lname + ".arr"), rr.volume,
                    {{"provenance", rprov}});

        const std::vector<int> resolved =
            resolved_sphere_indices(rr.volume, phantom.centers_um, sp.sphere_diameter_um / 2);
        nlohmann::json rz = nlohmann::json::array();
        for (int i : resolved) rz.push_back(phantom.centers_um[i][2]);
        results["layouts"][lname] = {{"resolved_spheres", resolved.size()},
                                     {"resolved_indices", resolved},
                                     {"resolved_z_um", rz},
                                     {"admm_converged", rr.converged},
                                     {"admm_iters", rr.telemetry.size()}};
    }

    std::ostringstream csv;
    csv << "layout,resolved_spheres\n";
    for (const auto& l : sp.layouts)
        csv << l << "," << results["layouts"][l]["resolved_spheres"].get<int>() << "\n";
    write_text_atomic(join_path(out_dir, "depthrange.csv"), csv.str());
    write_text_atomic(join_path(out_dir, "depthrange_results.json"), results.dump(2) + "\n");
    return results;
}

nlohmann::json run_study(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.study.name == "resolution") return run_resolution_study(cfg, out_dir);
    if (cfg.study.name == "fov") return run_fov_study(cfg, out_dir);
    if (cfg.study.name == "depthrange") return run_depthrange_study(cfg, out_dir);
    throw std::invalid_argument("run_study: config selects no study (study.name)");
}

}  // namespace fds
