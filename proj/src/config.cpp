#include "fds/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include "fds/design.hpp"
#include "fds/rng.hpp"

namespace fds {

namespace {

void reject_unknown_keys(const nlohmann::json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void get_if(const nlohmann::json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

OpticalSystem parse_system(const nlohmann::json& j) {
    reject_unknown_keys(j, {"wavelength_um", "medium_index", "obj_focal_mm", "obj_na",
                            "obj_fov_mm", "pupil_diameter_mm", "tube_focal_mm", "relay_focal_mm",
                            "pixel_um", "n_lenslets_1d", "pitch_mm", "f_ave_mm", "f_min_mm",
                            "f_max_mm"},
                        "system");
    OpticalSystem s;
    get_if(j, "wavelength_um", s.wavelength_um);
    get_if(j, "medium_index", s.medium_index);
    get_if(j, "obj_focal_mm", s.obj_focal_mm);
    get_if(j, "obj_na", s.obj_na);
    get_if(j, "obj_fov_mm", s.obj_fov_mm);
    get_if(j, "pupil_diameter_mm", s.pupil_diameter_mm);
    get_if(j, "tube_focal_mm", s.tube_focal_mm);
    get_if(j, "relay_focal_mm", s.relay_focal_mm);
    get_if(j, "pixel_um", s.pixel_um);
    get_if(j, "n_lenslets_1d", s.n_lenslets_1d);
    get_if(j, "pitch_mm", s.pitch_mm);
    get_if(j, "f_ave_mm", s.f_ave_mm);
    get_if(j, "f_min_mm", s.f_min_mm);
    get_if(j, "f_max_mm", s.f_max_mm);
    return s;
}

SimGrid parse_grid(const nlohmann::json& j) {
    reject_unknown_keys(j, {"sim_size", "sim_pitch_um", "sensor_size", "apodization"}, "grid");
    SimGrid g;
    get_if(j, "sim_size", g.sim_size);
    get_if(j, "sim_pitch_um", g.sim_pitch_um);
    get_if(j, "sensor_size", g.sensor_size);
    if (j.contains("apodization")) {
        const std::string a = j.at("apodization").get<std::string>();
        if (a == "flat")
            g.apodization = Apodization::Flat;
        else if (a == "sine_condition")
            g.apodization = Apodization::SineCondition;
        else
            throw std::invalid_argument("config: grid.apodization must be flat or sine_condition");
    }
    return g;
}

SolverConfig parse_solver(const nlohmann::json& j) {
    reject_unknown_keys(
        j, {"tau", "max_iters", "tolerance", "rho", "gamma_xy", "gamma_z", "nonneg"}, "solver");
    SolverConfig s;
    get_if(j, "tau", s.tau);
    get_if(j, "max_iters", s.max_iters);
    get_if(j, "tolerance", s.tolerance);
    get_if(j, "rho", s.admm_rho);
    get_if(j, "gamma_xy", s.tv_weights.gamma_xy);
    get_if(j, "gamma_z", s.tv_weights.gamma_z);
    get_if(j, "nonneg", s.nonneg_flag);
    return s;
}

StudyParams parse_study(const nlohmann::json& j) {
    reject_unknown_keys(j,
                        {"name", "layouts", "z_list_um", "axis", "search_step_um",
                         "axial_search_step_um", "max_separation_um", "max_axial_separation_um",
                         "phantom_extent_um", "n_spheres", "sphere_diameter_um", "z_top_um",
                         "z_step_um"},
                        "study");
    StudyParams s;
    get_if(j, "name", s.name);
    get_if(j, "layouts", s.layouts);
    get_if(j, "z_list_um", s.z_list_um);
    get_if(j, "axis", s.axis);
    get_if(j, "search_step_um", s.search_step_um);
    get_if(j, "axial_search_step_um", s.axial_search_step_um);
    get_if(j, "max_separation_um", s.max_separation_um);
    get_if(j, "max_axial_separation_um", s.max_axial_separation_um);
    get_if(j, "phantom_extent_um", s.phantom_extent_um);
    get_if(j, "n_spheres", s.n_spheres);
    get_if(j, "sphere_diameter_um", s.sphere_diameter_um);
    get_if(j, "z_top_um", s.z_top_um);
    get_if(j, "z_step_um", s.z_step_um);
    if (!s.name.empty() && s.name != "resolution" && s.name != "fov" && s.name != "depthrange")
        throw std::invalid_argument("config: study.name must be resolution, fov or depthrange");
    if (s.axis != "lateral" && s.axis != "axial" && s.axis != "both")
        throw std::invalid_argument("config: study.axis must be lateral, axial or both");
    for (const auto& l : s.layouts) layout_from_name(l);  // validates
    return s;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
    reject_unknown_keys(j,
                        {"system", "layout", "seed", "grid", "mask_index", "z_half_range_um",
                         "z_planes_um", "solver_method", "rl_iters", "solver", "noise_fraction",
                         "study", "output_dir"},
                        "top level");
    ExperimentConfig c;
    c.source = j;
    if (!j.contains("system"))
        throw std::invalid_argument("config: missing required section 'system'");
    c.system = parse_system(j.at("system"));
    if (c.system.f_ave_mm > 0 && (c.system.f_min_mm <= 0 || c.system.f_max_mm <= 0)) {
        // Derive the extreme focal lengths from the design schedule when the
        // config leaves them out.
        double zhr = 100.0;
        if (j.contains("z_half_range_um")) zhr = j.at("z_half_range_um").get<double>();
        const auto sched = focal_length_schedule(c.system, zhr, 2);
        c.system.f_min_mm = sched.front();
        c.system.f_max_mm = sched.back();
    }
    c.system.validate();
    if (j.contains("layout")) c.layout = layout_from_name(j.at("layout").get<std::string>());
    get_if(j, "seed", c.seed);
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    get_if(j, "mask_index", c.mask_index);
    get_if(j, "z_half_range_um", c.z_half_range_um);
    get_if(j, "z_planes_um", c.z_planes_um);
    if (j.contains("solver_method")) {
        c.solver_method = j.at("solver_method").get<std::string>();
        if (c.solver_method != "admm" && c.solver_method != "rl")
            throw std::invalid_argument("config: solver_method must be admm or rl");
    }
    get_if(j, "rl_iters", c.rl_iters);
    if (c.rl_iters < 1) throw std::invalid_argument("config: rl_iters must be >= 1");
    if (j.contains("solver")) c.solver = parse_solver(j.at("solver"));
    get_if(j, "noise_fraction", c.noise_fraction);
    if (c.noise_fraction < 0)
        throw std::invalid_argument("config: noise_fraction must be >= 0");
    if (j.contains("study")) c.study = parse_study(j.at("study"));
    get_if(j, "output_dir", c.output_dir);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

std::string ExperimentConfig::config_hash() const {
    const std::string canon = source.dump();
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(canon)));
    return hex;
}

}  // namespace fds
