#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "fds/optical_system.hpp"
#include "fds/recon.hpp"
#include "fds/wavesim.hpp"

namespace fds {

// Study-specific knobs; defaults target the desk-scale harness so the
// three studies run in minutes on a single core.
struct StudyParams {
    std::string name;  // resolution | fov | depthrange
    std::vector<std::string> layouts{"mla", "rum", "rmm"};
    // resolution study
    std::vector<double> z_list_um{-80, -40, -20, 0, 20, 40, 90};
    std::string axis = "lateral";  // lateral | axial | both
    double search_step_um = 0.1;
    double axial_search_step_um = 1.0;
    double max_separation_um = 8.0;
    double max_axial_separation_um = 40.0;
    // fov study
    // Spans >2 MLA-FOV ghost pitches at desk scale while every 8x8 block
    // center stays inside the off-axis simulation validity range.
    double phantom_extent_um = 118.2;
    // depth-range study
    int n_spheres = 39;
    double sphere_diameter_um = 2.0;
    double z_top_um = 95.0;
    double z_step_um = 5.0;
};

// One JSON document drives every subcommand. Parsing is strict: unknown keys
// anywhere in the document are rejected.
struct ExperimentConfig {
    OpticalSystem system;
    LayoutKind layout = LayoutKind::MLA;
    std::uint64_t seed = 0;
    SimGrid grid;
    double mask_index = 1.56;        // phase-mask material
    double z_half_range_um = 100.0;  // design depth range for the RMM schedule
    std::vector<double> z_planes_um; // PSF stack depths
    std::string solver_method = "admm";  // admm | rl
    int rl_iters = 8;
    SolverConfig solver;
    double noise_fraction = 0.0;
    StudyParams study;
    std::string output_dir = "out";

    nlohmann::json source;  // the parsed document, for provenance hashing
    std::string config_hash() const;
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace fds
