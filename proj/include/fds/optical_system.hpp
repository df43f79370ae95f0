#pragma once

#include <string>

namespace fds {

// Unit conventions, used across all modules:
//   * lens focal lengths, pitches and apertures are in millimeters
//   * everything else (wavelength, pixels, depths, resolutions) is in
//     micrometers
//   * conversions happen explicitly via MM_TO_UM at call sites
// Sign convention: defocus dz > 0 means the point source moves toward the
// objective.
inline constexpr double MM_TO_UM = 1000.0;

enum class LayoutKind { MLA, RUM, RMM };

std::string layout_name(LayoutKind k);
LayoutKind layout_from_name(const std::string& name);

// Scalar optical parameters of the full imaging chain: objective, tube lens,
// 4f relay, phase mask and sensor.
struct OpticalSystem {
    double wavelength_um = 0;    // lambda
    double medium_index = 0;     // n_r of the immersion medium
    double obj_focal_mm = 0;     // f_obj
    double obj_na = 0;           // NA_obj
    double obj_fov_mm = 0;       // FOV_obj (diameter)
    double pupil_diameter_mm = 0;  // D
    double tube_focal_mm = 0;    // f_TL
    double relay_focal_mm = 0;   // f_RL
    double pixel_um = 0;         // sensor pixel s
    int n_lenslets_1d = 0;       // N
    double pitch_mm = 0;         // average microlens pitch p
    double f_ave_mm = 0;
    double f_min_mm = 0;
    double f_max_mm = 0;

    // Throws std::invalid_argument describing the first violated invariant.
    void validate() const;
};

}  // namespace fds
