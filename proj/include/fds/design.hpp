#pragma once

#include <vector>

#include "fds/optical_system.hpp"

namespace fds {

// Closed-form performance and phase-mask design equations. All functions are
// pure; lengths in um except focal lengths and pitches in mm.

struct DesignReport {
    double na_eff = 0;
    double magnification = 0;
    double r_lateral_um = 0;
    double r_axial_um = 0;
    double dof_microlens_um = 0;
    double fov_mla_um = 0;
    double fov_random_um = 0;
    double depth_range_upper_bound_um = 0;  // N^2 * DOF
    double depth_range_design_um = 0;       // half of the upper bound (DOFs overlap by half)
    double nyquist_pixel_um = 0;            // M * R_lateral / 2
};

double effective_na(const OpticalSystem& sys);

// Rayleigh-criterion in-focus lateral resolution, um.
double lateral_resolution(const OpticalSystem& sys);

// Object-to-sensor lateral magnification.
double magnification(const OpticalSystem& sys);

// Radius of the geometric circle of confusion at the sensor for a point
// defocused by dz (um, signed; > 0 toward the objective). Returns um.
double circle_of_confusion(const OpticalSystem& sys, double defocus_um);

// In-focus axial resolution, um. Requires N >= 2.
double axial_resolution(const OpticalSystem& sys);

// Off-focus axial resolution: the R_lateral term replaced by the
// object-space circle-of-confusion radius.
double axial_resolution_defocused(const OpticalSystem& sys, double defocus_um);

// In-focus FOV, um: pitch-limited for MLA, full objective FOV for RUM/RMM.
double fov(const OpticalSystem& sys, LayoutKind layout);

// Depth of field of a single microlens (wave + geometric terms), um.
double dof_microlens(const OpticalSystem& sys);

// Dioptric defocus power per unit depth, (f_TL/(f_RL*f_obj))^2, in 1/mm^2.
double defocus_power_per_mm(const OpticalSystem& sys);

// `count` focal lengths (mm) whose reciprocals are evenly spaced so the
// conjugate object planes tile [-z, +z] evenly. Ordered from f_min (focus at
// +z, nearest the objective) to f_max. Throws if any focal length would be
// nonpositive.
std::vector<double> focal_length_schedule(const OpticalSystem& sys, double z_half_range_um,
                                          int count);

// Object-space depth (um) at which a lenslet of focal length f_mm is conjugate
// to the sensor. Inverse of the schedule mapping.
double conjugate_depth_um(const OpticalSystem& sys, double f_mm);

DesignReport make_design_report(const OpticalSystem& sys);

}  // namespace fds
