#include "fds/design.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace fds {

std::string layout_name(LayoutKind k) {
    switch (k) {
        case LayoutKind::MLA: return "MLA";
        case LayoutKind::RUM: return "RUM";
        case LayoutKind::RMM: return "RMM";
    }
    return "?";
}

LayoutKind layout_from_name(const std::string& name) {
    std::string up = name;
    for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (up == "MLA") return LayoutKind::MLA;
    if (up == "RUM") return LayoutKind::RUM;
    if (up == "RMM") return LayoutKind::RMM;
    throw std::invalid_argument("unknown layout kind: " + name);
}

void OpticalSystem::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0)) throw std::invalid_argument(std::string(name) + " must be > 0");
    };
    positive(wavelength_um, "wavelength_um");
    positive(medium_index, "medium_index");
    positive(obj_focal_mm, "obj_focal_mm");
    positive(obj_fov_mm, "obj_fov_mm");
    positive(pupil_diameter_mm, "pupil_diameter_mm");
    positive(tube_focal_mm, "tube_focal_mm");
    positive(relay_focal_mm, "relay_focal_mm");
    positive(pixel_um, "pixel_um");
    positive(pitch_mm, "pitch_mm");
    positive(f_ave_mm, "f_ave_mm");
    positive(f_min_mm, "f_min_mm");
    positive(f_max_mm, "f_max_mm");
    if (!(obj_na > 0 && obj_na <= medium_index))
        throw std::invalid_argument("obj_na must satisfy 0 < NA_obj <= n_r");
    if (n_lenslets_1d < 2)
        throw std::invalid_argument("n_lenslets_1d must be >= 2");
    // N * p equals the relayed pupil diameter.
    const double relayed = (relay_focal_mm / tube_focal_mm) * 2.0 * obj_na * obj_focal_mm;
    const double np = n_lenslets_1d * pitch_mm;
    if (std::abs(np - relayed) > 1e-9 * relayed)
        throw std::invalid_argument("N*p does not equal the relayed pupil diameter");
    if (!(f_min_mm <= f_ave_mm && f_ave_mm <= f_max_mm))
        throw std::invalid_argument("require f_min <= f_ave <= f_max");
}

double effective_na(const OpticalSystem& sys) {
    return sys.obj_na / sys.n_lenslets_1d;
}

double lateral_resolution(const OpticalSystem& sys) {
    return 1.22 * sys.wavelength_um * sys.n_lenslets_1d / (2.0 * sys.obj_na);
}

double magnification(const OpticalSystem& sys) {
    return (sys.tube_focal_mm / sys.obj_focal_mm) * (sys.f_ave_mm / sys.relay_focal_mm);
}

double defocus_power_per_mm(const OpticalSystem& sys) {
    const double r = sys.tube_focal_mm / (sys.relay_focal_mm * sys.obj_focal_mm);
    return r * r;
}

double circle_of_confusion(const OpticalSystem& sys, double defocus_um) {
    // (p*f_ave/2) * K * |dz|, with K in 1/mm^2 and dz in um; the mm^2 factors
    // cancel so the result carries the um of dz.
    return 0.5 * sys.pitch_mm * sys.f_ave_mm * defocus_power_per_mm(sys) * std::abs(defocus_um);
}

double axial_resolution(const OpticalSystem& sys) {
    const int n = sys.n_lenslets_1d;
    if (n < 2) throw std::invalid_argument("axial resolution undefined for N < 2");
    return (static_cast<double>(n) * n / (n - 1)) * 1.22 * sys.wavelength_um /
           (2.0 * sys.obj_na * sys.obj_na);
}

double axial_resolution_defocused(const OpticalSystem& sys, double defocus_um) {
    const int n = sys.n_lenslets_1d;
    if (n < 2) throw std::invalid_argument("axial resolution undefined for N < 2");
    const double coc_object_um = circle_of_confusion(sys, defocus_um) / magnification(sys);
    return (static_cast<double>(n) / (n - 1)) * coc_object_um / sys.obj_na;
}

double fov(const OpticalSystem& sys, LayoutKind layout) {
    if (layout == LayoutKind::MLA)
        return sys.pitch_mm * MM_TO_UM / magnification(sys);
    return sys.obj_fov_mm * MM_TO_UM;
}

double dof_microlens(const OpticalSystem& sys) {
    const double na_eff = effective_na(sys);
    const double wave = sys.wavelength_um * sys.medium_index / (na_eff * na_eff);
    const double geom = sys.medium_index * sys.pixel_um / (magnification(sys) * na_eff);
    return wave + geom;
}

std::vector<double> focal_length_schedule(const OpticalSystem& sys, double z_half_range_um,
                                          int count) {
    if (count < 2) throw std::invalid_argument("focal_length_schedule: count must be >= 2");
    if (!(z_half_range_um > 0))
        throw std::invalid_argument("focal_length_schedule: z_half_range_um must be > 0");
    const double k = defocus_power_per_mm(sys);           // 1/mm^2
    const double z_mm = z_half_range_um / MM_TO_UM;
    const double inv_min = 1.0 / sys.f_ave_mm + k * z_mm;  // focus at +z
    const double inv_max = 1.0 / sys.f_ave_mm - k * z_mm;  // focus at -z
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
        const double inv = inv_min + (inv_max - inv_min) * i / (count - 1);
        if (!(inv > 0))
            throw std::invalid_argument(
                "focal_length_schedule: nonphysical (nonpositive) focal length");
        out[i] = 1.0 / inv;
    }
    return out;
}

double conjugate_depth_um(const OpticalSystem& sys, double f_mm) {
    const double k = defocus_power_per_mm(sys);
    return (1.0 / f_mm - 1.0 / sys.f_ave_mm) / k * MM_TO_UM;
}

DesignReport make_design_report(const OpticalSystem& sys) {
    DesignReport r;
    r.na_eff = effective_na(sys);
    r.magnification = magnification(sys);
    r.r_lateral_um = lateral_resolution(sys);
    r.r_axial_um = axial_resolution(sys);
    r.dof_microlens_um = dof_microlens(sys);
    r.fov_mla_um = fov(sys, LayoutKind::MLA);
    r.fov_random_um = fov(sys, LayoutKind::RMM);
    const int n2 = sys.n_lenslets_1d * sys.n_lenslets_1d;
    r.depth_range_upper_bound_um = n2 * r.dof_microlens_um;
    r.depth_range_design_um = 0.5 * r.depth_range_upper_bound_um;
    r.nyquist_pixel_um = r.magnification * r.r_lateral_um / 2.0;
    return r;
}

}  // namespace fds
