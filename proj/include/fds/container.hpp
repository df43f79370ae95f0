#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "fds/forward.hpp"
#include "fds/surface.hpp"

namespace fds {

// Persistent array container: one line of UTF-8 JSON (terminated by '\n')
// followed immediately by the raw little-endian payload, row-major. The
// header always carries "dtype" ("f32le" or "c64le") and "shape"; pitch_um,
// z_positions_um, seed and provenance ride along when meaningful. Writes are
// atomic (temp file + rename) and deterministic, so identical inputs produce
// byte-identical files.

struct LoadedArray {
    nlohmann::json header;
    std::vector<std::size_t> shape;
    std::vector<Real> real_data;        // filled when dtype == f32le
    std::vector<Complex> complex_data;  // filled when dtype == c64le
};

void save_real_array(const std::string& path, const std::vector<Real>& data,
                     const std::vector<std::size_t>& shape,
                     nlohmann::json extra = nlohmann::json::object());
void save_complex_array(const std::string& path, const std::vector<Complex>& data,
                        const std::vector<std::size_t>& shape,
                        nlohmann::json extra = nlohmann::json::object());

// Throws std::runtime_error naming the file and the offending header field.
LoadedArray load_array(const std::string& path);

// FNV-1a over the whole file, as "fnv64:<16 hex digits>"; used for the
// provenance chain in derived artifacts.
std::string file_content_hash(const std::string& path);

void save_measurement(const std::string& path, const Measurement& m,
                      nlohmann::json extra = nlohmann::json::object());
Measurement load_measurement(const std::string& path);

void save_volume(const std::string& path, const Volume& v,
                 nlohmann::json extra = nlohmann::json::object());
Volume load_volume(const std::string& path);

void save_psf_stack(const std::string& path, const PSFStack& s,
                    nlohmann::json extra = nlohmann::json::object());
PSFStack load_psf_stack(const std::string& path);

void save_surface(const std::string& path, const DiffuserSurface& s,
                  nlohmann::json extra = nlohmann::json::object());
DiffuserSurface load_surface(const std::string& path);

}  // namespace fds
