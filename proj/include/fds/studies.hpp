#pragma once

#include <string>

#include "json.hpp"

#include "fds/config.hpp"

namespace fds {

// Study harnesses mirroring the three experiment families: two-point
// resolution curves, FOV/similarity, and the spiral depth-range comparison.
// Each writes its container artifacts plus a results JSON and CSV table into
// out_dir and returns the results document.
nlohmann::json run_resolution_study(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json run_fov_study(const ExperimentConfig& cfg, const std::string& out_dir);
nlohmann::json run_depthrange_study(const ExperimentConfig& cfg, const std::string& out_dir);

// Dispatch on cfg.study.name.
nlohmann::json run_study(const ExperimentConfig& cfg, const std::string& out_dir);

// Shared atomic text write (temp + rename).
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace fds
