#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

#include "signdim/analysis.hpp"

namespace signdim {

/// Parses the flat TOML subset used for config files: `[section]` headers,
/// `key = value` lines with integer, float, boolean or double-quoted string
/// values, and `#` comments. Sections become nested objects.
nlohmann::json parse_toml_subset(std::string_view text);

/// Loads a .json file, or anything else as the TOML subset.
nlohmann::json load_config(const std::filesystem::path& path);

// Each overlay copies the keys present in its section and leaves the rest.
// Recognized sections: fit, bound, search, pipeline, loo, simulate; plus a
// top-level seed and solver.
void apply_config(const nlohmann::json& cfg, FitConfig& fit);
void apply_config(const nlohmann::json& cfg, BoundConfig& bound);
void apply_config(const nlohmann::json& cfg, SearchBudget& budget);
void apply_config(const nlohmann::json& cfg, FeasibilityConfig& feas);
void apply_config(const nlohmann::json& cfg, PipelineConfig& pipeline);
void apply_config(const nlohmann::json& cfg, LooConfig& loo);
void apply_config(const nlohmann::json& cfg, ReportConfig& report);
void apply_config(const nlohmann::json& cfg, SyntheticParams& params);

}  // namespace signdim
