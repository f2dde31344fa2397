#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pvstab/inverter.hpp"
#include "pvstab/report.hpp"
#include "pvstab/system.hpp"
#include "pvstab/timesim.hpp"

namespace pvstab {

struct GroupSpec {
  std::string label;
  std::optional<double> Td_us;  // total loop delay; unset -> (lambda+0.5) Ts
  int count = 1;
};

struct AnalysisConfig {
  int n_max = 1000;
  double margin_tol_rad_s = 0.0;
  std::string swept_label;
  double margin_Td_max_us = 0.0;
  double margin_step_us = 0.0;
  bool margin_includes_transformer = false;
  int locus_count_min = 1;
  int locus_count_max = 1;
  int locus_top_k = 1;
  std::vector<double> delay_values_us;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats;  // subset of {"json", "csv"}
};

struct RunConfig {
  InverterParams inverter;  // Td left unset; groups carry per-group delays
  double LT_H = 0.0;
  GridParams grid;
  std::vector<GroupSpec> groups;
  AnalysisConfig analysis;
  SimConfig sim;
  OutputConfig output;
};

/// The built-in parameter set: a 500 kW PV inverter sample point with a
/// calibrated two-level grid referral. configs/default.json mirrors it.
RunConfig default_profile();

/// Strict parse of a configuration JSON text: unknown keys, type mismatches
/// and cross-field violations are all collected and reported together in one
/// ValidationError. Missing keys fall back to the default profile.
RunConfig parse_config_text(const std::string& text);

/// parse_config_text over a file; unreadable files raise IoError.
RunConfig parse_config_file(const std::string& path);

/// Applies one `--set dotted.path=value` override to raw JSON text and
/// returns the modified text. Array elements use `path[index]`. The value is
/// parsed as JSON when possible and treated as a string otherwise. A missing
/// intermediate object is created; indexing past the end of an array is a
/// ValidationError.
std::string apply_override(const std::string& text,
                           const std::string& assignment);

/// Canonical serialization of the merged configuration (sorted keys, %.17g
/// doubles): the byte string whose FNV-1a hash identifies a run.
std::string canonical_config(const RunConfig& cfg);

/// Groups resolved to composition inputs (units converted to SI).
std::vector<PlantGroup> plant_groups(const RunConfig& cfg);

/// Grid resolved at the configured fundamental frequency.
GridImpedance resolved_grid(const RunConfig& cfg);

}  // namespace pvstab
