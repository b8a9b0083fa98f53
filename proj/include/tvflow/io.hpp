#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tvflow/diagnostics.hpp"
#include "tvflow/flow.hpp"

namespace tvflow {

// Flat binary field container ("TVF1"): header carries dims, spacing,
// boundary mode, ambient dimension and the manifold identifier, then the
// optional mask and the row-major double payload.
void write_field(const std::filesystem::path& path, const Field& u);
Field read_field(const std::filesystem::path& path);

// CSV for one-dimensional fields: x followed by the ambient components.
void write_field_csv(const std::filesystem::path& path, const Field& u);

// Mask container ("TVM1"): dims, spacing and one byte per cell.
struct MaskFile {
  std::vector<int> dims;
  double h = 0.0;
  std::vector<std::uint8_t> mask;
};
void write_mask(const std::filesystem::path& path, const MaskFile& m);
MaskFile read_mask(const std::filesystem::path& path);

// Diagnostics rows: t, energy, dissipation_acc, sup_v, ball_radius, f_mu.
void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj);

// Trajectory metadata (segments, markers, extinction time) as JSON.
void write_run_meta(const std::filesystem::path& path, const Trajectory& traj,
                    const std::string& config_echo);

// One JSON object per audit line.
void append_report_jsonl(const std::filesystem::path& path, const AuditReport& rep);

// Full run description parsed from a JSON config file. Errors name the
// offending key.
struct RunConfig {
  std::string manifold_id;
  std::vector<int> dims;
  double h = 0.0;
  Boundary boundary = Boundary::NeumannReflect;
  std::string mask_path;  // empty = unmasked
  FlowConfig flow;
  std::string datum_file;     // a field container path ...
  std::string generator;      // ... or a builtin generator id ...
  std::string datum_image;    // ... or an image path
  std::string datum_colorspace = "chromaticity_sphere";  // map used with datum_image
  std::vector<double> generator_params;  // flattened numeric params
  std::vector<double> p0;     // optional generator base point
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string config_echo;    // the raw JSON, for run_meta
};

RunConfig parse_run_config(const std::filesystem::path& path);

// Builds domain + datum from a parsed config (reads mask/datum files).
// reference_point carries the generator's base point, when one exists, for
// the ball_radius / f_mu diagnostics columns.
struct PreparedRun {
  std::shared_ptr<const GridDomain> domain;
  std::shared_ptr<const Manifold> manifold;
  Field u0;
  std::optional<std::vector<double>> reference_point;
};
PreparedRun prepare_run(const RunConfig& cfg);

}  // namespace tvflow
