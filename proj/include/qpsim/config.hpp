#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qpsim/components.hpp"
#include "qpsim/loss_budget.hpp"
#include "qpsim/photon.hpp"

namespace qpsim::cli {

struct Diagnostic {
  std::string field;    // dotted path, e.g. "mzi.v_pi_V"
  std::string message;
  int line = 0;         // 1-based; 0 when unknown
};

std::string to_string(const Diagnostic& d);

enum class ExperimentKind { hom_fringe, demux, distribution, reconstruct, loss_budget };

const char* experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_name(const std::string& name);

struct HomSettings {
  double voltage_start_V = 0.0;
  double voltage_stop_V = 9.0;
  int points = 21;
  // Overlap used in the fringe; falls back to source indistinguishability
  // times chip_penalty.
  std::optional<double> pair_overlap;
  double chip_penalty = 1.0;
  bool include_accidentals = false;
  // Expected counts at unit coincidence probability. Zero writes noiseless
  // probabilities; positive values draw Poisson counts.
  double peak_counts = 0.0;
  bool fit = true;
};

struct DemuxSettings {
  int n_frames = 1;
  int samples_per_slot = 1380;
  double arrival_origin_ns = 0.0;
  std::optional<double> target_switching_probability;
  std::optional<std::filesystem::path> pulse_program_path;
};

enum class UnitarySource { no_drive, haar, mesh_file, matrix_file };

struct DistributionSettings {
  UnitarySource source = UnitarySource::no_drive;
  std::optional<std::filesystem::path> path;
  int n_modes = 4;
  std::optional<double> pair_overlap;
  double phase_noise_rad = 0.0;
};

struct ReconstructSettings {
  UnitarySource target = UnitarySource::haar;  // haar or matrix_file
  std::optional<std::filesystem::path> path;
  int n_modes = 4;
  double pair_overlap = 1.0;
  int restarts = 12;
  int max_iterations = 400;
};

struct GratingSettings {
  double center_nm = 930.0;
  double peak_db = -3.4;
  double bandwidth_1db_nm = 20.0;
  double band_min_nm = 900.0;
  double band_max_nm = 960.0;
  std::optional<std::filesystem::path> csv_path;
};

struct LossBudgetSettings {
  LossBudget budget;
  std::optional<std::filesystem::path> budget_path;
  GratingSettings grating;
  std::vector<double> wavelengths_nm;
};

struct ExperimentConfig {
  int schema_version = 1;
  ExperimentKind kind = ExperimentKind::hom_fringe;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = ".";
  MZIParams mzi;
  std::optional<double> extinction_ratio_db;
  SourceModel source;
  HomSettings hom;
  DemuxSettings demux;
  DistributionSettings distribution;
  ReconstructSettings reconstruct;
  LossBudgetSettings loss_budget;
  // Raw config text and the directory relative paths resolve against.
  std::string source_text;
  std::string source_name = "config.json";
  std::filesystem::path base_dir;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

struct ParsedConfig {
  ExperimentConfig config;
  std::vector<Diagnostic> diagnostics;  // every violation found, in document order

  bool ok() const { return diagnostics.empty(); }
};

// True when the run draws random numbers and so needs a seed.
bool is_stochastic(const ExperimentConfig& config);

ParsedConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                          const Overrides& overrides = {});

// Reads and checks a config file. Throws ParseError if it cannot be read.
ParsedConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
std::vector<Diagnostic> validate(const std::filesystem::path& path, const Overrides& overrides = {});

// The MZI used by experiments: `mzi` with the extinction ratio applied.
MZIParams effective_mzi(const ExperimentConfig& config);

}  // namespace qpsim::cli
