#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qpsim/config.hpp"

namespace qpsim::cli {

inline constexpr const char* kToolName = "qpsim";
inline constexpr const char* kToolVersion = "1.0.0";

struct InputFile {
  std::string name;
  std::string contents;
};

// File name -> contents, written in name order.
using OutputSet = std::map<std::string, std::string>;

// Writes every output atomically, then manifest.json listing the inputs'
// and outputs' SHA-256 with the seed and tool version. Returns the paths
// written, manifest last.
std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const std::string& experiment,
                                                 std::optional<std::uint64_t> seed,
                                                 const std::vector<InputFile>& inputs, const OutputSet& outputs);

// Computes the experiment's outputs without touching the file system.
OutputSet compute_outputs(const ExperimentConfig& config, std::vector<InputFile>& inputs, std::ostream& log);

std::vector<std::filesystem::path> run(const ExperimentConfig& config, std::ostream& log);

// mesh.json from a matrix file / matrix.json from a mesh file.
std::vector<std::filesystem::path> run_mesh_decompose(const std::filesystem::path& matrix_path,
                                                      const std::filesystem::path& output_dir, std::ostream& log);
std::vector<std::filesystem::path> run_mesh_compose(const std::filesystem::path& mesh_path,
                                                    const std::filesystem::path& output_dir, std::ostream& log);

// Short machine-readable class of an exception, e.g. "range_error".
std::string error_kind(const std::exception& e);

}  // namespace qpsim::cli
