#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpsim/loss_budget.hpp"
#include "qpsim/mesh.hpp"
#include "qpsim/photon.hpp"
#include "qpsim/router.hpp"

namespace qpsim::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string read_text(const std::filesystem::path& path);
// Writes through a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& contents);
std::string sha256_hex(const std::string& bytes);

// {"schema_version", "rows", "cols", "real": [[...]], "imag": [[...]]}
json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const json& j);

// {"schema_version", "n_modes", "cells": [{"modes": [i, j], "theta", "phi"}], "output_phases"}
json mesh_to_json(const MeshConfig& config);
MeshConfig mesh_from_json(const json& j);

// {"input": [k, l], "outputs": [{"pattern": [i, j], "p"}]}
json distribution_to_json(const TwoPhotonDistribution& d);
TwoPhotonDistribution distribution_from_json(const json& j);

// {"channels": {name: {"t_ns": [...], "v": [...]}}, "routing": {name: [mzi, ...]}}
json pulse_program_to_json(const PulseProgram& p);
PulseProgram pulse_program_from_json(const json& j);

// List of {"label", "loss_db"} or {"label", "db_per_cm", "length_cm"}; grating
// coupler entries carry "grating_coupler": true and are re-evaluated in sweeps.
json budget_to_json(const LossBudget& b);
LossBudget budget_from_json(const json& j);

json switch_metrics_to_json(const SwitchMetrics& m);
SwitchMetrics switch_metrics_from_json(const json& j);

// time_ns,out0,out1,out2,out3
std::string time_trace_to_csv(const TimeTrace& t);
TimeTrace time_trace_from_csv(const std::string& text, double frame_period_ns);

struct FringeRow {
  double voltage_V = 0.0;
  double phase_rad = 0.0;
  double coincidence = 0.0;
};
// voltage_V,phase_rad,coincidence
std::string fringe_to_csv(const std::vector<FringeRow>& rows);
std::vector<FringeRow> fringe_from_csv(const std::string& text);

json hom_fit_to_json(const HomFit& fit);
HomFit hom_fit_from_json(const json& j);

struct SweepRow {
  double wavelength_nm = 0.0;
  double total_db = 0.0;
  double transmission = 0.0;
};
// wavelength_nm,total_db,transmission
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_from_csv(const std::string& text);

}  // namespace qpsim::io
