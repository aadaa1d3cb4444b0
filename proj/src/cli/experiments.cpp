#include "qpsim/experiments.hpp"

#include <random>
#include <typeinfo>

#include <json.hpp>

#include "qpsim/errors.hpp"
#include "qpsim/io.hpp"
#include "qpsim/mesh.hpp"
#include "qpsim/router.hpp"

namespace qpsim::cli {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(2) + "\n"; }

InputFile input_from(const std::filesystem::path& path) {
  return {path.filename().string(), io::read_text(path)};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return out;
}

OutputSet hom_fringe(const ExperimentConfig& cfg, std::ostream& log) {
  const HomSettings& h = cfg.hom;
  const MZIParams mzi = effective_mzi(cfg);
  const double x = h.pair_overlap ? *h.pair_overlap : effective_pair_overlap(cfg.source, h.chip_penalty);
  const auto volts = linspace(h.voltage_start_V, h.voltage_stop_V, h.points);
  std::vector<double> phases;
  for (double v : volts) phases.push_back(phase_from_voltage(mzi.shifter, v));
  const double floor = h.include_accidentals ? accidental_coincidence_floor(cfg.source) : 0.0;
  std::vector<double> values = hom_fringe(mzi, x, phases, floor);
  if (h.peak_counts > 0.0) {
    std::mt19937_64 rng(*cfg.seed);
    for (double& v : values) v = static_cast<double>(std::poisson_distribution<long long>(h.peak_counts * v)(rng));
  }

  std::vector<io::FringeRow> rows;
  for (std::size_t i = 0; i < volts.size(); ++i) rows.push_back({volts[i], phases[i], values[i]});
  OutputSet out{{"fringe.csv", io::fringe_to_csv(rows)}};
  if (h.fit) {
    HomFitOptions options;
    options.initial_scale = kPi / mzi.shifter.v_pi_V;
    options.initial_offset = mzi.shifter.phase_offset_rad;
    const HomFit fit = fit_hom_visibility(volts, values, options);
    out["fit.json"] = dump(io::hom_fit_to_json(fit));
    log << "visibility " << io::format_double(fit.visibility) << " +/- " << io::format_double(fit.visibility_stderr)
        << " (pair overlap " << io::format_double(x) << ")\n";
  }
  return out;
}

OutputSet demux(const ExperimentConfig& cfg, std::vector<InputFile>& inputs, std::ostream& log) {
  const DemuxSettings& d = cfg.demux;
  const MZIParams mzi = effective_mzi(cfg);
  DemuxTree tree{{mzi, mzi, mzi}};
  if (d.target_switching_probability)
    tree = calibrate_to_switching_probability(tree, *d.target_switching_probability);

  PulseProgram program;
  if (d.pulse_program_path) {
    inputs.push_back(input_from(*d.pulse_program_path));
    program = io::pulse_program_from_json(json::parse(inputs.back().contents));
  } else {
    program = default_pulse_program(cfg.source.repetition_period_ns, mzi.shifter.v_pi_V, d.n_frames,
                                    d.samples_per_slot);
  }
  DemuxOptions options;
  options.arrival_origin_ns = d.arrival_origin_ns;
  const TimeTrace trace = simulate_demux(tree, program, cfg.source, d.n_frames, options);
  const SwitchMetrics metrics = switch_metrics(trace, default_slot_assignment());
  log << "switching probability " << io::format_double(metrics.switching_probability) << ", suppression "
      << io::format_double(metrics.suppression_db) << " dB\n";
  return {{"metrics.json", dump(io::switch_metrics_to_json(metrics))},
          {"pulse_program.json", dump(io::pulse_program_to_json(program))},
          {"trace.csv", io::time_trace_to_csv(trace)}};
}

MeshConfig with_phase_noise(MeshConfig config, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  for (MeshCell& c : config.cells) {
    c.theta += noise(rng);
    c.phi += noise(rng);
  }
  return config;
}

OutputSet distribution(const ExperimentConfig& cfg, std::vector<InputFile>& inputs, std::ostream& log) {
  const DistributionSettings& d = cfg.distribution;
  const MZIParams mzi = effective_mzi(cfg);
  MeshConfig programmed;
  ComplexMatrix ideal;
  switch (d.source) {
    case UnitarySource::no_drive:
      programmed = rectangular_layout(d.n_modes);
      ideal = compose(programmed);
      break;
    case UnitarySource::haar:
      ideal = haar_random_unitary(d.n_modes, *cfg.seed);
      programmed = decompose(ideal);
      break;
    case UnitarySource::mesh_file:
      inputs.push_back(input_from(*d.path));
      programmed = io::mesh_from_json(json::parse(inputs.back().contents));
      ideal = compose(programmed);
      break;
    case UnitarySource::matrix_file:
      inputs.push_back(input_from(*d.path));
      ideal = io::matrix_from_json(json::parse(inputs.back().contents));
      programmed = decompose(ideal);
      break;
  }
  const MeshConfig driven =
      d.phase_noise_rad > 0.0 ? with_phase_noise(programmed, d.phase_noise_rad, *cfg.seed + 1) : programmed;
  const ComplexMatrix implemented = compose(driven, std::span<const MZIParams>(&mzi, 1));
  const double x = d.pair_overlap ? *d.pair_overlap : cfg.source.indistinguishability;

  json list = json::array();
  json fidelities = json::array();
  double sum = 0.0;
  const auto pairs = collision_free_pairs(static_cast<int>(implemented.rows()));
  for (const auto& [k, l] : pairs) {
    const TwoPhotonDistribution measured = two_photon_distribution(implemented, k, l, x);
    const TwoPhotonDistribution reference = two_photon_distribution(ideal, k, l, x);
    list.push_back(io::distribution_to_json(measured));
    const double f = statistical_fidelity(measured.collision_free(), reference.collision_free());
    fidelities.push_back({{"input", {k, l}}, {"fidelity", f}});
    sum += f;
  }
  const double mean = sum / static_cast<double>(pairs.size());
  log << "mean collision-free fidelity " << io::format_double(mean) << " over " << pairs.size() << " input pairs\n";
  json summary = {{"pair_overlap", x}, {"mean_fidelity", mean}, {"pair_fidelity", fidelities}};
  return {{"distributions.json", dump(list)},
          {"mesh.json", dump(io::mesh_to_json(driven))},
          {"summary.json", dump(summary)},
          {"unitary.json", dump(io::matrix_to_json(implemented))}};
}

OutputSet reconstruct(const ExperimentConfig& cfg, std::vector<InputFile>& inputs, std::ostream& log) {
  const ReconstructSettings& r = cfg.reconstruct;
  ComplexMatrix target;
  if (r.target == UnitarySource::matrix_file) {
    inputs.push_back(input_from(*r.path));
    target = io::matrix_from_json(json::parse(inputs.back().contents));
  } else {
    target = haar_random_unitary(r.n_modes, *cfg.seed);
  }
  ReconstructionOptions options;
  options.restarts = r.restarts;
  options.max_iterations = r.max_iterations;
  const MeasuredStatistics stats = synthesize_statistics(target, r.pair_overlap);
  const ReconstructionResult result = reconstruct_unitary(stats, *cfg.seed, options);
  const double distance = gauge_invariant_distance(result.unitary, target);
  const double fidelity = mean_statistical_fidelity(predicted_collision_free(result.unitary, r.pair_overlap),
                                                    predicted_collision_free(target, r.pair_overlap));
  log << "reconstruction distance " << io::format_double(distance) << ", cost " << io::format_double(result.cost)
      << (result.converged ? "" : " (not converged)") << "\n";
  json report = {{"cost", result.cost},
                 {"converged", result.converged},
                 {"best_restart", result.best_restart},
                 {"restart_costs", result.restart_costs},
                 {"gauge_invariant_distance", distance},
                 {"mean_fidelity", fidelity}};
  return {{"reconstructed_mesh.json", dump(io::mesh_to_json(result.config))},
          {"reconstructed_unitary.json", dump(io::matrix_to_json(result.unitary))},
          {"report.json", dump(report)},
          {"target_unitary.json", dump(io::matrix_to_json(target))}};
}

OutputSet loss_budget(const ExperimentConfig& cfg, std::vector<InputFile>& inputs, std::ostream& log) {
  const LossBudgetSettings& l = cfg.loss_budget;
  if (l.budget_path) inputs.push_back(input_from(*l.budget_path));
  OutputSet out{{"budget.json", dump(io::budget_to_json(l.budget))}};
  const double total = l.budget.total_db();
  out["summary.json"] = dump(json{{"total_db", total}, {"transmission", end_to_end_transmission(l.budget)}});
  log << "total loss " << io::format_double(total) << " dB\n";
  if (!l.wavelengths_nm.empty()) {
    const GratingSettings& g = l.grating;
    GratingSpectrum spectrum;
    if (g.csv_path) {
      inputs.push_back(input_from(*g.csv_path));
      spectrum = GratingSpectrum::from_csv(*g.csv_path);
    } else {
      spectrum = GratingSpectrum(g.center_nm, g.peak_db, g.bandwidth_1db_nm, g.band_min_nm, g.band_max_nm);
    }
    std::vector<io::SweepRow> rows;
    for (double w : l.wavelengths_nm) {
      const LossBudget at = budget_at_wavelength(l.budget, spectrum, w);
      rows.push_back({w, at.total_db(), end_to_end_transmission(at)});
    }
    out["sweep.csv"] = io::sweep_to_csv(rows);
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> write_outputs(const std::filesystem::path& dir, const std::string& experiment,
                                                 std::optional<std::uint64_t> seed,
                                                 const std::vector<InputFile>& inputs, const OutputSet& outputs) {
  json manifest = {{"tool", kToolName}, {"version", kToolVersion}, {"experiment", experiment}};
  manifest["seed"] = seed ? json(*seed) : json(nullptr);
  std::string all_inputs;
  json input_list = json::array();
  for (const InputFile& f : inputs) {
    input_list.push_back({{"file", f.name}, {"sha256", io::sha256_hex(f.contents)}});
    all_inputs += f.contents;
  }
  manifest["inputs"] = input_list;
  manifest["inputs_sha256"] = io::sha256_hex(all_inputs);
  json output_list = json::array();
  std::vector<std::filesystem::path> written;
  for (const auto& [name, contents] : outputs) {
    io::write_atomic(dir / name, contents);
    written.push_back(dir / name);
    output_list.push_back({{"file", name}, {"sha256", io::sha256_hex(contents)}});
  }
  manifest["outputs"] = output_list;
  io::write_atomic(dir / "manifest.json", dump(manifest));
  written.push_back(dir / "manifest.json");
  return written;
}

OutputSet compute_outputs(const ExperimentConfig& config, std::vector<InputFile>& inputs, std::ostream& log) {
  if (is_stochastic(config) && !config.seed) throw ArgumentError("seed is required for this run");
  switch (config.kind) {
    case ExperimentKind::hom_fringe:
      return hom_fringe(config, log);
    case ExperimentKind::demux:
      return demux(config, inputs, log);
    case ExperimentKind::distribution:
      return distribution(config, inputs, log);
    case ExperimentKind::reconstruct:
      return reconstruct(config, inputs, log);
    case ExperimentKind::loss_budget:
      return loss_budget(config, inputs, log);
  }
  throw ArgumentError("unknown experiment");
}

std::vector<std::filesystem::path> run(const ExperimentConfig& config, std::ostream& log) {
  std::vector<InputFile> inputs{{config.source_name, config.source_text}};
  const OutputSet outputs = compute_outputs(config, inputs, log);
  return write_outputs(config.output_dir, experiment_name(config.kind), config.seed, inputs, outputs);
}

std::vector<std::filesystem::path> run_mesh_decompose(const std::filesystem::path& matrix_path,
                                                      const std::filesystem::path& output_dir, std::ostream& log) {
  const InputFile input = input_from(matrix_path);
  const MeshConfig config = decompose(io::matrix_from_json(json::parse(input.contents))).canonical();
  log << "decomposed into " << config.cells.size() << " cells\n";
  return write_outputs(output_dir, "mesh-decompose", std::nullopt, {input},
                       {{"mesh.json", dump(io::mesh_to_json(config))}});
}

std::vector<std::filesystem::path> run_mesh_compose(const std::filesystem::path& mesh_path,
                                                    const std::filesystem::path& output_dir, std::ostream& log) {
  const InputFile input = input_from(mesh_path);
  const ComplexMatrix u = compose(io::mesh_from_json(json::parse(input.contents)));
  log << "composed " << u.rows() << "x" << u.cols() << " transfer matrix\n";
  return write_outputs(output_dir, "mesh-compose", std::nullopt, {input}, {{"matrix.json", dump(io::matrix_to_json(u))}});
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const AliasingError*>(&e)) return "aliasing_error";
  if (dynamic_cast<const RangeError*>(&e)) return "range_error";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension_error";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument_error";
  if (dynamic_cast<const LabelError*>(&e)) return "label_error";
  if (dynamic_cast<const NormalizationError*>(&e)) return "normalization_error";
  if (dynamic_cast<const TopologyError*>(&e)) return "topology_error";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
  if (dynamic_cast<const CoverageError*>(&e)) return "coverage_error";
  if (dynamic_cast<const TimingError*>(&e)) return "timing_error";
  if (dynamic_cast<const FitError*>(&e)) return "fit_error";
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return "parse_error";
  if (dynamic_cast<const std::filesystem::filesystem_error*>(&e)) return "io_error";
  return "error";
}

}  // namespace qpsim::cli
