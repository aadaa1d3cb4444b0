#include "qpsim/config.hpp"

#include <cmath>
#include <functional>
#include <set>

#include <json.hpp>

#include "qpsim/errors.hpp"
#include "qpsim/io.hpp"

namespace qpsim::cli {

using nlohmann::json;

std::string to_string(const Diagnostic& d) {
  std::string out;
  if (d.line > 0) out += "line " + std::to_string(d.line) + ": ";
  out += d.field.empty() ? d.message : d.field + ": " + d.message;
  return out;
}

namespace {

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {{ExperimentKind::hom_fringe, "hom-fringe"},
                               {ExperimentKind::demux, "demux"},
                               {ExperimentKind::distribution, "distribution"},
                               {ExperimentKind::reconstruct, "reconstruct"},
                               {ExperimentKind::loss_budget, "loss-budget"}};

struct Constraint {
  std::function<bool(double)> holds;
  std::string text;
};

Constraint positive() { return {[](double v) { return v > 0.0; }, "must be > 0"}; }
Constraint non_negative() { return {[](double v) { return v >= 0.0; }, "must be >= 0"}; }
Constraint unit_interval() { return {[](double v) { return v >= 0.0 && v <= 1.0; }, "must be in [0, 1]"}; }
Constraint open_unit_interval() { return {[](double v) { return v > 0.0 && v < 1.0; }, "must be in (0, 1)"}; }
Constraint any() { return {[](double) { return true; }, ""}; }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Collects diagnostics while reading values with defaults.
class Checker {
 public:
  Checker(const std::string& text, std::vector<Diagnostic>& out) : text_(text), out_(out) {}

  void report(const std::string& field, const std::string& message) {
    out_.push_back({field, message, line_of(field)});
  }

  // Reports keys of `obj` outside `allowed`.
  void known_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
      if (!names.count(key)) report(join(path, key), "unknown field");
  }

  const json* object(const json& parent, const std::string& path, const char* key, bool required) {
    const std::string field = join(path, key);
    if (!parent.contains(key)) {
      if (required) report(field, "required block is missing");
      return nullptr;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) {
      report(field, "must be an object");
      return nullptr;
    }
    return &v;
  }

  std::optional<double> number(const json& obj, const std::string& path, const char* key, const Constraint& c,
                               bool required = false) {
    const std::string field = join(path, key);
    if (!obj.contains(key)) {
      if (required) report(field, "required field is missing");
      return std::nullopt;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      report(field, "must be a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
      report(field, "must be finite");
      return std::nullopt;
    }
    if (!c.holds(x)) {
      report(field, c.text + " (got " + io::format_double(x) + ")");
      return std::nullopt;
    }
    return x;
  }

  void number_into(const json& obj, const std::string& path, const char* key, const Constraint& c, double& target) {
    if (auto v = number(obj, path, key, c)) target = *v;
  }

  std::optional<long long> integer(const json& obj, const std::string& path, const char* key, long long min,
                                   long long max) {
    const std::string field = join(path, key);
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      report(field, "must be an integer");
      return std::nullopt;
    }
    const long long x = v.get<long long>();
    if (x < min || x > max) {
      report(field, "must be in [" + std::to_string(min) + ", " + std::to_string(max) + "] (got " +
                        std::to_string(x) + ")");
      return std::nullopt;
    }
    return x;
  }

  void int_into(const json& obj, const std::string& path, const char* key, long long min, long long max,
                int& target) {
    if (auto v = integer(obj, path, key, min, max)) target = static_cast<int>(*v);
  }

  std::optional<std::string> string(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      report(join(path, key), "must be a string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  void boolean_into(const json& obj, const std::string& path, const char* key, bool& target) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      report(join(path, key), "must be true or false");
      return;
    }
    target = v.get<bool>();
  }

  // Existing file resolved against base_dir.
  std::optional<std::filesystem::path> file(const json& obj, const std::string& path, const char* key,
                                            const std::filesystem::path& base_dir) {
    auto s = string(obj, path, key);
    if (!s) return std::nullopt;
    std::filesystem::path p(*s);
    if (p.is_relative()) p = base_dir / p;
    if (!std::filesystem::is_regular_file(p)) {
      report(join(path, key), "file not found: " + *s);
      return std::nullopt;
    }
    return p;
  }

 private:
  // Line of the first occurrence of the field's last key in the source text.
  int line_of(const std::string& field) const {
    const auto dot = field.rfind('.');
    std::string key = dot == std::string::npos ? field : field.substr(dot + 1);
    const auto bracket = key.find('[');
    if (bracket != std::string::npos) key = key.substr(0, bracket);
    const auto pos = text_.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
  }

  const std::string& text_;
  std::vector<Diagnostic>& out_;
};

void read_coupler(Checker& c, const json& root, const std::string& path, const char* key, CouplerParams& out) {
  const json* obj = c.object(root, path, key, false);
  if (!obj) return;
  const std::string p = join(path, key);
  c.known_keys(*obj, p, {"splitting_ratio", "imbalance"});
  c.number_into(*obj, p, "splitting_ratio", unit_interval(), out.splitting_ratio);
  c.number_into(*obj, p, "imbalance", any(), out.imbalance);
  const double r = out.effective_ratio();
  if (r < 0.0 || r > 1.0) c.report(p, "splitting_ratio + imbalance must be in [0, 1]");
}

void read_mzi(Checker& c, const json& root, ExperimentConfig& cfg) {
  const json* obj = c.object(root, "", "mzi", false);
  if (!obj) return;
  c.known_keys(*obj, "mzi",
               {"v_pi_V", "length_cm", "phase_offset_rad", "f3db_GHz", "insertion_loss_db", "extinction_ratio_db",
                "coupler_in", "coupler_out"});
  PhaseShifterParams& s = cfg.mzi.shifter;
  c.number_into(*obj, "mzi", "v_pi_V", positive(), s.v_pi_V);
  c.number_into(*obj, "mzi", "length_cm", positive(), s.length_cm);
  c.number_into(*obj, "mzi", "phase_offset_rad", any(), s.phase_offset_rad);
  c.number_into(*obj, "mzi", "f3db_GHz", positive(), s.f3db_GHz);
  c.number_into(*obj, "mzi", "insertion_loss_db", non_negative(), cfg.mzi.insertion_loss_db);
  cfg.extinction_ratio_db = c.number(*obj, "mzi", "extinction_ratio_db", positive());
  read_coupler(c, *obj, "mzi", "coupler_in", cfg.mzi.coupler_in);
  read_coupler(c, *obj, "mzi", "coupler_out", cfg.mzi.coupler_out);
}

void read_source(Checker& c, const json& root, ExperimentConfig& cfg) {
  const json* obj = c.object(root, "", "source", false);
  if (!obj) return;
  c.known_keys(*obj, "source", {"repetition_period_ns", "indistinguishability", "g2_zero", "end_to_end_efficiency"});
  SourceModel& s = cfg.source;
  c.number_into(*obj, "source", "repetition_period_ns", positive(), s.repetition_period_ns);
  c.number_into(*obj, "source", "indistinguishability", unit_interval(), s.indistinguishability);
  c.number_into(*obj, "source", "g2_zero", unit_interval(), s.g2_zero);
  c.number_into(*obj, "source", "end_to_end_efficiency", unit_interval(), s.end_to_end_efficiency);
}

void read_hom(Checker& c, const json& obj, HomSettings& h) {
  const std::string p = "hom";
  c.known_keys(obj, p,
               {"voltage_start_V", "voltage_stop_V", "points", "pair_overlap", "chip_penalty", "include_accidentals",
                "peak_counts", "fit"});
  c.number_into(obj, p, "voltage_start_V", any(), h.voltage_start_V);
  c.number_into(obj, p, "voltage_stop_V", any(), h.voltage_stop_V);
  c.int_into(obj, p, "points", 2, 1000000, h.points);
  h.pair_overlap = c.number(obj, p, "pair_overlap", unit_interval());
  c.number_into(obj, p, "chip_penalty", unit_interval(), h.chip_penalty);
  c.boolean_into(obj, p, "include_accidentals", h.include_accidentals);
  c.number_into(obj, p, "peak_counts", non_negative(), h.peak_counts);
  c.boolean_into(obj, p, "fit", h.fit);
  if (h.voltage_stop_V <= h.voltage_start_V) c.report("hom.voltage_stop_V", "must exceed voltage_start_V");
}

void read_demux(Checker& c, const json& obj, const std::filesystem::path& base, DemuxSettings& d) {
  const std::string p = "demux";
  c.known_keys(obj, p,
               {"n_frames", "samples_per_slot", "arrival_origin_ns", "target_switching_probability",
                "pulse_program_path"});
  c.int_into(obj, p, "n_frames", 1, 100000, d.n_frames);
  c.int_into(obj, p, "samples_per_slot", 1, 1000000, d.samples_per_slot);
  c.number_into(obj, p, "arrival_origin_ns", any(), d.arrival_origin_ns);
  d.target_switching_probability = c.number(obj, p, "target_switching_probability", open_unit_interval());
  d.pulse_program_path = c.file(obj, p, "pulse_program_path", base);
}

std::optional<UnitarySource> read_unitary_source(Checker& c, const json& obj, const std::string& path,
                                                 const char* key, bool allow_mesh) {
  auto s = c.string(obj, path, key);
  if (!s) return std::nullopt;
  if (*s == "no_drive" && allow_mesh) return UnitarySource::no_drive;
  if (*s == "haar") return UnitarySource::haar;
  if (*s == "mesh_file" && allow_mesh) return UnitarySource::mesh_file;
  if (*s == "matrix_file") return UnitarySource::matrix_file;
  c.report(join(path, key), allow_mesh ? "must be one of no_drive, haar, mesh_file, matrix_file"
                                       : "must be one of haar, matrix_file");
  return std::nullopt;
}

void read_distribution(Checker& c, const json& obj, const std::filesystem::path& base, DistributionSettings& d) {
  const std::string p = "distribution";
  c.known_keys(obj, p, {"unitary", "path", "n_modes", "pair_overlap", "phase_noise_rad"});
  if (auto s = read_unitary_source(c, obj, p, "unitary", true)) d.source = *s;
  d.path = c.file(obj, p, "path", base);
  c.int_into(obj, p, "n_modes", 2, 20, d.n_modes);
  d.pair_overlap = c.number(obj, p, "pair_overlap", unit_interval());
  c.number_into(obj, p, "phase_noise_rad", non_negative(), d.phase_noise_rad);
  const bool needs_file = d.source == UnitarySource::mesh_file || d.source == UnitarySource::matrix_file;
  if (needs_file && !obj.contains("path")) c.report("distribution.path", "required when unitary is a file");
}

void read_reconstruct(Checker& c, const json& obj, const std::filesystem::path& base, ReconstructSettings& r) {
  const std::string p = "reconstruct";
  c.known_keys(obj, p, {"target", "path", "n_modes", "pair_overlap", "restarts", "max_iterations"});
  if (auto s = read_unitary_source(c, obj, p, "target", false)) r.target = *s;
  r.path = c.file(obj, p, "path", base);
  c.int_into(obj, p, "n_modes", 2, 12, r.n_modes);
  if (auto x = c.number(obj, p, "pair_overlap", {[](double v) { return v > 0.0 && v <= 1.0; }, "must be in (0, 1]"}))
    r.pair_overlap = *x;
  c.int_into(obj, p, "restarts", 1, 10000, r.restarts);
  c.int_into(obj, p, "max_iterations", 1, 1000000, r.max_iterations);
  if (r.target == UnitarySource::matrix_file && !obj.contains("path"))
    c.report("reconstruct.path", "required when target is matrix_file");
}

void read_budget_entries(Checker& c, const json& list, const std::string& path, LossBudget& budget) {
  if (!list.is_array()) {
    c.report(path, "must be a list");
    return;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& e = list[i];
    if (!e.is_object()) {
      c.report(p, "must be an object");
      continue;
    }
    c.known_keys(e, p, {"label", "loss_db", "db_per_cm", "length_cm", "grating_coupler"});
    auto label = c.string(e, p, "label");
    if (!label) {
      if (!e.contains("label")) c.report(p + ".label", "required field is missing");
      continue;
    }
    bool grating = false;
    c.boolean_into(e, p, "grating_coupler", grating);
    if (e.contains("loss_db")) {
      if (auto loss = c.number(e, p, "loss_db", non_negative())) budget.add(*label, *loss, grating);
    } else if (e.contains("db_per_cm") || e.contains("length_cm")) {
      auto alpha = c.number(e, p, "db_per_cm", non_negative(), true);
      auto length = c.number(e, p, "length_cm", non_negative(), true);
      if (alpha && length) budget.add_waveguide(*label, WaveguideLossParams{*alpha, *length});
    } else if (grating) {
      budget.add(*label, 0.0, true);
    } else {
      c.report(p, "needs loss_db, or db_per_cm with length_cm");
    }
  }
}

void read_loss_budget(Checker& c, const json& obj, const std::filesystem::path& base, LossBudgetSettings& l) {
  const std::string p = "loss_budget";
  c.known_keys(obj, p, {"entries", "budget_path", "grating", "wavelengths_nm"});
  if (obj.contains("entries")) read_budget_entries(c, obj.at("entries"), p + ".entries", l.budget);
  l.budget_path = c.file(obj, p, "budget_path", base);
  if (obj.contains("entries") == obj.contains("budget_path"))
    c.report(p, "give exactly one of entries or budget_path");
  if (l.budget_path) {
    try {
      l.budget = io::budget_from_json(json::parse(io::read_text(*l.budget_path)));
    } catch (const std::exception& e) {
      c.report(p + ".budget_path", e.what());
    }
  }
  if (const json* g = c.object(obj, p, "grating", false)) {
    const std::string gp = p + ".grating";
    GratingSettings& s = l.grating;
    c.known_keys(*g, gp, {"center_nm", "peak_db", "bandwidth_1db_nm", "band_min_nm", "band_max_nm", "csv_path"});
    c.number_into(*g, gp, "center_nm", positive(), s.center_nm);
    c.number_into(*g, gp, "peak_db", {[](double v) { return v <= 0.0; }, "must be <= 0"}, s.peak_db);
    c.number_into(*g, gp, "bandwidth_1db_nm", positive(), s.bandwidth_1db_nm);
    c.number_into(*g, gp, "band_min_nm", positive(), s.band_min_nm);
    c.number_into(*g, gp, "band_max_nm", positive(), s.band_max_nm);
    s.csv_path = c.file(*g, gp, "csv_path", base);
    if (!s.csv_path && !(s.band_min_nm <= s.center_nm && s.center_nm <= s.band_max_nm))
      c.report(gp + ".center_nm", "must lie within [band_min_nm, band_max_nm]");
  }
  if (obj.contains("wavelengths_nm")) {
    const json& w = obj.at("wavelengths_nm");
    if (!w.is_array()) {
      c.report(p + ".wavelengths_nm", "must be a list");
    } else {
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (!w[i].is_number() || !(w[i].get<double>() > 0.0))
          c.report(p + ".wavelengths_nm[" + std::to_string(i) + "]", "must be a number > 0");
        else
          l.wavelengths_nm.push_back(w[i].get<double>());
      }
    }
  }
}

int line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

const char* experiment_name(ExperimentKind kind) {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_name(const std::string& name) {
  for (const auto& k : kKinds)
    if (name == k.name) return k.kind;
  return std::nullopt;
}

bool is_stochastic(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::hom_fringe:
      return config.hom.peak_counts > 0.0;
    case ExperimentKind::distribution:
      return config.distribution.source == UnitarySource::haar || config.distribution.phase_noise_rad > 0.0;
    case ExperimentKind::reconstruct:
      return true;
    case ExperimentKind::demux:
    case ExperimentKind::loss_budget:
      return false;
  }
  return false;
}

ParsedConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                          const Overrides& overrides) {
  ParsedConfig parsed;
  ExperimentConfig& cfg = parsed.config;
  cfg.source_text = text;
  cfg.base_dir = base_dir;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    parsed.diagnostics.push_back({"", "invalid JSON: " + std::string(e.what()), line_of_offset(text, e.byte)});
    return parsed;
  }
  Checker c(text, parsed.diagnostics);
  if (!root.is_object()) {
    c.report("", "config must be a JSON object");
    return parsed;
  }
  c.known_keys(root, "",
               {"schema_version", "experiment", "seed", "output_dir", "mzi", "source", "hom", "demux", "distribution",
                "reconstruct", "loss_budget"});

  if (!root.contains("schema_version")) {
    c.report("schema_version", "required field is missing");
  } else if (auto v = c.integer(root, "", "schema_version", io::kSchemaVersion, io::kSchemaVersion)) {
    cfg.schema_version = static_cast<int>(*v);
  }

  bool kind_known = false;
  if (auto name = c.string(root, "", "experiment")) {
    if (auto kind = parse_experiment_name(*name)) {
      cfg.kind = *kind;
      kind_known = true;
    } else {
      c.report("experiment", "must be one of hom-fringe, demux, distribution, reconstruct, loss-budget");
    }
  } else if (!root.contains("experiment")) {
    c.report("experiment", "required field is missing");
  }

  if (root.contains("seed")) {
    const json& s = root.at("seed");
    if (s.is_number_unsigned())
      cfg.seed = s.get<std::uint64_t>();
    else
      c.report("seed", "must be a non-negative integer");
  }
  if (auto dir = c.string(root, "", "output_dir")) cfg.output_dir = *dir;

  read_mzi(c, root, cfg);
  read_source(c, root, cfg);

  const bool hom = kind_known && cfg.kind == ExperimentKind::hom_fringe;
  const bool demux = kind_known && cfg.kind == ExperimentKind::demux;
  const bool dist = kind_known && cfg.kind == ExperimentKind::distribution;
  const bool recon = kind_known && cfg.kind == ExperimentKind::reconstruct;
  const bool budget = kind_known && cfg.kind == ExperimentKind::loss_budget;
  if (const json* b = c.object(root, "", "hom", hom)) read_hom(c, *b, cfg.hom);
  if (const json* b = c.object(root, "", "demux", demux)) read_demux(c, *b, base_dir, cfg.demux);
  if (const json* b = c.object(root, "", "distribution", dist)) read_distribution(c, *b, base_dir, cfg.distribution);
  if (const json* b = c.object(root, "", "reconstruct", recon)) read_reconstruct(c, *b, base_dir, cfg.reconstruct);
  if (const json* b = c.object(root, "", "loss_budget", budget)) read_loss_budget(c, *b, base_dir, cfg.loss_budget);

  if (overrides.seed) cfg.seed = overrides.seed;
  if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
  if (kind_known && is_stochastic(cfg) && !cfg.seed)
    c.report("seed", std::string("required for stochastic ") + experiment_name(cfg.kind) + " runs");
  if (cfg.output_dir.is_relative() && !overrides.output_dir) cfg.output_dir = base_dir / cfg.output_dir;
  return parsed;
}

ParsedConfig load_config(const std::filesystem::path& path, const Overrides& overrides) {
  const std::string text = io::read_text(path);
  ParsedConfig parsed =
      parse_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."), overrides);
  parsed.config.source_name = path.filename().string();
  return parsed;
}

std::vector<Diagnostic> validate(const std::filesystem::path& path, const Overrides& overrides) {
  return load_config(path, overrides).diagnostics;
}

MZIParams effective_mzi(const ExperimentConfig& config) {
  if (!config.extinction_ratio_db) return config.mzi;
  return mzi_with_extinction(*config.extinction_ratio_db, config.mzi);
}

}  // namespace qpsim::cli
