#include "qpsim/io.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <openssl/evp.h>

#include "qpsim/errors.hpp"

namespace qpsim::io {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

namespace {

void require_schema(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("schema_version"))
    throw ParseError(std::string(what) + ": missing schema_version");
  if (j.at("schema_version").get<int>() != kSchemaVersion)
    throw ParseError(std::string(what) + ": unsupported schema_version");
}

template <typename F>
auto parse_guard(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

double parse_number(const std::string& text, int line) {
  std::string trimmed = text;
  while (!trimmed.empty() && (trimmed.back() == '\r' || trimmed.back() == ' ')) trimmed.pop_back();
  double v = 0.0;
  const auto r = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
  if (r.ec != std::errc() || r.ptr != trimmed.data() + trimmed.size())
    throw ParseError("line " + std::to_string(line) + ": '" + text + "' is not a number");
  return v;
}

// Rows after the header, each parsed into `columns` numbers.
std::vector<std::vector<double>> numeric_rows(const std::string& text, const std::string& header, std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != header) throw ParseError("expected CSV header '" + header + "'");
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != columns)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) + " columns");
    std::vector<double> row;
    for (const auto& f : fields) row.push_back(parse_number(f, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json matrix_to_json(const ComplexMatrix& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    json c = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return {{"schema_version", kSchemaVersion}, {"rows", m.rows()}, {"cols", m.cols()}, {"real", re}, {"imag", im}};
}

ComplexMatrix matrix_from_json(const json& j) {
  require_schema(j, "matrix");
  return parse_guard("matrix", [&] {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const json& re = j.at("real");
    const json& im = j.at("imag");
    if (rows < 0 || cols < 0 || re.size() != static_cast<std::size_t>(rows) || im.size() != static_cast<std::size_t>(rows))
      throw ParseError("matrix: row count does not match 'rows'");
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (re[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(cols) ||
          im[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(cols))
        throw ParseError("matrix: row " + std::to_string(i) + " does not match 'cols'");
      for (Eigen::Index k = 0; k < cols; ++k)
        m(i, k) = Complex(re[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>(),
                          im[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>());
    }
    if (!all_finite(m)) throw ParseError("matrix: entries must be finite");
    return m;
  });
}

json mesh_to_json(const MeshConfig& config) {
  json cells = json::array();
  for (const MeshCell& c : config.cells)
    cells.push_back({{"modes", {c.upper_mode, c.upper_mode + 1}}, {"theta", c.theta}, {"phi", c.phi}});
  return {{"schema_version", kSchemaVersion},
          {"n_modes", config.n_modes},
          {"cells", cells},
          {"output_phases", config.output_phases}};
}

MeshConfig mesh_from_json(const json& j) {
  require_schema(j, "mesh");
  MeshConfig config = parse_guard("mesh", [&] {
    MeshConfig c;
    c.n_modes = j.at("n_modes").get<int>();
    for (const json& cell : j.at("cells")) {
      const auto modes = cell.at("modes").get<std::vector<int>>();
      if (modes.size() != 2) throw ParseError("mesh: cell modes must list two indices");
      if (modes[1] != modes[0] + 1) throw TopologyError("mesh: cell acts on non-adjacent modes");
      c.cells.push_back(MeshCell{modes[0], cell.at("theta").get<double>(), cell.at("phi").get<double>()});
    }
    c.output_phases = j.at("output_phases").get<std::vector<double>>();
    return c;
  });
  config.validate();
  return config;
}

json distribution_to_json(const TwoPhotonDistribution& d) {
  json outputs = json::array();
  for (const auto& [pattern, p] : d.entries) outputs.push_back({{"pattern", {pattern.first, pattern.second}}, {"p", p}});
  return {{"input", {d.input_first, d.input_second}}, {"outputs", outputs}};
}

TwoPhotonDistribution distribution_from_json(const json& j) {
  return parse_guard("distribution", [&] {
    TwoPhotonDistribution d;
    const auto input = j.at("input").get<std::vector<int>>();
    if (input.size() != 2) throw ParseError("distribution: input must list two modes");
    d.input_first = input[0];
    d.input_second = input[1];
    d.collision_free_only = true;
    for (const json& o : j.at("outputs")) {
      const auto pattern = o.at("pattern").get<std::vector<int>>();
      if (pattern.size() != 2) throw ParseError("distribution: pattern must list two modes");
      if (pattern[0] == pattern[1]) d.collision_free_only = false;
      d.entries.push_back({OutputPattern{pattern[0], pattern[1]}, o.at("p").get<double>()});
    }
    return d;
  });
}

json pulse_program_to_json(const PulseProgram& p) {
  json channels = json::object();
  for (const auto& [name, w] : p.channels) channels[name] = {{"t_ns", w.t_ns}, {"v", w.volts}};
  json routing = json::object();
  for (const auto& [name, targets] : p.routing) routing[name] = targets;
  return {{"channels", channels}, {"routing", routing}};
}

PulseProgram pulse_program_from_json(const json& j) {
  PulseProgram p = parse_guard("pulse program", [&] {
    PulseProgram out;
    for (const auto& [name, w] : j.at("channels").items())
      out.channels[name] = Waveform{w.at("t_ns").get<std::vector<double>>(), w.at("v").get<std::vector<double>>()};
    for (const auto& [name, targets] : j.at("routing").items()) out.routing[name] = targets.get<std::vector<int>>();
    return out;
  });
  p.validate();
  return p;
}

json budget_to_json(const LossBudget& b) {
  json entries = json::array();
  for (const LossEntry& e : b.entries()) {
    json item = {{"label", e.label}, {"loss_db", e.loss_db}};
    if (e.grating_coupler) item["grating_coupler"] = true;
    entries.push_back(std::move(item));
  }
  return entries;
}

LossBudget budget_from_json(const json& j) {
  return parse_guard("loss budget", [&] {
    if (!j.is_array()) throw ParseError("loss budget: expected a JSON list");
    LossBudget b;
    for (const json& e : j) {
      const auto label = e.at("label").get<std::string>();
      const bool grating = e.value("grating_coupler", false);
      if (e.contains("loss_db")) {
        b.add(label, e.at("loss_db").get<double>(), grating);
      } else if (e.contains("db_per_cm") && e.contains("length_cm")) {
        b.add_waveguide(label, WaveguideLossParams{e.at("db_per_cm").get<double>(), e.at("length_cm").get<double>()});
      } else {
        throw ParseError("loss budget: entry '" + label + "' needs loss_db or db_per_cm with length_cm");
      }
    }
    return b;
  });
}

json switch_metrics_to_json(const SwitchMetrics& m) {
  json suppression = std::isinf(m.suppression_db) ? json(nullptr) : json(m.suppression_db);
  return {{"switching_probability", m.switching_probability},
          {"suppression_db", suppression},
          {"slot_probability", std::vector<double>(m.slot_probability.begin(), m.slot_probability.end())}};
}

SwitchMetrics switch_metrics_from_json(const json& j) {
  return parse_guard("switch metrics", [&] {
    SwitchMetrics m;
    m.switching_probability = j.at("switching_probability").get<double>();
    const json& s = j.at("suppression_db");
    m.suppression_db = s.is_null() ? -std::numeric_limits<double>::infinity() : s.get<double>();
    const auto slots = j.at("slot_probability").get<std::vector<double>>();
    if (slots.size() != m.slot_probability.size()) throw ParseError("switch metrics: need four slot probabilities");
    std::copy(slots.begin(), slots.end(), m.slot_probability.begin());
    return m;
  });
}

std::string time_trace_to_csv(const TimeTrace& t) {
  std::string out = "time_ns,out0,out1,out2,out3\n";
  for (std::size_t k = 0; k < t.time_ns.size(); ++k) {
    out += format_double(t.time_ns[k]);
    for (double p : t.probability[k]) out += "," + format_double(p);
    out += "\n";
  }
  return out;
}

TimeTrace time_trace_from_csv(const std::string& text, double frame_period_ns) {
  TimeTrace t;
  t.frame_period_ns = frame_period_ns;
  for (const auto& row : numeric_rows(text, "time_ns,out0,out1,out2,out3", 5)) {
    t.time_ns.push_back(row[0]);
    t.probability.push_back({row[1], row[2], row[3], row[4]});
  }
  return t;
}

std::string fringe_to_csv(const std::vector<FringeRow>& rows) {
  std::string out = "voltage_V,phase_rad,coincidence\n";
  for (const FringeRow& r : rows)
    out += format_double(r.voltage_V) + "," + format_double(r.phase_rad) + "," + format_double(r.coincidence) + "\n";
  return out;
}

std::vector<FringeRow> fringe_from_csv(const std::string& text) {
  std::vector<FringeRow> rows;
  for (const auto& r : numeric_rows(text, "voltage_V,phase_rad,coincidence", 3)) rows.push_back({r[0], r[1], r[2]});
  return rows;
}

json hom_fit_to_json(const HomFit& fit) {
  return {{"visibility", fit.visibility},
          {"visibility_stderr", fit.visibility_stderr},
          {"amplitude", fit.amplitude},
          {"phase_scale_rad_per_V", fit.scale},
          {"phase_offset_rad", fit.offset},
          {"residual_sum_squares", fit.residual_sum_squares},
          {"converged", fit.converged}};
}

HomFit hom_fit_from_json(const json& j) {
  return parse_guard("hom fit", [&] {
    HomFit fit;
    fit.visibility = j.at("visibility").get<double>();
    fit.visibility_stderr = j.at("visibility_stderr").get<double>();
    fit.amplitude = j.at("amplitude").get<double>();
    fit.scale = j.at("phase_scale_rad_per_V").get<double>();
    fit.offset = j.at("phase_offset_rad").get<double>();
    fit.residual_sum_squares = j.at("residual_sum_squares").get<double>();
    fit.converged = j.at("converged").get<bool>();
    return fit;
  });
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "wavelength_nm,total_db,transmission\n";
  for (const SweepRow& r : rows)
    out += format_double(r.wavelength_nm) + "," + format_double(r.total_db) + "," + format_double(r.transmission) + "\n";
  return out;
}

std::vector<SweepRow> sweep_from_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  for (const auto& r : numeric_rows(text, "wavelength_nm,total_db,transmission", 3)) rows.push_back({r[0], r[1], r[2]});
  return rows;
}

}  // namespace qpsim::io
