#include "spinring/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spinring::io {

using json = nlohmann::ordered_json;

namespace {

template <typename T>
T required(const json& j, const char* key, std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing field '") + key + "'", line);
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad field '") + key + "': " + e.what(), line);
  }
}

void put_controller(json& j, const Controller& c) {
  j["schema_version"] = kSchemaVersion;
  j["n_spins"] = c.problem.spec.n_spins;
  j["coupling"] = c.problem.spec.coupling;
  j["topology"] = to_string(c.problem.spec.topology);
  j["in_spin"] = c.problem.in_spin;
  j["out_spin"] = c.problem.out_spin;
  j["readout_mode"] = c.readout.instant() ? "instant" : "windowed";
  j["delta"] = c.readout.width;
  j["time_T"] = c.readout.center;
  j["biases"] = std::vector<double>(c.bias.data(), c.bias.data() + c.bias.size());
  j["fidelity"] = c.fidelity;
  j["error"] = c.error;
  j["seed"] = c.seed;
  j["restart_index"] = c.restart_index;
  j["converged"] = c.converged;
  j["iterations"] = c.iterations;
  j["time_clamped"] = c.time_clamped;
}

Controller get_controller(const json& j, std::size_t line) {
  const int version = required<int>(j, "schema_version", line);
  if (version != kSchemaVersion)
    throw IncompatibleVersion("schema_version " + std::to_string(version) + " is not supported (expected " +
                                  std::to_string(kSchemaVersion) + ")",
                              line);
  Controller c;
  c.problem.spec.n_spins = required<int>(j, "n_spins", line);
  c.problem.spec.coupling = j.value("coupling", 1.0);
  const std::string topology = j.value("topology", std::string("ring"));
  if (topology != "ring" && topology != "chain") throw FormatError("bad topology '" + topology + "'", line);
  c.problem.spec.topology = topology == "ring" ? Topology::ring : Topology::chain;
  c.problem.in_spin = required<int>(j, "in_spin", line);
  c.problem.out_spin = required<int>(j, "out_spin", line);
  const auto mode = required<std::string>(j, "readout_mode", line);
  c.readout.width = required<double>(j, "delta", line);
  c.readout.center = required<double>(j, "time_T", line);
  if (mode == "instant") {
    if (c.readout.width != 0.0) throw FormatError("instant readout with nonzero delta", line);
  } else if (mode == "windowed") {
    if (!(c.readout.width > 0.0)) throw FormatError("windowed readout needs delta > 0", line);
  } else {
    throw FormatError("bad readout_mode '" + mode + "'", line);
  }
  const auto biases = required<std::vector<double>>(j, "biases", line);
  if (static_cast<int>(biases.size()) != c.problem.spec.n_spins)
    throw FormatError("biases length does not match n_spins", line);
  c.bias = Eigen::Map<const Eigen::VectorXd>(biases.data(), static_cast<Eigen::Index>(biases.size()));
  c.fidelity = required<double>(j, "fidelity", line);
  c.error = required<double>(j, "error", line);
  c.seed = required<std::uint64_t>(j, "seed", line);
  c.restart_index = required<int>(j, "restart_index", line);
  c.converged = required<bool>(j, "converged", line);
  c.iterations = j.value("iterations", 0);
  c.time_clamped = j.value("time_clamped", false);
  try {
    c.problem.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what(), line);
  }
  return c;
}

json parse_line(const std::string& line, std::size_t line_number) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw FormatError("record is not an object", line_number);
    return j;
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed record: ") + e.what(), line_number);
  }
}

template <typename Parse>
auto read_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<decltype(parse(std::string(), std::size_t()))> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse(line, number));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

template <typename T, typename Serialize>
std::size_t write_lines(const std::filesystem::path& path, const std::vector<T>& records, Serialize serialize) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& r : records) out << serialize(r) << '\n';
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
  return records.size();
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string serialize_controller(const Controller& c) {
  json j;
  j["record"] = "controller";
  put_controller(j, c);
  return j.dump();
}

Controller parse_controller(const std::string& line, std::size_t line_number) {
  return get_controller(parse_line(line, line_number), line_number);
}

std::string serialize_report(const SensitivityReport& r) {
  json j;
  j["record"] = "sensitivity";
  put_controller(j, r.controller);
  j["diff_sens"] = r.diff_sens;
  j["log_sens"] = r.log_sens;
  j["zero_nominal_flags"] = r.zero_nominal_flags;
  j["norm_c"] = r.norm_c;
  j["norm_h"] = r.norm_h;
  j["norm_all"] = r.norm_all;
  return j.dump();
}

SensitivityReport parse_report(const std::string& line, std::size_t line_number) {
  const json j = parse_line(line, line_number);
  SensitivityReport r;
  r.controller = get_controller(j, line_number);
  const auto expected = static_cast<std::size_t>(2 * r.controller.problem.spec.n_spins);
  r.log_sens = required<std::vector<double>>(j, "log_sens", line_number);
  r.zero_nominal_flags = required<std::vector<bool>>(j, "zero_nominal_flags", line_number);
  r.diff_sens = j.value("diff_sens", std::vector<double>(expected, std::nan("")));
  if (r.log_sens.size() != expected || r.zero_nominal_flags.size() != expected || r.diff_sens.size() != expected)
    throw FormatError("sensitivity arrays must have length 2N", line_number);
  r.norm_c = required<double>(j, "norm_c", line_number);
  r.norm_h = required<double>(j, "norm_h", line_number);
  r.norm_all = required<double>(j, "norm_all", line_number);
  const SensitivityNorms check = sensitivity_norms(r.log_sens);
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); };
  if (!close(r.norm_c, check.controller) || !close(r.norm_h, check.hamiltonian) || !close(r.norm_all, check.all))
    throw FormatError("stored norms do not match log_sens", line_number);
  return r;
}

std::size_t write_controllers(const std::filesystem::path& path, const std::vector<Controller>& records) {
  return write_lines(path, records, serialize_controller);
}

std::vector<Controller> read_controllers(const std::filesystem::path& path) {
  return read_lines(path, [](const std::string& l, std::size_t n) { return parse_controller(l, n); });
}

std::size_t write_reports(const std::filesystem::path& path, const std::vector<SensitivityReport>& records) {
  return write_lines(path, records, serialize_report);
}

std::vector<SensitivityReport> read_reports(const std::filesystem::path& path) {
  return read_lines(path, [](const std::string& l, std::size_t n) { return parse_report(l, n); });
}

// --- results CSV -------------------------------------------------------------

std::string results_csv_header() {
  return "transfer,statistic,score,p,n_spins,out_spin,readout,norm,measure,n_samples,verdict,"
         "statistic_full,score_full,p_full";
}

std::string format_results_row(const ResultsRow& row) {
  std::ostringstream s;
  s << "N=" << row.n_spins << " out=" << row.out_spin << ',' << fixed4(row.statistic) << ','
    << fixed4(row.score) << ',' << fixed4(row.p_value) << ',' << row.n_spins << ',' << row.out_spin << ','
    << row.readout << ',' << to_string(row.norm_kind) << ',' << stats::to_string(row.measure) << ','
    << row.n_samples << ',' << stats::to_string(row.verdict) << ',' << full(row.statistic) << ','
    << full(row.score) << ',' << full(row.p_value);
  return s.str();
}

std::string results_csv(const std::vector<ResultsRow>& rows) {
  std::string out = results_csv_header() + "\r\n";
  for (const auto& r : rows) out += format_results_row(r) + "\r\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

void write_results_csv(const std::vector<ResultsRow>& rows, const std::filesystem::path& path) {
  write_text(path, results_csv(rows));
}

std::vector<ResultsRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  std::size_t number = 0;
  std::vector<ResultsRow> rows;
  auto parse_double = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw FormatError("bad number '" + s + "'", number);
    return v;
  };
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1) {
      if (line != results_csv_header()) throw FormatError("unexpected CSV header", number);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 14) throw FormatError("expected 14 columns", number);
    ResultsRow r;
    try {
      r.n_spins = std::stoi(cells[4]);
      r.out_spin = std::stoi(cells[5]);
      r.readout = cells[6];
      r.norm_kind = parse_norm_kind(cells[7]);
      r.measure = stats::parse_measure(cells[8]);
      r.n_samples = static_cast<std::size_t>(std::stoull(cells[9]));
      r.verdict = stats::parse_verdict(cells[10]);
    } catch (const std::exception& e) {
      throw FormatError(std::string("bad cell: ") + e.what(), number);
    }
    r.statistic = parse_double(cells[11]);
    r.score = parse_double(cells[12]);
    r.p_value = parse_double(cells[13]);
    rows.push_back(r);
  }
  if (number == 0) throw FormatError("missing CSV header", 0);
  return rows;
}

}  // namespace spinring::io
