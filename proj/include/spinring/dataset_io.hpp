#pragma once

// Line-delimited JSON persistence for controller ensembles and sensitivity
// reports, and CSV output for hypothesis-test tables.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spinring/report.hpp"
#include "spinring/stats.hpp"

namespace spinring::io {

inline constexpr int kSchemaVersion = 1;

struct FormatError : std::runtime_error {
  FormatError(const std::string& what, std::size_t line)
      : std::runtime_error(what + (line ? " (line " + std::to_string(line) + ")" : std::string())),
        line_number(line) {}
  std::size_t line_number;
};

struct IncompatibleVersion : FormatError {
  using FormatError::FormatError;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string serialize_controller(const Controller& c);
Controller parse_controller(const std::string& line, std::size_t line_number = 0);

std::string serialize_report(const SensitivityReport& r);
SensitivityReport parse_report(const std::string& line, std::size_t line_number = 0);

std::size_t write_controllers(const std::filesystem::path& path, const std::vector<Controller>& records);
std::vector<Controller> read_controllers(const std::filesystem::path& path);

std::size_t write_reports(const std::filesystem::path& path, const std::vector<SensitivityReport>& records);
std::vector<SensitivityReport> read_reports(const std::filesystem::path& path);

/// One (N, OUT, norm, measure) cell of a hypothesis-test table.
struct ResultsRow {
  int n_spins = 0;
  int out_spin = 0;
  std::string readout = "instant";
  NormKind norm_kind = NormKind::all;
  stats::Measure measure = stats::Measure::kendall;
  double statistic = 0.0;
  double score = 0.0;
  double p_value = 0.0;
  std::size_t n_samples = 0;
  stats::Verdict verdict = stats::Verdict::insufficient;
};

std::string results_csv_header();
std::string format_results_row(const ResultsRow& row);
std::string results_csv(const std::vector<ResultsRow>& rows);
void write_results_csv(const std::vector<ResultsRow>& rows, const std::filesystem::path& path);
/// Reads back the full-precision columns.
std::vector<ResultsRow> read_results_csv(const std::filesystem::path& path);

/// Writes `text` to `path`, throwing IoError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace spinring::io
