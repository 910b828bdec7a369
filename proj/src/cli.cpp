#include "spinring/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include <CLI11.hpp>

#include "spinring/controller.hpp"
#include "spinring/dataset_io.hpp"
#include "spinring/parallel.hpp"
#include "spinring/plot.hpp"
#include "spinring/report.hpp"
#include "spinring/stats.hpp"

namespace spinring::cli {

namespace {

// Raised for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- generate ------------------------------------------------------------------

struct GenerateArgs {
  int n = 0;
  int out_spin = 0;
  int in_spin = 1;
  std::string readout = "instant";
  double delta = 0.1;
  double coupling = 1.0;
  std::string output;
  OptimizationConfig config;
  CLI::Option* delta_opt = nullptr;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  if (a.n < 2) throw UsageError("--n must be >= 2");
  if (a.in_spin != 1) throw UsageError("--in-spin is fixed to 1 (rotational symmetry of the ring)");
  const int max_out = TransferProblem::max_canonical_out(a.n);
  if (a.out_spin < 1 || a.out_spin > max_out)
    throw UsageError("--out-spin must lie in [1, " + std::to_string(max_out) + "] for N = " + std::to_string(a.n));
  const bool windowed = a.readout != "instant";
  if (!windowed && a.delta_opt->count() > 0 && a.delta != 0.0)
    throw UsageError("--delta only applies to --readout window");
  if (windowed && !(a.delta > 0.0)) throw UsageError("--delta must be > 0 for windowed readout");
  if (!(a.coupling > 0.0)) throw UsageError("--coupling must be > 0");

  TransferProblem problem{RingSpec{a.n, a.coupling, Topology::ring, 0.0}, a.in_spin, a.out_spin};
  OptimizationConfig config = a.config;
  config.window_delta = windowed ? a.delta : 0.0;
  try {
    config.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }

  const std::vector<Controller> controllers = optimize(problem, config);
  io::write_controllers(a.output, controllers);

  const auto best = std::max_element(controllers.begin(), controllers.end(),
                                     [](const Controller& x, const Controller& y) { return x.fidelity < y.fidelity; });
  const auto converged = std::count_if(controllers.begin(), controllers.end(), [](const Controller& c) { return c.converged; });
  const auto above = std::count_if(controllers.begin(), controllers.end(),
                                   [&](const Controller& c) { return c.fidelity >= config.fidelity_floor; });
  out << "wrote " << controllers.size() << " controllers to " << a.output << "\n"
      << "transfer: N=" << a.n << " " << a.in_spin << "->" << a.out_spin << " ("
      << (windowed ? "windowed, delta=" + fmt(config.window_delta) : std::string("instant")) << ")\n"
      << "best fidelity: " << fmt(best->fidelity, "%.12f") << " (error " << fmt(best->error, "%.3e") << ", T="
      << fmt(best->readout.center) << ", restart " << best->restart_index << ")\n"
      << "converged: " << converged << "/" << controllers.size() << " ("
      << fmt(100.0 * static_cast<double>(converged) / static_cast<double>(controllers.size()), "%.1f") << "%)\n"
      << "fidelity >= " << fmt(config.fidelity_floor) << ": " << above << "\n";
  return kSuccess;
}

// --- sensitivity -----------------------------------------------------------------

struct SensitivityArgs {
  std::string input;
  std::string output;
  double fidelity_floor = 0.9;
  double reference_scale = 0.0;  // 0: use each record's coupling J
  std::size_t threads = 0;
};

int cmd_sensitivity(const SensitivityArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.fidelity_floor >= 0.0 && a.fidelity_floor <= 1.0)) throw UsageError("--fidelity-floor must lie in [0, 1]");
  if (a.reference_scale < 0.0) throw UsageError("--reference-scale must be > 0");

  const std::vector<Controller> all = io::read_controllers(a.input);
  const std::vector<Controller> kept = filter_ensemble(all, a.fidelity_floor);

  std::vector<Controller> usable;
  std::size_t degenerate = 0;
  for (const auto& c : kept) {
    if (c.error > 0.0) {
      usable.push_back(c);
    } else {
      ++degenerate;
      err << "notice: skipping restart " << c.restart_index << " (N=" << c.problem.spec.n_spins << " "
          << c.problem.in_spin << "->" << c.problem.out_spin
          << "): zero fidelity error, log-sensitivity undefined\n";
    }
  }

  out << "read " << all.size() << " controllers; kept " << kept.size() << ", excluded "
      << all.size() - kept.size() << " below fidelity floor " << fmt(a.fidelity_floor) << "\n";
  if (degenerate > 0) out << "skipped " << degenerate << " degenerate (zero-error) controllers\n";
  if (usable.empty()) {
    err << "error: no controllers left after filtering\n";
    return kFailure;
  }

  std::vector<SensitivityReport> reports(usable.size());
  parallel_for(usable.size(), a.threads, [&](std::size_t i) {
    const double ref = a.reference_scale > 0.0 ? a.reference_scale : usable[i].problem.spec.coupling;
    reports[i] = sensitivity_report(usable[i], ref);
  });
  io::write_reports(a.output, reports);
  out << "wrote " << reports.size() << " sensitivity records to " << a.output << "\n";
  return kSuccess;
}

// --- stats -------------------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> inputs;
  std::string measure = "both";
  double alpha = 0.01;
  std::string output;
};

io::ResultsRow test_cell(const std::vector<const SensitivityReport*>& group, NormKind norm, stats::Measure measure,
                         double alpha) {
  const Controller& first = group.front()->controller;
  io::ResultsRow row;
  row.n_spins = first.problem.spec.n_spins;
  row.out_spin = first.problem.out_spin;
  row.readout = first.readout.instant() ? "instant" : "windowed";
  row.norm_kind = norm;
  row.measure = measure;

  std::vector<double> x;
  std::vector<double> y;
  for (const SensitivityReport* r : group) {
    double e = r->controller.error;
    double s = r->norm(norm);
    if (measure == stats::Measure::pearson) {
      // Linear relation on log-log axes.
      if (!(e > 0.0 && s > 0.0)) continue;
      e = std::log10(e);
      s = std::log10(s);
    }
    x.push_back(e);
    y.push_back(s);
  }
  row.n_samples = x.size();
  row.statistic = row.score = row.p_value = std::nan("");
  row.verdict = stats::Verdict::insufficient;
  if (x.size() < 3) return row;
  try {
    const stats::CorrelationVerdict v = stats::correlation_test(measure, x, y, alpha);
    row.statistic = v.statistic;
    row.score = v.score;
    row.p_value = v.p_value;
    row.verdict = v.verdict;
  } catch (const DegenerateError&) {
  }
  return row;
}

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  if (!(a.alpha > 0.0 && a.alpha <= 1.0)) throw UsageError("--alpha must lie in (0, 1]");
  std::vector<stats::Measure> measures;
  if (a.measure == "kendall" || a.measure == "both") measures.push_back(stats::Measure::kendall);
  if (a.measure == "pearson" || a.measure == "both") measures.push_back(stats::Measure::pearson);

  std::vector<SensitivityReport> reports;
  for (const auto& path : a.inputs) {
    auto part = io::read_reports(path);
    std::move(part.begin(), part.end(), std::back_inserter(reports));
  }

  // (N, OUT, instant?) cells; windowed and instant ensembles are never mixed.
  std::map<std::tuple<int, int, bool>, std::vector<const SensitivityReport*>> groups;
  for (const auto& r : reports)
    groups[{r.controller.problem.spec.n_spins, r.controller.problem.out_spin, !r.controller.readout.instant()}]
        .push_back(&r);

  std::vector<io::ResultsRow> rows;
  for (const auto& [key, group] : groups)
    for (NormKind norm : {NormKind::all, NormKind::controller, NormKind::hamiltonian})
      for (stats::Measure m : measures) rows.push_back(test_cell(group, norm, m, a.alpha));

  io::write_results_csv(rows, a.output);
  out << "transfer      readout   norm         measure  statistic     score        p       n  verdict\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "N=%-2d out=%-2d  %-8s  %-11s  %-7s  %9.4f  %9.4f  %7.4f  %5zu  %s\n", r.n_spins,
                  r.out_spin, r.readout.c_str(), to_string(r.norm_kind), stats::to_string(r.measure).c_str(),
                  r.statistic, r.score, r.p_value, r.n_samples, stats::to_string(r.verdict).c_str());
    out << line;
  }
  out << "wrote " << rows.size() << " rows to " << a.output << "\n";
  return kSuccess;
}

// --- plot --------------------------------------------------------------------------

struct PlotArgs {
  std::string input;
  std::string output;
  std::string csv;
  std::vector<std::string> series{"controller", "hamiltonian"};
  plot::PlotSpec spec;
  bool linear_x = false;
  bool linear_y = false;
};

int cmd_plot(const PlotArgs& a, std::ostream& out, std::ostream& err) {
  const std::vector<SensitivityReport> reports = io::read_reports(a.input);
  std::vector<plot::Series> series;
  for (const auto& name : a.series) {
    const NormKind kind = parse_norm_kind(name);
    plot::Series s;
    switch (kind) {
      case NormKind::controller: s = {"controller norm", "#1f77b4", {}}; break;
      case NormKind::hamiltonian: s = {"hamiltonian norm", "#d62728", {}}; break;
      case NormKind::all: s = {"total norm", "#2ca02c", {}}; break;
    }
    for (const auto& r : reports) s.points.emplace_back(r.controller.error, r.norm(kind));
    series.push_back(std::move(s));
  }

  plot::PlotSpec spec = a.spec;
  spec.log_x = !a.linear_x;
  spec.log_y = !a.linear_y;
  if (spec.title.empty() && !reports.empty()) {
    const Controller& c = reports.front().controller;
    spec.title = "N=" + std::to_string(c.problem.spec.n_spins) + ", " + std::to_string(c.problem.in_spin) + "->" +
                 std::to_string(c.problem.out_spin) + (c.readout.instant() ? ", instant readout" : ", windowed readout");
  }
  const plot::ScatterOutput result = plot::render_scatter(series, spec);
  if (result.dropped > 0)
    err << "notice: dropped " << result.dropped << " points (non-positive or non-finite on a log axis)\n";
  if (result.plotted == 0) {
    err << "error: no plottable points\n";
    return kFailure;
  }
  io::write_text(a.output, result.svg);
  std::string csv_path = a.csv;
  if (csv_path.empty()) {
    std::filesystem::path p(a.output);
    p.replace_extension(".csv");
    csv_path = p.string();
  }
  io::write_text(csv_path, result.csv);
  out << "plotted " << result.plotted << " points (" << result.dropped << " dropped) to " << a.output << " and "
      << csv_path << "\n";
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bias-field controller synthesis and log-sensitivity analysis for XX spin rings", "spinctl"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker threads (0: SPINCTL_THREADS or hardware)");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Synthesize an ensemble of bias-field controllers");
  generate->add_option("--n", gen.n, "Number of spins in the ring")->required();
  generate->add_option("--out-spin", gen.out_spin, "Target spin, 1..ceil(N/2)")->required();
  generate->add_option("--in-spin", gen.in_spin, "Initial spin (fixed to 1)")->capture_default_str();
  generate->add_option("--readout", gen.readout, "instant | window")
      ->check(CLI::IsMember({"instant", "window", "windowed"}))
      ->capture_default_str();
  gen.delta_opt = generate->add_option("--delta", gen.delta, "Readout window width (windowed readout)")
                      ->capture_default_str();
  generate->add_option("--restarts", gen.config.restarts, "Independent optimizer restarts")->capture_default_str();
  generate->add_option("--seed", gen.config.rng_seed, "Ensemble RNG seed")->capture_default_str();
  generate->add_option("--output,-o", gen.output, "Controller records (JSON lines)")->required();
  generate->add_option("--max-iterations", gen.config.max_iterations)->capture_default_str();
  generate->add_option("--gradient-tolerance", gen.config.gradient_tolerance)->capture_default_str();
  generate->add_option("--bias-scale", gen.config.bias_init_scale, "Initial biases drawn from [0, scale]")
      ->capture_default_str();
  generate->add_option("--time-horizon", gen.config.time_horizon_max, "Chain-peak search horizon")
      ->capture_default_str();
  generate->add_option("--peak-seeds", gen.config.peak_seeds, "Chain peaks cycled as start times")
      ->capture_default_str();
  generate->add_option("--coupling", gen.coupling, "Uniform coupling J")->capture_default_str();

  SensitivityArgs sens;
  auto* sensitivity = app.add_subcommand("sensitivity", "Compute log-sensitivities of a controller ensemble");
  sensitivity->add_option("--input,-i", sens.input, "Controller records")->required()->check(CLI::ExistingFile);
  sensitivity->add_option("--output,-o", sens.output, "Sensitivity records (JSON lines)")->required();
  sensitivity->add_option("--fidelity-floor", sens.fidelity_floor, "Exclude controllers below this fidelity")
      ->capture_default_str();
  sensitivity->add_option("--reference-scale", sens.reference_scale,
                          "Scale replacing zero nominal values (default: coupling J)");

  StatsArgs st;
  auto* stats_cmd = app.add_subcommand("stats", "Correlation hypothesis tests of error vs log-sensitivity norms");
  stats_cmd->add_option("--input,-i", st.inputs, "Sensitivity records")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--measure", st.measure, "kendall | pearson | both")
      ->check(CLI::IsMember({"kendall", "pearson", "both"}))
      ->capture_default_str();
  stats_cmd->add_option("--alpha", st.alpha, "Significance level")->capture_default_str();
  stats_cmd->add_option("--output,-o", st.output, "Results CSV")->required();

  PlotArgs pl;
  auto* plot_cmd = app.add_subcommand("plot", "Log-log scatter of log-sensitivity norms versus error");
  plot_cmd->add_option("--input,-i", pl.input, "Sensitivity records")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--output,-o", pl.output, "SVG output")->required();
  plot_cmd->add_option("--csv", pl.csv, "Companion CSV of plotted points (default: output with .csv)");
  plot_cmd->add_option("--series", pl.series, "Norms to plot: controller, hamiltonian, all")
      ->delimiter(',')
      ->check(CLI::IsMember({"controller", "hamiltonian", "all"}))
      ->capture_default_str();
  plot_cmd->add_option("--width", pl.spec.width)->capture_default_str();
  plot_cmd->add_option("--height", pl.spec.height)->capture_default_str();
  plot_cmd->add_option("--title", pl.spec.title);
  plot_cmd->add_flag("--linear-x", pl.linear_x, "Linear error axis");
  plot_cmd->add_flag("--linear-y", pl.linear_y, "Linear norm axis");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  gen.config.threads = threads;
  sens.threads = threads;
  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (sensitivity->parsed()) return cmd_sensitivity(sens, out, err);
    if (stats_cmd->parsed()) return cmd_stats(st, out);
    if (plot_cmd->parsed()) return cmd_plot(pl, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace spinring::cli
