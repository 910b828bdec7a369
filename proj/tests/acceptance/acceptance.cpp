// Acceptance gate: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the listed numbers. Exit status is non-zero if
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spinring/controller.hpp"
#include "spinring/parallel.hpp"
#include "spinring/report.hpp"
#include "spinring/sensitivity.hpp"
#include "spinring/stats.hpp"
#include "../support.hpp"

#ifndef SPINRING_TEST_BINARY
#define SPINRING_TEST_BINARY "spinring_tests"
#endif

using namespace spinring;
using std::numbers::pi;

namespace {

namespace tol {
constexpr double sens_rel = 1e-5;
constexpr double sens_abs = 1e-9;
constexpr double sens_small = 1e-4;
constexpr double quad_rel = 1e-9;
constexpr double five_ninths = 1e-12;
constexpr double identity = 1e-10;
constexpr double p_reference = 0.0002;
constexpr double null_lo = 0.005;
constexpr double null_hi = 0.02;
constexpr double synth_error = 1e-3;
constexpr double synth_fidelity = 0.9;
}  // namespace tol

namespace budget {
constexpr double c1 = 60, c2 = 10, c3 = 5, c4 = 30, c5 = 60, c6 = 300, c7 = 1800;
}

constexpr std::uint64_t kSeed = 20240611;
constexpr double kTrendDelta = 0.5;
constexpr int kTrendRestarts = 1500;
constexpr std::size_t kTrendMinimum = 500;

struct Outcome {
  bool pass;
  std::string detail;
};

Eigen::VectorXd random_bias(std::mt19937_64& g, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = u(g);
  return d;
}

RingSpec ring(int n) { return RingSpec{n, 1.0, Topology::ring, 0.0}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome derivative_oracle() {
  std::mt19937_64 g(kSeed + 1);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> time(0.1, 20.0);
  const double widths[] = {0.0, 0.05, 0.2};
  int failures = 0;
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(g);
    const Eigen::VectorXd bias = random_bias(g, n, 3.0);
    const int out = 1 + static_cast<int>(g() % static_cast<unsigned>(n));
    const int mu = 1 + static_cast<int>(g() % static_cast<unsigned>(2 * n));
    const double w = widths[trial % 3];
    const double t = std::max(time(g), w / 2);
    const TransferProblem p{ring(n), 1, out};
    const Eigen::MatrixXd h = build_hamiltonian<double>(ring(n), bias);
    const Eigen::MatrixXd s = structure_matrix<double>(mu, n).matrix;
    const auto d = spectral_decompose(h);
    const double analytic = w == 0.0 ? diff_sensitivity_instant(d, p, t, s)
                                     : diff_sensitivity_windowed(d, p, ReadoutWindow{t, w}, s);
    const double fd = oracle::error_derivative(h, s, 0, out - 1, t, w);
    if (!oracle::close_rel_abs(analytic, fd, tol::sens_rel, tol::sens_abs, tol::sens_small)) ++failures;
    if (std::abs(fd) >= tol::sens_small) worst = std::max(worst, std::abs(analytic - fd) / std::abs(fd));
  }
  return {failures == 0, "200 cases, " + std::to_string(failures) + " outside tolerance, worst rel err " +
                             fmt("%.2e", worst)};
}

Outcome windowed_oracle() {
  std::mt19937_64 g(kSeed + 2);
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_real_distribution<double> time(0.0, 20.0);
  std::uniform_real_distribution<double> width(0.01, 2.0);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(g);
    const Eigen::VectorXd bias = random_bias(g, n, 5.0);
    const TransferProblem p{ring(n), 1, 1 + trial % n};
    const double w = width(g);
    const double t = w / 2 + time(g);
    const auto d = spectral_decompose(build_hamiltonian<double>(ring(n), bias));
    const oracle::Amplitude<double> amp(oracle::hamiltonian(n, bias), 0, p.out_index());
    const double quad =
        oracle::adaptive_simpson([&](double x) { return amp.fidelity(x); }, t - w / 2, t + w / 2, 1e-14 * w) / w;
    worst = std::max(worst, std::abs(fidelity_windowed(d, p, ReadoutWindow{t, w}) - quad) / quad);
  }
  const auto d3 = spectral_decompose(build_hamiltonian<double>(ring(3)));
  const double loc = fidelity_windowed(d3, TransferProblem{ring(3), 1, 1}, ReadoutWindow{pi / 3, 2 * pi / 3});
  const double dev = std::abs(loc - 5.0 / 9.0);
  return {worst <= tol::quad_rel && dev <= tol::five_ninths,
          "worst rel err vs quadrature " + fmt("%.2e", worst) + ", |F - 5/9| = " + fmt("%.2e", dev)};
}

Outcome limitation_identity_check() {
  std::mt19937_64 g(kSeed + 3);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> time(0.0, 50.0);
  double worst_identity = 0, worst_norm = 0, worst_closed_form = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(g);
    const auto d = spectral_decompose(build_hamiltonian<double>(ring(n), random_bias(g, n, 5.0)));
    const TransferProblem p{ring(n), 1, 1 + static_cast<int>(g() % static_cast<unsigned>(n))};
    const double t = time(g);
    const double overlap = std::abs(transfer_amplitude(d, p, t));
    const double ident = limitation_identity(d, p, t);
    worst_identity = std::max(worst_identity, std::abs(ident - 1.0));
    worst_closed_form = std::max(worst_closed_form, std::abs(ident - 1.0 - (1 - overlap) * (1 - overlap)));
    worst_norm = std::max(worst_norm, std::abs(projective_error_norm(d, p, t) - 2.0 * (1.0 - overlap)));
  }
  return {worst_identity <= tol::identity && worst_norm <= tol::identity,
          "max |<OUT|TT+S*S|OUT> - 1| = " + fmt("%.3e", worst_identity) + " (equals (1-F)^2 to " +
              fmt("%.1e", worst_closed_form) + "), max | |eps|^2 - 2(1-F) | = " + fmt("%.1e", worst_norm)};
}

Outcome statistics_fixtures() {
  std::mt19937_64 g(kSeed + 4);
  std::uniform_int_distribution<int> size(3, 500);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = static_cast<std::size_t>(size(g));
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    std::shuffle(x.begin(), x.end(), g);
    std::shuffle(y.begin(), y.end(), g);
    long long score = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double prod = (x[i] - x[j]) * (y[i] - y[j]);
        score += (prod > 0) - (prod < 0);
      }
    const double oracle_tau = static_cast<double>(score) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
    if (stats::kendall_tau(x, y) != oracle_tau) ++mismatches;
  }
  const auto row = stats::hypothesis_verdict(stats::Measure::kendall, -0.0512, 2000, 0.01);
  // n for the N=12 out=6 reference row, from its Z = -1.1916.
  const double sigma = 0.0444 / 1.1916;
  const auto n12 = static_cast<std::size_t>(std::lround(4.0 / (9.0 * sigma * sigma)));
  const auto h0 = stats::hypothesis_verdict(stats::Measure::kendall, -0.0444, n12, 0.01);
  const bool ok = mismatches == 0 && std::abs(row.p_value - 0.0003) <= tol::p_reference &&
                  h0.verdict == stats::Verdict::h0_not_rejected;
  return {ok, std::to_string(mismatches) + " tau mismatches in 1000; p(tau=-0.0512, n=2000) = " +
                  fmt("%.5f", row.p_value) + "; N=12 out=6 (n=" + std::to_string(n12) + ", Z=" + fmt("%.4f", h0.score) +
                  ") -> " + stats::to_string(h0.verdict)};
}

Outcome null_calibration() {
  std::mt19937_64 g(kSeed + 5);
  std::normal_distribution<double> z;
  const int samples = 10000;
  int kendall = 0, pearson = 0, kendall_minus = 0, pearson_minus = 0;
  std::vector<double> x(200), y(200);
  for (int s = 0; s < samples; ++s) {
    for (auto& v : x) v = z(g);
    for (auto& v : y) v = z(g);
    const auto k = stats::correlation_test(stats::Measure::kendall, x, y, 0.01).verdict;
    const auto p = stats::correlation_test(stats::Measure::pearson, x, y, 0.01).verdict;
    kendall += k != stats::Verdict::h0_not_rejected;
    pearson += p != stats::Verdict::h0_not_rejected;
    kendall_minus += k == stats::Verdict::h1_minus;
    pearson_minus += p == stats::Verdict::h1_minus;
  }
  const double rk = kendall / double(samples);
  const double rp = pearson / double(samples);
  auto in = [](double r) { return r >= tol::null_lo && r <= tol::null_hi; };
  return {in(rk) && in(rp), "rejection rate kendall " + fmt("%.4f", rk) + ", pearson " + fmt("%.4f", rp) +
                                " (H1_minus alone: " + fmt("%.4f", kendall_minus / double(samples)) + ", " +
                                fmt("%.4f", pearson_minus / double(samples)) +
                                "; sign-selected one-sided p rejects at 2*alpha = 0.02 under the null)"};
}

Outcome synthesis() {
  OptimizationConfig cfg;
  cfg.restarts = 100;
  cfg.rng_seed = 42;
  cfg.threads = 4;
  const auto a = optimize(TransferProblem{ring(5), 1, 3}, cfg);
  double best_error = 1.0;
  for (const auto& c : a) {
    const oracle::Amplitude<double> amp(oracle::hamiltonian(5, c.bias), 0, 2);
    best_error = std::min(best_error, 1.0 - amp.fidelity(c.readout.center));
  }
  cfg.window_delta = 0.1;
  const auto b = optimize(TransferProblem{ring(5), 1, 2}, cfg);
  double best_fid = 0.0;
  for (const auto& c : b) {
    const oracle::Amplitude<double> amp(oracle::hamiltonian(5, c.bias), 0, 1);
    const double lo = c.readout.center - 0.05, hi = c.readout.center + 0.05;
    best_fid = std::max(best_fid, oracle::gauss_legendre<double>([&](double t) { return amp.fidelity(t); }, lo, hi, 4) / 0.1);
  }
  return {best_error < tol::synth_error && best_fid >= tol::synth_fidelity,
          "N=5 1->3 instant best error " + fmt("%.2e", best_error) + "; N=5 1->2 windowed best fidelity " +
              fmt("%.6f", best_fid)};
}

Outcome trend_reproduction() {
  struct Cell {
    int n, out;
    double delta;
    NormKind norm;
    stats::Verdict expected;
    double reference_tau;
  };
  const Cell cells[] = {
      {5, 2, 0.0, NormKind::all, stats::Verdict::h1_minus, -0.4969},
      {3, 1, kTrendDelta, NormKind::hamiltonian, stats::Verdict::h1_minus, -0.6364},
      {5, 3, kTrendDelta, NormKind::hamiltonian, stats::Verdict::h1_plus, 0.4533},
  };
  bool ok = true;
  std::ostringstream detail;
  for (const Cell& cell : cells) {
    OptimizationConfig cfg;
    cfg.restarts = kTrendRestarts;
    cfg.rng_seed = kSeed;
    cfg.window_delta = cell.delta;
    cfg.threads = 0;
    const auto kept = filter_ensemble(optimize(TransferProblem{ring(cell.n), 1, cell.out}, cfg), 0.9);
    std::vector<Controller> usable;
    std::copy_if(kept.begin(), kept.end(), std::back_inserter(usable), [](const Controller& c) { return c.error > 0; });
    std::vector<double> e(usable.size()), s(usable.size());
    parallel_for(usable.size(), 0, [&](std::size_t i) {
      e[i] = usable[i].error;
      s[i] = sensitivity_report(usable[i], 1.0).norm(cell.norm);
    });
    const auto v = stats::correlation_test(stats::Measure::kendall, e, s, 0.01);
    const bool cell_ok = usable.size() >= kTrendMinimum && v.verdict == cell.expected;
    ok = ok && cell_ok;
    detail << "\n    N=" << cell.n << " 1->" << cell.out << (cell.delta > 0 ? " windowed" : " instant") << " "
           << to_string(cell.norm) << ": n=" << usable.size() << " tau=" << fmt("%+.4f", v.statistic) << " (reference "
           << fmt("%+.4f", cell.reference_tau) << ") " << stats::to_string(v.verdict) << (cell_ok ? " ok" : " MISMATCH");
  }
  return {ok, "trend signs" + detail.str()};
}

Outcome property_matrix() {
  int failed = 0;
  std::string seeds;
  for (int seed = 1; seed <= 10; ++seed) {
    const std::string cmd = "SPINRING_TEST_SEED=" + std::to_string(seed) + " \"" SPINRING_TEST_BINARY
                            "\" --test-case='*property*' --minimal > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
      ++failed;
      seeds += " " + std::to_string(seed);
    }
  }
  return {failed == 0, "10 seeds, " + std::to_string(failed) + " failing" + (failed ? " (seeds" + seeds + ")" : "")};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "derivative oracle", budget::c1, derivative_oracle},
      {2, "windowed fidelity oracle", budget::c2, windowed_oracle},
      {3, "limitation identity", budget::c3, limitation_identity_check},
      {4, "statistics fixtures", budget::c4, statistics_fixtures},
      {5, "null calibration", budget::c5, null_calibration},
      {6, "synthesis capability", budget::c6, synthesis},
      {7, "trend reproduction", budget::c7, trend_reproduction},
      {8, "property matrix", 0.0, property_matrix},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0.0 || secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %d %-26s %s  [%.1f s%s] %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs,
                in_time ? "" : ", over budget", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
