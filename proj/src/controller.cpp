#include "spinring/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spinring/bfgs.hpp"
#include "spinring/parallel.hpp"
#include "spinring/sensitivity.hpp"

namespace spinring {

void OptimizationConfig::validate() const {
  if (restarts < 1) throw InvalidArgument("OptimizationConfig: restarts must be >= 1");
  if (max_iterations < 1) throw InvalidArgument("OptimizationConfig: max_iterations must be >= 1");
  if (!(gradient_tolerance > 0.0)) throw InvalidArgument("OptimizationConfig: gradient_tolerance must be > 0");
  if (!(bias_init_scale > 0.0)) throw InvalidArgument("OptimizationConfig: bias_init_scale must be > 0");
  if (!(time_horizon_max > 0.0)) throw InvalidArgument("OptimizationConfig: time_horizon_max must be > 0");
  if (!(window_delta >= 0.0) || !std::isfinite(window_delta))
    throw InvalidArgument("OptimizationConfig: window_delta must be >= 0");
  if (!(fidelity_floor >= 0.0 && fidelity_floor < 1.0))
    throw InvalidArgument("OptimizationConfig: fidelity_floor must lie in [0, 1)");
  if (peak_seeds < 1) throw InvalidArgument("OptimizationConfig: peak_seeds must be >= 1");
}

// --- RNG ---------------------------------------------------------------------

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mixer(seed ^ (0xd1b54a32d192ed03ULL * (index + 1)));
  return SplitMix64(mixer.next());
}

// --- symmetry ----------------------------------------------------------------

SymmetricParameterization::SymmetricParameterization(int n_spins, std::vector<std::vector<int>> orbits)
    : n_spins_(n_spins), orbits_(std::move(orbits)), orbit_of_(static_cast<std::size_t>(n_spins), -1) {
  for (std::size_t o = 0; o < orbits_.size(); ++o) {
    for (int spin : orbits_[o]) {
      if (spin < 1 || spin > n_spins || orbit_of_[static_cast<std::size_t>(spin - 1)] != -1)
        throw InvalidArgument("SymmetricParameterization: orbits must partition the spins");
      orbit_of_[static_cast<std::size_t>(spin - 1)] = static_cast<int>(o);
    }
  }
  if (std::find(orbit_of_.begin(), orbit_of_.end(), -1) != orbit_of_.end())
    throw InvalidArgument("SymmetricParameterization: orbits must cover every spin");
}

Eigen::VectorXd SymmetricParameterization::expand(const Eigen::Ref<const Eigen::VectorXd>& free) const {
  if (free.size() != free_dimension()) throw InvalidArgument("expand: wrong free dimension");
  Eigen::VectorXd bias(n_spins_);
  for (int i = 0; i < n_spins_; ++i) bias(i) = free(orbit_of_[static_cast<std::size_t>(i)]);
  return bias;
}

Eigen::VectorXd SymmetricParameterization::restrict(const Eigen::Ref<const Eigen::VectorXd>& bias) const {
  if (bias.size() != n_spins_) throw InvalidArgument("restrict: wrong bias length");
  Eigen::VectorXd free = Eigen::VectorXd::Zero(free_dimension());
  for (std::size_t o = 0; o < orbits_.size(); ++o) {
    for (int spin : orbits_[o]) free(static_cast<Eigen::Index>(o)) += bias(spin - 1);
    free(static_cast<Eigen::Index>(o)) /= static_cast<double>(orbits_[o].size());
  }
  return free;
}

Eigen::VectorXd SymmetricParameterization::pullback(const Eigen::Ref<const Eigen::VectorXd>& bias_gradient) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(free_dimension());
  for (int i = 0; i < n_spins_; ++i) g(orbit_of_[static_cast<std::size_t>(i)]) += bias_gradient(i);
  return g;
}

namespace {

int wrap(int index0, int n) { return ((index0 % n) + n) % n; }

// Number of mirrored pairs d_{IN+k} = d_{OUT-k}: k = 1..ceil((OUT-IN)/2).
int mirrored_pairs(const TransferProblem& p) {
  const int diff = p.out_spin - p.in_spin;
  return diff > 0 ? (diff + 1) / 2 : 0;
}

}  // namespace

SymmetricParameterization build_symmetry_map(const TransferProblem& problem) {
  problem.validate();
  const int n = problem.spec.n_spins;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  };

  const int in0 = problem.in_spin - 1;
  const int out0 = problem.out_spin - 1;
  unite(in0, out0);
  for (int k = 1; k <= mirrored_pairs(problem); ++k) unite(wrap(in0 + k, n), wrap(out0 - k, n));

  std::vector<std::vector<int>> orbits;
  std::vector<int> slot(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    if (slot[static_cast<std::size_t>(root)] < 0) {
      slot[static_cast<std::size_t>(root)] = static_cast<int>(orbits.size());
      orbits.emplace_back();
    }
    orbits[static_cast<std::size_t>(slot[static_cast<std::size_t>(root)])].push_back(i + 1);
  }
  return SymmetricParameterization(n, std::move(orbits));
}

bool satisfies_symmetry(const TransferProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& bias) {
  const int n = problem.spec.n_spins;
  if (bias.size() != n) return false;
  const int in0 = problem.in_spin - 1;
  const int out0 = problem.out_spin - 1;
  if (bias(in0) != bias(out0)) return false;
  for (int k = 1; k <= mirrored_pairs(problem); ++k)
    if (bias(wrap(in0 + k, n)) != bias(wrap(out0 - k, n))) return false;
  return true;
}

// --- seeding -----------------------------------------------------------------

std::vector<double> chain_peak_seeds(const TransferProblem& problem, double time_horizon_max, int count) {
  problem.validate();
  if (!(time_horizon_max > 0.0)) throw InvalidArgument("chain_peak_seeds: time_horizon_max must be > 0");
  if (count < 1) throw InvalidArgument("chain_peak_seeds: count must be >= 1");

  TransferProblem chain = problem;
  chain.spec = problem.spec.as_chain();
  const auto decomp = spectral_decompose(build_hamiltonian<double>(chain.spec));
  auto fid = [&](double t) { return std::norm(transfer_amplitude(decomp, chain, t)); };

  const double step = 0.01 / problem.spec.coupling;
  const auto points = static_cast<std::size_t>(std::floor(time_horizon_max / step)) + 1;
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) grid[k] = fid(static_cast<double>(k) * step);

  struct Peak {
    double time;
    double fidelity;
  };
  std::vector<Peak> peaks;
  constexpr double inv_phi = 0.6180339887498949;
  for (std::size_t k = 1; k + 1 < points; ++k) {
    if (!(grid[k] > grid[k - 1] && grid[k] >= grid[k + 1])) continue;
    double a = static_cast<double>(k - 1) * step;
    double b = static_cast<double>(k + 1) * step;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = fid(x1);
    double f2 = fid(x2);
    while (b - a > 1e-11) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_phi * (b - a);
        f2 = fid(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_phi * (b - a);
        f1 = fid(x1);
      }
    }
    const double t = 0.5 * (a + b);
    peaks.push_back({t, fid(t)});
  }

  if (peaks.empty()) {
    const auto best = std::max_element(grid.begin(), grid.end());
    return {static_cast<double>(best - grid.begin()) * step};
  }
  // Peak heights closer than 1e-9 count as ties.
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& x, const Peak& y) {
    if (std::abs(x.fidelity - y.fidelity) > 1e-9) return x.fidelity > y.fidelity;
    return x.time < y.time;
  });
  std::vector<double> times;
  for (std::size_t i = 0; i < peaks.size() && static_cast<int>(i) < count; ++i) times.push_back(peaks[i].time);
  return times;
}

// --- objective ---------------------------------------------------------------

ObjectiveValue objective_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& params,
                                      const TransferProblem& problem,
                                      const SymmetricParameterization& symmetry, double window_delta) {
  const int free = symmetry.free_dimension();
  if (params.size() != free + 1) throw InvalidArgument("objective_and_gradient: wrong parameter length");
  if (!(window_delta >= 0.0)) throw InvalidArgument("objective_and_gradient: window_delta must be >= 0");

  ObjectiveValue out;
  const double t_raw = params(free);
  double time_sign = 1.0;
  ReadoutWindow window{t_raw, window_delta};
  if (window_delta == 0.0) {
    // |<OUT|U(-t)|IN>| = |<OUT|U(t)|IN>| for real symmetric H.
    window.center = std::abs(t_raw);
    time_sign = t_raw < 0.0 ? -1.0 : 1.0;
  } else if (t_raw < window_delta / 2.0) {
    window.center = window_delta / 2.0;
    out.time_clamped = true;
  }

  const Eigen::VectorXd bias = symmetry.expand(params.head(free));
  const auto decomp = spectral_decompose(build_hamiltonian<double>(problem.spec, bias));
  out.value = transfer_error(decomp, problem, window);

  const Eigen::MatrixXd g = SensitivityKernel<double>(decomp, problem, window).gradient_matrix();
  out.gradient.resize(free + 1);
  out.gradient.head(free) = symmetry.pullback(g.diagonal());
  out.gradient(free) = out.time_clamped ? 0.0 : -time_sign * fidelity_rate(decomp, problem, window);
  return out;
}

// --- optimisation ------------------------------------------------------------

void reevaluate(Controller& c) {
  const auto decomp = spectral_decompose(build_hamiltonian<double>(c.problem.spec, c.bias));
  c.error = transfer_error(decomp, c.problem, c.readout);
  c.fidelity = 1.0 - c.error;
}

std::vector<Controller> optimize(const TransferProblem& problem, const OptimizationConfig& config) {
  problem.validate();
  config.validate();
  const SymmetricParameterization symmetry = build_symmetry_map(problem);
  std::vector<double> seeds = chain_peak_seeds(problem, config.time_horizon_max, config.peak_seeds);
  for (double& s : seeds) s = std::max(s, config.window_delta / 2.0);

  const int free = symmetry.free_dimension();
  BfgsOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.gradient_tolerance;

  std::vector<Controller> result(static_cast<std::size_t>(config.restarts));
  parallel_for(result.size(), config.threads, [&](std::size_t r) {
    SplitMix64 rng = SplitMix64::stream(config.rng_seed, r);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(free + 1);
    if (r > 0)
      for (int i = 0; i < free; ++i) x0(i) = config.bias_init_scale * rng.uniform();
    x0(free) = seeds[r % seeds.size()];

    bool clamped = false;
    auto f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      ObjectiveValue v = objective_and_gradient(x, problem, symmetry, config.window_delta);
      grad = std::move(v.gradient);
      return v.value;
    };
    const BfgsResult run = minimize_bfgs(f, x0, opts);

    Controller c;
    c.problem = problem;
    c.bias = symmetry.expand(run.x.head(free));
    const double t = run.x(free);
    if (config.window_delta == 0.0) {
      c.readout = {std::abs(t), 0.0};
    } else {
      clamped = t < config.window_delta / 2.0;
      c.readout = {clamped ? config.window_delta / 2.0 : t, config.window_delta};
    }
    c.converged = run.converged;
    c.restart_index = static_cast<int>(r);
    c.seed = config.rng_seed;
    c.iterations = run.iterations;
    c.time_clamped = clamped;
    reevaluate(c);
    result[r] = std::move(c);
  });
  return result;
}

std::vector<Controller> filter_ensemble(const std::vector<Controller>& controllers, double fidelity_floor) {
  std::vector<Controller> kept;
  std::copy_if(controllers.begin(), controllers.end(), std::back_inserter(kept),
               [&](const Controller& c) { return c.fidelity >= fidelity_floor; });
  return kept;
}

}  // namespace spinring
