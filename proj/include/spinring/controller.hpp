#pragma once

// Static bias-field controller synthesis: symmetric parameterisation of the
// bias vector, chain-peak seeding of the readout time, analytic objective
// gradient and restarted BFGS.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "spinring/ring_model.hpp"

namespace spinring {

struct OptimizationConfig {
  int restarts = 100;
  int max_iterations = 400;
  double gradient_tolerance = 1e-6;
  double bias_init_scale = 10.0;   // units of J
  double time_horizon_max = 20.0;  // units of 1/J
  double window_delta = 0.0;       // 0 selects instant readout
  std::uint64_t rng_seed = 42;
  double fidelity_floor = 0.9;
  int peak_seeds = 8;              // chain peaks cycled over the restarts
  std::size_t threads = 1;         // 0 = auto

  void validate() const;
};

struct Controller {
  TransferProblem problem;
  Eigen::VectorXd bias;
  ReadoutWindow readout;
  double fidelity = 0.0;
  double error = 1.0;
  bool converged = false;
  int restart_index = 0;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool time_clamped = false;  // readout time was projected onto T >= width/2
};

/// Bias-vector symmetry d_IN = d_OUT, d_{IN+k} = d_{OUT-k} as a partition of
/// the spins into orbits; one free coordinate per orbit.
class SymmetricParameterization {
 public:
  SymmetricParameterization() = default;
  SymmetricParameterization(int n_spins, std::vector<std::vector<int>> orbits);

  int n_spins() const { return n_spins_; }
  int free_dimension() const { return static_cast<int>(orbits_.size()); }
  /// Orbits as sorted lists of 1-indexed spins, ordered by smallest member.
  const std::vector<std::vector<int>>& orbits() const { return orbits_; }
  int orbit_of(int spin) const { return orbit_of_[static_cast<std::size_t>(spin - 1)]; }

  Eigen::VectorXd expand(const Eigen::Ref<const Eigen::VectorXd>& free) const;
  /// Orbit means; the left inverse of expand on symmetric vectors.
  Eigen::VectorXd restrict(const Eigen::Ref<const Eigen::VectorXd>& bias) const;
  /// Pulls a full-length gradient back onto the free coordinates.
  Eigen::VectorXd pullback(const Eigen::Ref<const Eigen::VectorXd>& bias_gradient) const;

 private:
  int n_spins_ = 0;
  std::vector<std::vector<int>> orbits_;
  std::vector<int> orbit_of_;
};

SymmetricParameterization build_symmetry_map(const TransferProblem& problem);

/// Direct check of the symmetry equations (no orbit bookkeeping).
bool satisfies_symmetry(const TransferProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& bias);

/// Times of the highest transfer-fidelity peaks of the uncontrolled chain with
/// the same N, best first (ties go to the earlier time).
std::vector<double> chain_peak_seeds(const TransferProblem& problem, double time_horizon_max, int count);

struct ObjectiveValue {
  double value = 0.0;
  Eigen::VectorXd gradient;  // free biases followed by the readout time
  bool time_clamped = false;
};

/// Fidelity error and its analytic gradient at params = (free biases..., T).
ObjectiveValue objective_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& params,
                                      const TransferProblem& problem,
                                      const SymmetricParameterization& symmetry, double window_delta);

/// Independent BFGS runs; restart 0 starts from zero bias at the best peak.
/// The result is ordered by restart index and does not depend on `threads`.
std::vector<Controller> optimize(const TransferProblem& problem, const OptimizationConfig& config);

std::vector<Controller> filter_ensemble(const std::vector<Controller>& controllers, double fidelity_floor);

/// Re-evaluates fidelity and error of a controller from scratch.
void reevaluate(Controller& controller);

/// Per-restart RNG stream: SplitMix64 seeded from (seed, stream).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next();
  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform();

 private:
  std::uint64_t state_;
};

}  // namespace spinring
