#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "spinring/controller.hpp"

namespace spinring {

enum class NormKind { all, controller, hamiltonian };

const char* to_string(NormKind k);
NormKind parse_norm_kind(std::string_view s);

/// Log-sensitivities of one controller along all 2N structured directions.
struct SensitivityReport {
  Controller controller;
  std::vector<double> diff_sens;          // de/d(delta_mu), mu = 1..2N
  std::vector<double> log_sens;           // s(xi_mu0, T)
  std::vector<bool> zero_nominal_flags;
  double norm_c = 0.0;    // over the N bias directions
  double norm_h = 0.0;    // over the N coupling directions
  double norm_all = 0.0;  // over all 2N

  double norm(NormKind k) const;
};

struct SensitivityNorms {
  double controller = 0.0;
  double hamiltonian = 0.0;
  double all = 0.0;
};

/// Euclidean norms of the first half, second half and whole of `log_sens`.
SensitivityNorms sensitivity_norms(std::span<const double> log_sens);

/// Throws DegenerateError when the controller's error is not positive.
/// reference_scale replaces zero nominal values (see log_sensitivity).
SensitivityReport sensitivity_report(const Controller& controller, double reference_scale);

}  // namespace spinring
