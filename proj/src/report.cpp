#include "spinring/report.hpp"

#include <cmath>
#include <string>

#include "spinring/sensitivity.hpp"

namespace spinring {

const char* to_string(NormKind k) {
  switch (k) {
    case NormKind::all: return "all";
    case NormKind::controller: return "controller";
    case NormKind::hamiltonian: return "hamiltonian";
  }
  return "all";
}

NormKind parse_norm_kind(std::string_view s) {
  if (s == "all") return NormKind::all;
  if (s == "controller") return NormKind::controller;
  if (s == "hamiltonian") return NormKind::hamiltonian;
  throw InvalidArgument("unknown norm kind: " + std::string(s));
}

double SensitivityReport::norm(NormKind k) const {
  switch (k) {
    case NormKind::all: return norm_all;
    case NormKind::controller: return norm_c;
    case NormKind::hamiltonian: return norm_h;
  }
  return norm_all;
}

SensitivityNorms sensitivity_norms(std::span<const double> log_sens) {
  if (log_sens.size() % 2 != 0) throw InvalidArgument("sensitivity_norms: expected 2N entries");
  const std::size_t n = log_sens.size() / 2;
  double c2 = 0.0;
  double h2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) c2 += log_sens[i] * log_sens[i];
  for (std::size_t i = n; i < 2 * n; ++i) h2 += log_sens[i] * log_sens[i];
  return {std::sqrt(c2), std::sqrt(h2), std::sqrt(c2 + h2)};
}

SensitivityReport sensitivity_report(const Controller& controller, double reference_scale) {
  const TransferProblem& problem = controller.problem;
  problem.validate();
  if (!(controller.error > 0.0))
    throw DegenerateError("sensitivity_report: controller has zero fidelity error");
  const int n = problem.spec.n_spins;

  const auto decomp = spectral_decompose(build_hamiltonian<double>(problem.spec, controller.bias));
  const SensitivityKernel<double> kernel(decomp, problem, controller.readout);

  SensitivityReport rep;
  rep.controller = controller;
  rep.diff_sens.resize(static_cast<std::size_t>(2 * n));
  rep.log_sens.resize(static_cast<std::size_t>(2 * n));
  rep.zero_nominal_flags.resize(static_cast<std::size_t>(2 * n));
  for (int mu = 1; mu <= 2 * n; ++mu) {
    const auto idx = static_cast<std::size_t>(mu - 1);
    const double diff = kernel.apply(structure_matrix<double>(mu, n).matrix);
    const auto nominal = UncertaintyIndex::make(mu, problem.spec, controller.bias).nominal;
    const LogSensitivity s = log_sensitivity(diff, nominal, controller.error, reference_scale);
    rep.diff_sens[idx] = diff;
    rep.log_sens[idx] = s.value;
    rep.zero_nominal_flags[idx] = s.zero_nominal;
  }
  const SensitivityNorms norms = sensitivity_norms(rep.log_sens);
  rep.norm_c = norms.controller;
  rep.norm_h = norms.hamiltonian;
  rep.norm_all = norms.all;
  return rep;
}

}  // namespace spinring
