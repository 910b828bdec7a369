#pragma once

// Closed-form differential sensitivity of the fidelity error to a structured
// Hamiltonian perturbation H_D + delta * S_mu, and the log-sensitivity built
// from it.
//
// Both readout modes share the same shape:
//   de/d(delta) = sum_{m,n} <OUT|P_m S P_n|IN> K_mn,
//   K_mn        = sum_p <IN|P_p|OUT> k(m, n, p),
// so the cluster kernel K is computed once per (decomposition, readout) and
// reused for every structure matrix.

#include <cmath>
#include <sstream>
#include <type_traits>

#include "spinring/ring_model.hpp"

namespace spinring {

enum class UncertaintyKind { controller, coupling };

/// 1-indexed perturbation direction: mu in [1, N] addresses a bias, mu in
/// [N+1, 2N] a coupling edge (mu = 2N is the ring-closing (1, N) edge).
struct UncertaintyIndex {
  int mu = 1;
  UncertaintyKind kind = UncertaintyKind::controller;
  double nominal = 0.0;

  static UncertaintyIndex make(int mu, const RingSpec& spec, const Eigen::Ref<const Vec<double>>& bias) {
    const int n = spec.n_spins;
    if (mu < 1 || mu > 2 * n) {
      std::ostringstream msg;
      msg << "UncertaintyIndex: mu = " << mu << " outside [1, " << 2 * n << "]";
      throw InvalidArgument(msg.str());
    }
    if (mu <= n) return {mu, UncertaintyKind::controller, bias(mu - 1)};
    // A chain has no (1, N) bond, so its nominal is zero.
    if (mu == 2 * n && spec.topology == Topology::chain) return {mu, UncertaintyKind::coupling, 0.0};
    return {mu, UncertaintyKind::coupling, spec.coupling};
  }
};

template <typename Scalar>
struct StructureMatrix {
  int mu;
  Mat<Scalar> matrix;
};

/// 0/1 symmetric direction matrix for perturbation mu.
template <typename Scalar>
StructureMatrix<Scalar> structure_matrix(int mu, int n_spins) {
  if (n_spins < 2) throw InvalidArgument("structure_matrix: n_spins must be >= 2");
  if (mu < 1 || mu > 2 * n_spins) {
    std::ostringstream msg;
    msg << "structure_matrix: mu = " << mu << " outside [1, " << 2 * n_spins << "]";
    throw InvalidArgument(msg.str());
  }
  Mat<Scalar> s = Mat<Scalar>::Zero(n_spins, n_spins);
  if (mu <= n_spins) {
    s(mu - 1, mu - 1) = Scalar(1);
  } else if (mu < 2 * n_spins) {
    const int i = mu - n_spins - 1;
    s(i, i + 1) = Scalar(1);
    s(i + 1, i) = Scalar(1);
  } else {
    s(0, n_spins - 1) = Scalar(1);
    s(n_spins - 1, 0) = Scalar(1);
  }
  return {mu, std::move(s)};
}

namespace detail {

// Antiderivative in t of 2t sinc(w_mn t / 2) sin((w_mp + w_np) t / 2), written
// as -2 t^2 (sinc(w_mp t) - sinc(w_np t)) / ((w_mp - w_np) t). The divided
// difference turns into sinc' when w_mn -> 0, which is the same-cluster (A)
// case; it vanishes identically when all three eigenvalues coincide.
template <typename Scalar>
Scalar window_primitive(Scalar t, Scalar w_np, Scalar w_mp) {
  if (t == Scalar(0)) return Scalar(0);
  return Scalar(-2) * t * t * sinc_divided_difference(w_np * t, w_mp * t);
}

}  // namespace detail

/// Cluster kernel K_mn plus the OUT/IN projector columns it contracts with.
template <typename Scalar>
class SensitivityKernel {
 public:
  SensitivityKernel(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                    const ReadoutWindow& window) {
    using std::sin;
    window.validate();
    const auto k = static_cast<Eigen::Index>(decomp.size());
    const Eigen::Index n = decomp.dim();
    const Vec<Scalar> lambda = decomp.eigenvalues();
    const Vec<Scalar> c = decomp.projector_entries(problem.in_index(), problem.out_index());

    out_cols_.resize(n, k);
    in_cols_.resize(n, k);
    for (Eigen::Index m = 0; m < k; ++m) {
      const auto& p = decomp.clusters[static_cast<std::size_t>(m)].projector;
      out_cols_.col(m) = p.col(problem.out_index());
      in_cols_.col(m) = p.col(problem.in_index());
    }

    kernel_ = Mat<Scalar>::Zero(k, k);
    const Scalar t = static_cast<Scalar>(window.center);
    if (window.instant()) {
      // 2T sinc(T w_mn / 2) sum_p c_p sin(T (w_mp + w_np) / 2)
      for (Eigen::Index m = 0; m < k; ++m) {
        for (Eigen::Index nn = 0; nn < k; ++nn) {
          const Scalar w_mn = lambda(m) - lambda(nn);
          Scalar acc = 0;
          for (Eigen::Index p = 0; p < k; ++p) {
            const Scalar phase = (lambda(m) + lambda(nn) - Scalar(2) * lambda(p)) * t / Scalar(2);
            acc += c(p) * sin(phase);
          }
          kernel_(m, nn) = Scalar(2) * t * sinc(w_mn * t / Scalar(2)) * acc;
        }
      }
    } else {
      const Scalar width = static_cast<Scalar>(window.width);
      const Scalar hi = t + width / Scalar(2);
      const Scalar lo = t - width / Scalar(2);
      for (Eigen::Index m = 0; m < k; ++m) {
        for (Eigen::Index nn = 0; nn < k; ++nn) {
          Scalar acc = 0;
          for (Eigen::Index p = 0; p < k; ++p) {
            const Scalar w_mp = lambda(m) - lambda(p);
            const Scalar w_np = lambda(nn) - lambda(p);
            // m == nn: same-cluster (A) terms, otherwise cross-cluster (B) terms.
            acc += c(p) * (detail::window_primitive(hi, w_np, w_mp) -
                           detail::window_primitive(lo, w_np, w_mp));
          }
          kernel_(m, nn) = acc / width;
        }
      }
    }
  }

  /// de/d(delta) along S = sum_{m,n} (P_m OUT)^T S (P_n IN) K_mn.
  Scalar apply(const std::type_identity_t<Eigen::Ref<const Mat<Scalar>>>& s) const {
    return (out_cols_.transpose() * s * in_cols_).cwiseProduct(kernel_).sum();
  }

  /// G with de/d(delta) = sum_ij S_ij G_ij for any direction S.
  Mat<Scalar> gradient_matrix() const { return out_cols_ * kernel_ * in_cols_.transpose(); }

  const Mat<Scalar>& kernel() const { return kernel_; }

 private:
  Mat<Scalar> kernel_;
  Mat<Scalar> out_cols_;
  Mat<Scalar> in_cols_;
};

template <typename Scalar>
Scalar diff_sensitivity_instant(const SpectralDecomposition<Scalar>& decomp,
                                const TransferProblem& problem, Scalar t,
                                const std::type_identity_t<Eigen::Ref<const Mat<Scalar>>>& s) {
  const ReadoutWindow window{static_cast<double>(t), 0.0};
  return SensitivityKernel<Scalar>(decomp, problem, window).apply(s);
}

template <typename Scalar>
Scalar diff_sensitivity_windowed(const SpectralDecomposition<Scalar>& decomp,
                                 const TransferProblem& problem, const ReadoutWindow& window,
                                 const std::type_identity_t<Eigen::Ref<const Mat<Scalar>>>& s) {
  if (!(window.width > 0.0))
    throw InvalidArgument("diff_sensitivity_windowed: width must be > 0 (use the instant path)");
  return SensitivityKernel<Scalar>(decomp, problem, window).apply(s);
}

template <typename Scalar>
Scalar diff_sensitivity(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                        const ReadoutWindow& window, const std::type_identity_t<Eigen::Ref<const Mat<Scalar>>>& s) {
  return SensitivityKernel<Scalar>(decomp, problem, window).apply(s);
}

struct LogSensitivity {
  double value = 0.0;
  bool zero_nominal = false;
};

/// diff * nominal / error. A nominal below 1e-12 * reference_scale is replaced
/// by reference_scale and flagged.
inline LogSensitivity log_sensitivity(double diff, double nominal, double error,
                                      double reference_scale) {
  if (!(error > 0.0))
    throw DegenerateError("log_sensitivity: fidelity error must be > 0");
  if (!(reference_scale > 0.0))
    throw InvalidArgument("log_sensitivity: reference_scale must be > 0");
  if (std::abs(nominal) > 1e-12 * reference_scale) return {diff * nominal / error, false};
  return {diff * reference_scale / error, true};
}

}  // namespace spinring
