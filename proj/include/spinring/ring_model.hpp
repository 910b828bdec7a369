#pragma once

// Single-excitation XX spin rings and chains: Hamiltonians, spectral
// decompositions, propagators and transfer fidelities. Everything here is
// templated on the real scalar type and works on Eigen dense matrices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spinring/errors.hpp"
#include "spinring/sinc.hpp"

namespace spinring {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

enum class Topology { ring, chain };

inline const char* to_string(Topology t) { return t == Topology::ring ? "ring" : "chain"; }

/// Physical problem statement: N spins with uniform XX coupling J (hbar = 1).
struct RingSpec {
  int n_spins = 3;
  double coupling = 1.0;
  Topology topology = Topology::ring;
  double kappa = 0.0;  // XX coupling only

  void validate() const {
    if (n_spins < 2) throw InvalidArgument("RingSpec: n_spins must be >= 2");
    if (!(coupling > 0.0) || !std::isfinite(coupling))
      throw InvalidArgument("RingSpec: coupling must be finite and > 0");
    if (kappa != 0.0) throw InvalidArgument("RingSpec: only XX coupling (kappa = 0) is supported");
  }

  RingSpec as_chain() const {
    RingSpec c = *this;
    c.topology = Topology::chain;
    return c;
  }
};

/// Excitation transfer IN -> OUT, 1-indexed spins.
struct TransferProblem {
  RingSpec spec;
  int in_spin = 1;
  int out_spin = 2;

  void validate() const {
    spec.validate();
    if (in_spin < 1 || in_spin > spec.n_spins || out_spin < 1 || out_spin > spec.n_spins)
      throw InvalidArgument("TransferProblem: spins must lie in [1, N]");
  }

  /// Synthesis convention: IN = 1 and OUT in [1, ceil(N/2)].
  bool is_canonical() const {
    return in_spin == 1 && out_spin >= 1 && out_spin <= max_canonical_out(spec.n_spins);
  }

  static int max_canonical_out(int n_spins) { return (n_spins + 1) / 2; }

  Eigen::Index in_index() const { return in_spin - 1; }
  Eigen::Index out_index() const { return out_spin - 1; }
};

/// Readout at time T averaged over [T - width/2, T + width/2]; width 0 is an
/// instant readout.
struct ReadoutWindow {
  double center = 0.0;
  double width = 0.0;

  bool instant() const { return width == 0.0; }

  void validate() const {
    if (!std::isfinite(center) || !std::isfinite(width))
      throw InvalidArgument("ReadoutWindow: non-finite time");
    if (width < 0.0) throw InvalidArgument("ReadoutWindow: width must be >= 0");
    if (center < 0.0 || center - width / 2.0 < 0.0)
      throw InvalidArgument("ReadoutWindow: window extends before t = 0");
  }
};

/// H0 + diag(bias). The chain topology drops the (1, N) corner coupling.
template <typename Scalar>
Mat<Scalar> build_hamiltonian(const RingSpec& spec, const Eigen::Ref<const Vec<Scalar>>& bias) {
  spec.validate();
  const Eigen::Index n = spec.n_spins;
  if (bias.size() != n) {
    std::ostringstream msg;
    msg << "build_hamiltonian: bias has length " << bias.size() << ", expected " << n;
    throw InvalidArgument(msg.str());
  }
  if (!bias.allFinite()) throw InvalidArgument("build_hamiltonian: non-finite bias entry");

  const Scalar j = static_cast<Scalar>(spec.coupling);
  Mat<Scalar> h = Mat<Scalar>::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    h(i, i + 1) = j;
    h(i + 1, i) = j;
  }
  // For N = 2 the corner coincides with the single bond.
  if (spec.topology == Topology::ring && n > 2) {
    h(0, n - 1) = j;
    h(n - 1, 0) = j;
  }
  h.diagonal() += bias;
  return h;
}

template <typename Scalar>
Mat<Scalar> build_hamiltonian(const RingSpec& spec) {
  return build_hamiltonian<Scalar>(spec, Vec<Scalar>::Zero(spec.n_spins));
}

/// Distinct eigenvalues of a real symmetric Hamiltonian with the orthogonal
/// projectors onto their eigenspaces, sorted by increasing eigenvalue.
template <typename Scalar>
struct SpectralDecomposition {
  struct Cluster {
    Scalar eigenvalue;
    Mat<Scalar> projector;
    int multiplicity;
  };

  std::vector<Cluster> clusters;
  Scalar cluster_tolerance = Scalar(1e-10);

  Eigen::Index dim() const { return clusters.empty() ? 0 : clusters.front().projector.rows(); }
  std::size_t size() const { return clusters.size(); }

  /// Projector entries <row|P_m|col> for every cluster.
  Vec<Scalar> projector_entries(Eigen::Index row, Eigen::Index col) const {
    Vec<Scalar> c(static_cast<Eigen::Index>(clusters.size()));
    for (std::size_t m = 0; m < clusters.size(); ++m)
      c(static_cast<Eigen::Index>(m)) = clusters[m].projector(row, col);
    return c;
  }

  Vec<Scalar> eigenvalues() const {
    Vec<Scalar> l(static_cast<Eigen::Index>(clusters.size()));
    for (std::size_t m = 0; m < clusters.size(); ++m)
      l(static_cast<Eigen::Index>(m)) = clusters[m].eigenvalue;
    return l;
  }
};

namespace detail {

template <typename Scalar>
Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solve_symmetric(const Mat<Scalar>& h) {
  if (h.rows() != h.cols() || h.rows() == 0)
    throw InvalidArgument("spectral_decompose: matrix must be square and non-empty");
  if (!h.allFinite()) throw InvalidArgument("spectral_decompose: non-finite matrix entry");
  if (h != h.transpose()) throw InvalidArgument("spectral_decompose: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(h);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "spectral_decompose: eigensolver failed (N=" << h.rows()
        << ", |H|_F=" << static_cast<double>(h.norm())
        << ", max|H_ij|=" << static_cast<double>(h.cwiseAbs().maxCoeff()) << ")";
    throw NumericalError(msg.str());
  }
  return solver;
}

}  // namespace detail

/// Eigen-decomposes `h` and merges adjacent eigenvalues that differ by at most
/// cluster_tolerance * max(1, spectral radius).
template <typename Scalar>
SpectralDecomposition<Scalar> spectral_decompose(const Mat<Scalar>& h,
                                                 Scalar cluster_tolerance = Scalar(1e-10)) {
  using std::abs;
  if (!(cluster_tolerance > Scalar(0)))
    throw InvalidArgument("spectral_decompose: cluster_tolerance must be > 0");
  const auto solver = detail::solve_symmetric(h);
  const Vec<Scalar>& lambda = solver.eigenvalues();
  const Mat<Scalar>& v = solver.eigenvectors();
  const Eigen::Index n = h.rows();

  const Scalar radius = lambda.cwiseAbs().maxCoeff();
  const Scalar gap = cluster_tolerance * std::max(Scalar(1), radius);

  SpectralDecomposition<Scalar> decomp;
  decomp.cluster_tolerance = cluster_tolerance;
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && lambda(stop) - lambda(stop - 1) <= gap) ++stop;
    const Eigen::Index mult = stop - start;
    const auto block = v.middleCols(start, mult);
    decomp.clusters.push_back({lambda.segment(start, mult).mean(), block * block.transpose(),
                               static_cast<int>(mult)});
    start = stop;
  }
  return decomp;
}

/// One cluster per eigenvector, no merging. Only meaningful as a reference for
/// nondegenerate spectra.
template <typename Scalar>
SpectralDecomposition<Scalar> unclustered_decompose(const Mat<Scalar>& h) {
  const auto solver = detail::solve_symmetric(h);
  SpectralDecomposition<Scalar> decomp;
  decomp.cluster_tolerance = Scalar(0);
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    const auto col = solver.eigenvectors().col(k);
    decomp.clusters.push_back({solver.eigenvalues()(k), col * col.transpose(), 1});
  }
  return decomp;
}

/// U(t) = sum_n P_n exp(-i lambda_n t).
template <typename Scalar>
CMat<Scalar> evolve(const SpectralDecomposition<Scalar>& decomp, Scalar t) {
  using C = std::complex<Scalar>;
  const Eigen::Index n = decomp.dim();
  CMat<Scalar> u = CMat<Scalar>::Zero(n, n);
  for (const auto& c : decomp.clusters) u += std::polar(Scalar(1), -c.eigenvalue * t) * c.projector.template cast<C>();
  return u;
}

/// U(t)|IN>.
template <typename Scalar>
CVec<Scalar> evolve_state(const SpectralDecomposition<Scalar>& decomp, Eigen::Index in, Scalar t) {
  using C = std::complex<Scalar>;
  CVec<Scalar> psi = CVec<Scalar>::Zero(decomp.dim());
  for (const auto& c : decomp.clusters)
    psi += std::polar(Scalar(1), -c.eigenvalue * t) * c.projector.col(in).template cast<C>();
  return psi;
}

/// <OUT|U(t)|IN>.
template <typename Scalar>
std::complex<Scalar> transfer_amplitude(const SpectralDecomposition<Scalar>& decomp,
                                        const TransferProblem& problem, Scalar t) {
  std::complex<Scalar> a(0);
  for (const auto& c : decomp.clusters)
    a += c.projector(problem.out_index(), problem.in_index()) * std::polar(Scalar(1), -c.eigenvalue * t);
  return a;
}

template <typename Scalar>
Scalar fidelity_instant(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                        Scalar t) {
  return std::clamp(std::norm(transfer_amplitude(decomp, problem, t)), Scalar(0), Scalar(1));
}

/// Window-averaged fidelity in closed form:
///   sum_{m,n} c_m c_n cos(w_mn T) sinc(w_mn width / 2),  c_m = <OUT|P_m|IN>.
template <typename Scalar>
Scalar fidelity_windowed(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                         const ReadoutWindow& window) {
  using std::cos;
  window.validate();
  if (!(window.width > 0.0))
    throw InvalidArgument("fidelity_windowed: width must be > 0 (use fidelity_instant)");
  const Scalar t = static_cast<Scalar>(window.center);
  const Scalar half = static_cast<Scalar>(window.width) / Scalar(2);
  const Vec<Scalar> c = decomp.projector_entries(problem.out_index(), problem.in_index());
  const Vec<Scalar> lambda = decomp.eigenvalues();
  Scalar f = c.squaredNorm();
  for (Eigen::Index m = 0; m < c.size(); ++m) {
    for (Eigen::Index n = m + 1; n < c.size(); ++n) {
      const Scalar w = lambda(m) - lambda(n);
      f += Scalar(2) * c(m) * c(n) * cos(w * t) * sinc(w * half);
    }
  }
  return std::clamp(f, Scalar(0), Scalar(1));
}

/// Dispatches on the window: instant readout for width 0, averaged otherwise.
template <typename Scalar>
Scalar fidelity(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                const ReadoutWindow& window) {
  if (window.instant()) return fidelity_instant(decomp, problem, static_cast<Scalar>(window.center));
  return fidelity_windowed(decomp, problem, window);
}

/// 1 - fidelity, summed as the population left outside OUT so that it keeps
/// full relative precision for near-perfect transfers.
template <typename Scalar>
Scalar transfer_error(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                      const ReadoutWindow& window) {
  using std::cos;
  window.validate();
  const Eigen::Index n = decomp.dim();
  const Scalar t = static_cast<Scalar>(window.center);
  if (window.instant()) {
    CVec<Scalar> psi = evolve_state(decomp, problem.in_index(), t);
    psi(problem.out_index()) = Scalar(0);
    return std::clamp(psi.squaredNorm(), Scalar(0), Scalar(1));
  }
  const Scalar half = static_cast<Scalar>(window.width) / Scalar(2);
  const Vec<Scalar> lambda = decomp.eigenvalues();
  const auto k = lambda.size();
  // Pairwise time-average weights, shared by every site population.
  Mat<Scalar> weight(k, k);
  for (Eigen::Index m = 0; m < k; ++m) {
    for (Eigen::Index q = 0; q < k; ++q) {
      const Scalar w = lambda(m) - lambda(q);
      weight(m, q) = cos(w * t) * sinc(w * half);
    }
  }
  Scalar err = 0;
  for (Eigen::Index site = 0; site < n; ++site) {
    if (site == problem.out_index()) continue;
    const Vec<Scalar> c = decomp.projector_entries(site, problem.in_index());
    err += std::max(Scalar(0), c.dot(weight * c));
  }
  return std::clamp(err, Scalar(0), Scalar(1));
}

/// dF/dT of the readout fidelity with respect to the readout time.
template <typename Scalar>
Scalar fidelity_rate(const SpectralDecomposition<Scalar>& decomp, const TransferProblem& problem,
                     const ReadoutWindow& window) {
  using std::sin;
  const Scalar t = static_cast<Scalar>(window.center);
  if (!window.instant()) {
    const Scalar width = static_cast<Scalar>(window.width);
    return (std::norm(transfer_amplitude(decomp, problem, t + width / Scalar(2))) -
            std::norm(transfer_amplitude(decomp, problem, t - width / Scalar(2)))) /
           width;
  }
  const Vec<Scalar> c = decomp.projector_entries(problem.out_index(), problem.in_index());
  const Vec<Scalar> lambda = decomp.eigenvalues();
  Scalar rate = 0;
  for (Eigen::Index m = 0; m < c.size(); ++m) {
    for (Eigen::Index n = m + 1; n < c.size(); ++n) {
      const Scalar w = lambda(m) - lambda(n);
      rate -= Scalar(2) * c(m) * c(n) * w * sin(w * t);
    }
  }
  return rate;
}

template <typename Scalar>
Scalar fidelity_error(Scalar fidelity) {
  if (!(fidelity >= Scalar(0) && fidelity <= Scalar(1)))
    throw InvalidArgument("fidelity_error: fidelity must lie in [0, 1]");
  return Scalar(1) - fidelity;
}

/// Optimal global phase -arg<OUT|U(t)|IN>, 0 when the overlap vanishes.
template <typename Scalar>
Scalar optimal_phase(std::complex<Scalar> amplitude) {
  if (amplitude == std::complex<Scalar>(0)) return Scalar(0);
  return -std::arg(amplitude);
}

/// |eps*|^2 for the projective tracking error |OUT> - exp(i phi*) U(t)|IN>.
template <typename Scalar>
Scalar projective_error_norm(const SpectralDecomposition<Scalar>& decomp,
                             const TransferProblem& problem, Scalar t) {
  const CVec<Scalar> psi = evolve_state(decomp, problem.in_index(), t);
  const Scalar phase = optimal_phase(psi(problem.out_index()));
  CVec<Scalar> err = -std::polar(Scalar(1), phase) * psi;
  err(problem.out_index()) += Scalar(1);
  return err.squaredNorm();
}

/// Projective sensitivity operator I - exp(i phi*) U(t) W, W swapping IN and OUT.
template <typename Scalar>
CMat<Scalar> projective_sensitivity(const SpectralDecomposition<Scalar>& decomp,
                                    const TransferProblem& problem, Scalar t) {
  using C = std::complex<Scalar>;
  const Eigen::Index n = decomp.dim();
  Mat<Scalar> swap = Mat<Scalar>::Identity(n, n);
  if (problem.in_index() != problem.out_index()) {
    swap.row(problem.in_index()).swap(swap.row(problem.out_index()));
  }
  const CMat<Scalar> u = evolve(decomp, t);
  const Scalar phase = optimal_phase(u(problem.out_index(), problem.in_index()));
  return CMat<Scalar>::Identity(n, n) - std::polar(Scalar(1), phase) * u * swap.template cast<C>();
}

/// <OUT|(|T><T| + S_proj^dagger S_proj)|OUT> with |T> = U(t)|IN>, by direct
/// matrix evaluation. Equals 1 + (1 - |<OUT|T>|)^2, so it reaches 1 as the
/// fidelity approaches 1.
template <typename Scalar>
Scalar limitation_identity(const SpectralDecomposition<Scalar>& decomp,
                           const TransferProblem& problem, Scalar t) {
  const CVec<Scalar> target = evolve_state(decomp, problem.in_index(), t);
  const CMat<Scalar> s = projective_sensitivity(decomp, problem, t);
  const CMat<Scalar> op = target * target.adjoint() + s.adjoint() * s;
  return op(problem.out_index(), problem.out_index()).real();
}

}  // namespace spinring
