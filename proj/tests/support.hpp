#pragma once

// Independent oracles shared by the unit, property and acceptance suites.
// None of them go through the library's clustering or closed forms.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>

namespace oracle {

/// Seed for randomized properties; SPINRING_TEST_SEED overrides the default.
inline std::uint64_t test_seed(std::uint64_t fallback = 20240611) {
  if (const char* env = std::getenv("SPINRING_TEST_SEED")) return std::strtoull(env, nullptr, 10);
  return fallback;
}

inline std::mt19937_64 rng(std::uint64_t salt) { return std::mt19937_64(test_seed() * 0x9E3779B97F4A7C15ULL + salt); }

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// XX ring (or chain) Hamiltonian assembled entry by entry.
template <typename Scalar = double>
Mat<Scalar> hamiltonian(int n, const Eigen::VectorXd& bias, bool ring = true, double j = 1.0) {
  Mat<Scalar> h = Mat<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i) h(i, i) = static_cast<Scalar>(bias(i));
  for (int i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = static_cast<Scalar>(j);
  if (ring && n > 2) h(0, n - 1) = h(n - 1, 0) = static_cast<Scalar>(j);
  return h;
}

/// <out|exp(-iHt)|in> from a raw eigen-solve, no eigenvalue clustering.
template <typename Scalar>
struct Amplitude {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lambda;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weight;

  Amplitude(const Mat<Scalar>& h, int in, int out) {
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(h);
    lambda = es.eigenvalues();
    weight = es.eigenvectors().row(out).transpose().cwiseProduct(es.eigenvectors().row(in).transpose());
  }

  std::complex<Scalar> operator()(Scalar t) const {
    std::complex<Scalar> a(0);
    for (Eigen::Index k = 0; k < lambda.size(); ++k) a += weight(k) * std::polar(Scalar(1), -lambda(k) * t);
    return a;
  }

  Scalar fidelity(Scalar t) const { return std::norm((*this)(t)); }
};

/// exp(-iHt) by scaling and squaring of a Taylor series.
inline Eigen::MatrixXcd expm_minus_i(const Eigen::MatrixXd& h, double t) {
  Eigen::MatrixXcd a = std::complex<double>(0, -t) * h.cast<std::complex<double>>();
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  a /= std::ldexp(1.0, squarings);
  const Eigen::Index n = h.rows();
  Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(n, n);
  Eigen::MatrixXcd sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 50) {
  struct Rec {
    const std::function<double(double)>& f;
    double go(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m);
      const double rm = 0.5 * (m + b);
      const double flm = f(lm);
      const double frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      return go(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + go(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    }
  } rec{f};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec.go(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, depth);
}

/// 20-point Gauss-Legendre rule on [a, b].
template <typename Scalar>
Scalar gauss_legendre(const std::function<Scalar(Scalar)>& f, Scalar a, Scalar b, int panels = 1) {
  static const long double x[10] = {0.0765265211334973337546404093988382L, 0.2277858511416450780804961953685746L,
                                    0.3737060887154195606725481770249272L, 0.5108670019508270980043640509552510L,
                                    0.6360536807265150254528366962262859L, 0.7463319064601507926143050703556416L,
                                    0.8391169718222188233945290617015207L, 0.9122344282513259058677524412032981L,
                                    0.9639719272779137912676661311972772L, 0.9931285991850949247861223884713203L};
  static const long double w[10] = {0.1527533871307258506980843319550976L, 0.1491729864726037467878287370019694L,
                                    0.1420961093183820513292983250671649L, 0.1316886384491766268984944997481631L,
                                    0.1181945319615184173123773777113823L, 0.1019301198172404350367501354803499L,
                                    0.0832767415767047487247581432220463L, 0.0626720483341090635695065351870416L,
                                    0.0406014298003869413310399522749321L, 0.0176140071391521183118619623518528L};
  Scalar total(0);
  const Scalar step = (b - a) / static_cast<Scalar>(panels);
  for (int p = 0; p < panels; ++p) {
    const Scalar lo = a + step * static_cast<Scalar>(p);
    const Scalar mid = lo + step / Scalar(2);
    const Scalar half = step / Scalar(2);
    for (int k = 0; k < 10; ++k) {
      const Scalar d = half * static_cast<Scalar>(x[k]);
      total += static_cast<Scalar>(w[k]) * (f(mid - d) + f(mid + d));
    }
  }
  return total * step / Scalar(2);
}

/// Fidelity error of the perturbed system H + delta S in extended precision;
/// windowed readouts are integrated numerically.
inline long double perturbed_error(const Eigen::MatrixXd& h, const Eigen::MatrixXd& s, long double delta, int in,
                                   int out, double t, double width) {
  const Mat<long double> hp = h.cast<long double>() + delta * s.cast<long double>();
  const Amplitude<long double> amp(hp, in, out);
  if (width == 0.0) return 1.0L - amp.fidelity(static_cast<long double>(t));
  const long double lo = static_cast<long double>(t) - static_cast<long double>(width) / 2;
  const long double hi = static_cast<long double>(t) + static_cast<long double>(width) / 2;
  const long double integral = gauss_legendre<long double>(
      [&](long double x) { return amp.fidelity(x); }, lo, hi, 4);
  return 1.0L - integral / static_cast<long double>(width);
}

/// Five-point central difference of perturbed_error in delta.
inline double error_derivative(const Eigen::MatrixXd& h, const Eigen::MatrixXd& s, int in, int out, double t,
                               double width, long double step = 1e-4L) {
  auto e = [&](long double d) { return perturbed_error(h, s, d, in, out, t, width); };
  const long double num = -e(2 * step) + 8 * e(step) - 8 * e(-step) + e(-2 * step);
  return static_cast<double>(num / (12 * step));
}

inline bool close_rel_abs(double analytic, double reference, double rel, double abs_floor, double small) {
  const double err = std::abs(analytic - reference);
  if (std::abs(reference) < small) return err <= abs_floor;
  return err <= rel * std::abs(reference);
}

}  // namespace oracle
