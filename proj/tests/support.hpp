#pragma once

// Independent oracles shared by the test binaries. Nothing here calls the
// toolkit's decompositions; random symplectics come from exp(Omega H).

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace testing_support {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat omega_oracle(int n) {
  Mat o = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) {
    o(2 * k, 2 * k + 1) = 1.0;
    o(2 * k + 1, 2 * k) = -1.0;
  }
  return o;
}

inline Mat random_symmetric(int dim, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Mat h(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) h(i, j) = h(j, i) = g(rng);
  return h;
}

/// exp(Omega H) is symplectic for every symmetric H.
inline Mat random_symplectic(int n, std::mt19937_64& rng, double scale = 0.4) {
  const Mat h = random_symmetric(2 * n, rng, scale);
  return Mat(omega_oracle(n) * h).exp();
}

/// Random orthogonal symplectic: exp(Omega H) with H commuting with Omega.
inline Mat random_passive(int n, std::mt19937_64& rng) {
  const Mat o = omega_oracle(n);
  const Mat h = random_symmetric(2 * n, rng, 1.0);
  const Mat hp = 0.5 * (h - o * h * o);  // Omega hp = hp Omega
  return Mat(o * hp).exp();
}

/// Spectrum planted as nu_j in [1, 1 + spread).
inline std::vector<double> random_spectrum(int n, std::mt19937_64& rng, double spread = 3.0) {
  std::uniform_real_distribution<double> u(0.0, spread);
  std::vector<double> nu(n);
  for (double& x : nu) x = 1.0 + u(rng);
  std::sort(nu.begin(), nu.end(), std::greater<>());
  return nu;
}

inline Mat diag_modes(const std::vector<double>& nu) {
  const int n = static_cast<int>(nu.size());
  Mat d = Mat::Zero(2 * n, 2 * n);
  for (int k = 0; k < n; ++k) d(2 * k, 2 * k) = d(2 * k + 1, 2 * k + 1) = nu[k];
  return d;
}

/// |eig(i Omega V)| sorted descending, one per mode.
inline std::vector<double> spectrum_oracle(const Mat& V) {
  const int n = static_cast<int>(V.rows() / 2);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(std::complex<double>(0, 1) * (omega_oracle(n) * V).cast<std::complex<double>>());
  std::vector<double> mags;
  for (int i = 0; i < 2 * n; ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mags.begin(), mags.end(), std::greater<>());
  std::vector<double> nu;
  for (int k = 0; k < n; ++k) nu.push_back(mags[2 * k]);
  return nu;
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

/// Composite Simpson rule on [a, b] with an even number of panels.
template <typename F>
double simpson(F f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

/// Independent entropy of a TMSV reduced state: -sum p_n ln p_n with
/// p_n = (1 - t^2) t^{2n}, in closed form -ln(1 - t^2) - t^2 ln(t^2) / (1 - t^2).
inline double tmsv_entropy_nats(double r) {
  const double t2 = std::tanh(r) * std::tanh(r);
  if (t2 == 0.0) return 0.0;
  return -std::log1p(-t2) - t2 * std::log(t2) / (1.0 - t2);
}

}  // namespace testing_support
