#include "cvtk/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "cvtk/errors.hpp"

namespace cvtk {

namespace {

// x log x with 0 log 0 = 0.
double xlogx(double x, LogBase base) { return x > 0.0 ? x * log_base(x, base) : 0.0; }

void require_two_modes(const GaussianState& state, const char* who) {
  if (state.n_modes() != 2) throw InputError(std::string(who) + ": requires exactly two modes");
}

Mat inv_sqrt_unit_det(const Mat& block) {
  const double det = block.determinant();
  if (!(det > 0.0)) throw PhysicalityError("standard_form_reduce: local block has det <= 0");
  Eigen::SelfAdjointEigenSolver<Mat> es(block / std::sqrt(det));
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw PhysicalityError("standard_form_reduce: local block is not positive definite");
  return es.operatorInverseSqrt();
}

}  // namespace

double log_base(double x, LogBase base) {
  return base == LogBase::Two ? std::log2(x) : std::log(x);
}

double g_fn(double x, LogBase base, double tol) {
  if (!(x >= 1.0 - tol)) {
    std::ostringstream os;
    os << "g_fn: requires x >= 1 (got " << x << ")";
    throw InputError(os.str());
  }
  if (x <= 1.0) return 0.0;
  return xlogx(0.5 * (x + 1.0), base) - xlogx(0.5 * (x - 1.0), base);
}

double thermal_entropy(double nbar, LogBase base) {
  if (!(nbar >= 0.0)) throw InputError("thermal_entropy: requires nbar >= 0");
  return xlogx(nbar + 1.0, base) - xlogx(nbar, base);
}

double von_neumann_entropy(const GaussianState& state, LogBase base) {
  double s = 0.0;
  for (double nu : symplectic_spectrum(state.cov())) s += g_fn(nu, base);
  return s;
}

double entanglement_entropy_two_mode(const GaussianState& state, LogBase base) {
  require_two_modes(state, "entanglement_entropy_two_mode");
  for (double nu : symplectic_spectrum(state.cov())) {
    if (std::abs(nu - 1.0) > 1e-6) {
      std::ostringstream os;
      os << "entanglement_entropy_two_mode: state is mixed (symplectic eigenvalue " << nu
         << "); entanglement entropy is only a measure for pure states";
      throw InputError(os.str());
    }
  }
  const double det_a = state.cov().topLeftCorner(2, 2).determinant();
  return g_fn(std::sqrt(std::max(1.0, det_a)), base);
}

GaussianState partial_transpose(const GaussianState& state, std::span<const int> transposed) {
  Vec lambda = Vec::Ones(2 * state.n_modes());
  std::set<int> seen;
  for (int m : transposed) {
    if (m < 0 || m >= state.n_modes())
      throw InputError("partial_transpose: mode " + std::to_string(m) + " out of range");
    if (!seen.insert(m).second)
      throw InputError("partial_transpose: mode " + std::to_string(m) + " repeated");
    lambda(2 * m + 1) = -1.0;
  }
  const auto l = lambda.asDiagonal();
  return {l * state.mean(), l * state.cov() * l};
}

GaussianState partial_transpose(const GaussianState& state, std::initializer_list<int> transposed) {
  return partial_transpose(state, std::span<const int>(transposed.begin(), transposed.size()));
}

PptReport ppt_separable_1x1(const GaussianState& state, double tol) {
  require_two_modes(state, "ppt_separable_1x1");
  PptReport rep;
  rep.pt_spectrum = symplectic_spectrum(partial_transpose(state, {0}).cov());
  rep.separable = rep.pt_spectrum.back() >= 1.0 - tol;
  return rep;
}

double log_negativity(const GaussianState& state, std::span<const int> transposed, LogBase base) {
  if (transposed.empty()) throw InputError("log_negativity: transposed set is empty");
  double en = 0.0;
  for (double nu : symplectic_spectrum(partial_transpose(state, transposed).cov()))
    if (nu < 1.0) en -= log_base(nu, base);
  return en;
}

double log_negativity(const GaussianState& state, LogBase base) {
  const int first[1] = {0};
  return log_negativity(state, first, base);
}

Mat StandardForm::covariance() const {
  Mat v = Mat::Zero(4, 4);
  v(0, 0) = v(1, 1) = a;
  v(2, 2) = v(3, 3) = b;
  v(0, 2) = v(2, 0) = c1;
  v(1, 3) = v(3, 1) = c2;
  return v;
}

StandardForm standard_form_reduce(const GaussianState& state) {
  require_two_modes(state, "standard_form_reduce");
  const Mat& v = state.cov();
  const Mat l1 = inv_sqrt_unit_det(v.topLeftCorner(2, 2));
  const Mat l2 = inv_sqrt_unit_det(v.bottomRightCorner(2, 2));
  const Mat c = l1 * v.topRightCorner(2, 2) * l2.transpose();

  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat u = svd.matrixU();
  Mat w = svd.matrixV();
  double s1 = svd.singularValues()(0);
  double s2 = svd.singularValues()(1);
  // Proper rotations only; a reflection is absorbed into the smaller value.
  if (u.determinant() < 0.0) {
    u.col(1) *= -1.0;
    s2 = -s2;
  }
  if (w.determinant() < 0.0) {
    w.col(1) *= -1.0;
    s2 = -s2;
  }

  StandardForm sf;
  sf.a = std::sqrt(v.topLeftCorner(2, 2).determinant());
  sf.b = std::sqrt(v.bottomRightCorner(2, 2).determinant());
  sf.c1 = s1;
  sf.c2 = s2;
  sf.local_ops.first.S = u.transpose() * l1;
  sf.local_ops.second.S = w.transpose() * l2;
  return sf;
}

double duan_witness(const StandardForm& sf, double phi) {
  return sf.a + sf.b + (sf.c2 - sf.c1) * std::cos(2.0 * phi);
}

double duan_witness(const GaussianState& state, double phi) {
  require_two_modes(state, "duan_witness");
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const double k = 1.0 / std::numbers::sqrt2;
  // X^phi = X c + P s, P^phi = -X s + P c.
  Vec u(4), w(4);
  u << c * k, s * k, -c * k, -s * k;
  w << -s * k, c * k, -s * k, c * k;
  return u.dot(state.cov() * u) + w.dot(state.cov() * w);
}

bool TwoModeInvariants::physical(double tol) const {
  return detV >= 1.0 - tol && Delta <= 1.0 + detV + tol;
}

TwoModeInvariants two_mode_invariants(const Mat& V) {
  if (V.rows() != 4 || V.cols() != 4) throw InputError("two_mode_invariants: V must be 4x4");
  TwoModeInvariants inv;
  inv.detA = V.topLeftCorner(2, 2).determinant();
  inv.detB = V.bottomRightCorner(2, 2).determinant();
  inv.detC = V.topRightCorner(2, 2).determinant();
  inv.detV = V.determinant();
  inv.Delta = inv.detA + inv.detB + 2.0 * inv.detC;
  return inv;
}

std::pair<double, double> two_mode_symplectic_spectrum(const Mat& V) {
  const auto inv = two_mode_invariants(V);
  double disc = inv.Delta * inv.Delta - 4.0 * inv.detV;
  if (disc < -1e-9 * std::max(1.0, inv.Delta * inv.Delta)) {
    std::ostringstream os;
    os << "two_mode_symplectic_spectrum: Delta^2 < 4 det V (" << inv.Delta * inv.Delta << " vs "
       << 4.0 * inv.detV << ")";
    throw InputError(os.str());
  }
  disc = std::max(0.0, disc);
  const double root = std::sqrt(disc);
  const double plus2 = 0.5 * (inv.Delta + root);
  // Product form keeps nu- accurate when nu+ >> nu-.
  const double minus2 = plus2 > 0.0 ? inv.detV / plus2 : 0.0;
  return {std::sqrt(plus2), std::sqrt(std::max(0.0, minus2))};
}

}  // namespace cvtk
