#include "cvtk/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "cvtk/errors.hpp"

namespace cvtk {

SymplecticForm::SymplecticForm(int n_modes) : n_modes_(n_modes) {
  if (n_modes < 1) throw InputError("omega: n_modes must be >= 1");
  matrix_ = Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    matrix_(2 * k, 2 * k + 1) = 1.0;
    matrix_(2 * k + 1, 2 * k) = -1.0;
  }
}

SymplecticForm omega(int n_modes) { return SymplecticForm(n_modes); }

Mat omega_matrix(int n_modes) { return SymplecticForm(n_modes).matrix(); }

PhasePoint::PhasePoint(std::initializer_list<double> values) : coords(values.size()) {
  int i = 0;
  for (double v : values) coords(i++) = v;
}

GaussianState::GaussianState(Vec mean, Mat cov, double tol)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() == 0 || mean_.size() % 2 != 0)
    throw InputError("GaussianState: mean must have even, nonzero length");
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
    throw InputError("GaussianState: covariance shape does not match mean");
  if (!cov_.allFinite() || !mean_.allFinite())
    throw InputError("GaussianState: non-finite entries");
  const double asym = (cov_ - cov_.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "GaussianState: covariance not symmetric (max |V - V^T| = " << asym << ")";
    throw InputError(os.str());
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
}

GaussianState GaussianState::vacuum(int n_modes) {
  if (n_modes < 1) throw InputError("vacuum: n_modes must be >= 1");
  return {Vec::Zero(2 * n_modes), Mat::Identity(2 * n_modes, 2 * n_modes)};
}

GaussianState GaussianState::thermal(double nbar) {
  if (!(nbar >= 0.0)) throw InputError("thermal: nbar must be >= 0");
  return {Vec::Zero(2), (2.0 * nbar + 1.0) * Mat::Identity(2, 2)};
}

GaussianState GaussianState::coherent(double x, double p) {
  Vec m(2);
  m << x, p;
  return {m, Mat::Identity(2, 2)};
}

GaussianState GaussianState::coherent(Complex alpha) {
  return coherent(2.0 * alpha.real(), 2.0 * alpha.imag());
}

GaussianState GaussianState::squeezed(double r) {
  Mat v = Mat::Zero(2, 2);
  v(0, 0) = std::exp(-2.0 * r);
  v(1, 1) = std::exp(2.0 * r);
  return {Vec::Zero(2), v};
}

GaussianState GaussianState::tmsv(double r) {
  const double c = std::cosh(2.0 * r);
  const double s = std::sinh(2.0 * r);
  Mat v(4, 4);
  v << c, 0, -s, 0,
       0, c, 0, s,
       -s, 0, c, 0,
       0, s, 0, c;
  return {Vec::Zero(4), v};
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const auto na = a.mean().size();
  const auto nb = b.mean().size();
  Vec m(na + nb);
  m << a.mean(), b.mean();
  Mat v = Mat::Zero(na + nb, na + nb);
  v.topLeftCorner(na, na) = a.cov();
  v.bottomRightCorner(nb, nb) = b.cov();
  return {m, v};
}

std::vector<double> symplectic_spectrum(const Mat& cov) {
  const auto dim = cov.rows();
  if (dim == 0 || dim % 2 != 0 || cov.cols() != dim)
    throw InputError("symplectic_spectrum: covariance must be square with even size");
  const int n = static_cast<int>(dim / 2);
  const Mat om = omega_matrix(n);

  std::vector<double> magnitudes;
  magnitudes.reserve(dim);

  Eigen::SelfAdjointEigenSolver<Mat> sym(cov);
  if (sym.info() == Eigen::Success && sym.eigenvalues().minCoeff() > 0.0) {
    // i V^{1/2} Omega V^{1/2} is Hermitian and similar to i Omega V.
    const Mat root = sym.operatorSqrt();
    const CMat h = Complex(0.0, 1.0) * (root * om * root).cast<Complex>();
    Eigen::SelfAdjointEigenSolver<CMat> herm(h, Eigen::EigenvaluesOnly);
    for (auto i = 0; i < dim; ++i) magnitudes.push_back(std::abs(herm.eigenvalues()(i)));
  } else {
    Eigen::EigenSolver<Mat> gen(om * cov, false);
    if (gen.info() != Eigen::Success)
      throw NumericalError("symplectic_spectrum: eigen-decomposition failed");
    for (auto i = 0; i < dim; ++i) magnitudes.push_back(std::abs(gen.eigenvalues()(i)));
  }

  std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
  std::vector<double> nu(n);
  for (int j = 0; j < n; ++j) {
    const double a = magnitudes[2 * j];
    const double b = magnitudes[2 * j + 1];
    if (std::abs(a - b) > 1e-8 * std::max(1.0, a)) {
      std::ostringstream os;
      os << "symplectic_spectrum: eigenvalues of i Omega V do not pair (" << a << " vs " << b
         << ")";
      throw NumericalError(os.str());
    }
    nu[j] = 0.5 * (a + b);
  }
  return nu;
}

PhysicalityReport is_physical(const GaussianState& state, double tol) {
  const int n = state.n_modes();
  const CMat m = state.cov().cast<Complex>() + Complex(0.0, 1.0) * omega_matrix(n).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericalError("is_physical: eigen-decomposition of V + i Omega failed");
  PhysicalityReport rep;
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.physical = rep.min_eigenvalue >= -tol;
  try {
    rep.symplectic_spectrum = symplectic_spectrum(state.cov());
  } catch (const NumericalError&) {
    rep.physical = false;
  }
  return rep;
}

void require_physical(const GaussianState& state, double tol) {
  const auto rep = is_physical(state, tol);
  if (!rep.physical) {
    std::ostringstream os;
    os << "state violates V + i Omega >= 0 (min eigenvalue " << rep.min_eigenvalue;
    if (!rep.symplectic_spectrum.empty())
      os << ", smallest symplectic eigenvalue " << rep.symplectic_spectrum.back();
    os << ")";
    throw PhysicalityError(os.str());
  }
}

double mean_photon_number(const GaussianState& state) {
  return state.cov().trace() / 4.0 + state.mean().squaredNorm() / 4.0 - state.n_modes() / 2.0;
}

Complex characteristic_fn(const GaussianState& state, const PhasePoint& s) {
  if (s.coords.size() != state.mean().size())
    throw InputError("characteristic_fn: phase point dimension mismatch");
  const Mat om = omega_matrix(state.n_modes());
  const Vec w = om.transpose() * s.coords;
  const double quad = -0.125 * w.dot(state.cov() * w);
  // Fourier pair chi(s) = int W(r) exp(-i/2 s^T Omega r) d r fixes the 1/2.
  const double phase = 0.5 * state.mean().dot(om * s.coords);
  return std::exp(Complex(quad, phase));
}

double wigner_fn(const GaussianState& state, const PhasePoint& r) {
  if (r.coords.size() != state.mean().size())
    throw InputError("wigner_fn: phase point dimension mismatch");
  Eigen::LDLT<Mat> ldlt(state.cov());
  const double det = state.cov().determinant();
  if (ldlt.info() != Eigen::Success || !(det > 0.0) || !ldlt.isPositive()) {
    std::ostringstream os;
    os << "wigner_fn: covariance is singular or not positive definite (det V = " << det << ")";
    throw NumericalError(os.str());
  }
  const Vec d = r.coords - state.mean();
  const double q = d.dot(ldlt.solve(d));
  const double norm = std::pow(2.0 * std::numbers::pi, state.n_modes()) * std::sqrt(det);
  return std::exp(-0.5 * q) / norm;
}

std::vector<int> quadrature_indices(std::span<const int> modes) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (int m : modes) {
    idx.push_back(2 * m);
    idx.push_back(2 * m + 1);
  }
  return idx;
}

GaussianState partial_trace(const GaussianState& state, std::span<const int> keep) {
  if (keep.empty()) throw InputError("partial_trace: keep set is empty");
  std::set<int> seen;
  for (int m : keep) {
    if (m < 0 || m >= state.n_modes())
      throw InputError("partial_trace: mode index " + std::to_string(m) + " out of range");
    if (!seen.insert(m).second)
      throw InputError("partial_trace: mode index " + std::to_string(m) + " repeated");
  }
  const auto idx = quadrature_indices(keep);
  const auto k = static_cast<Eigen::Index>(idx.size());
  Vec m(k);
  Mat v(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    m(i) = state.mean()(idx[i]);
    for (Eigen::Index j = 0; j < k; ++j) v(i, j) = state.cov()(idx[i], idx[j]);
  }
  return {m, v};
}

GaussianState partial_trace(const GaussianState& state, std::initializer_list<int> keep) {
  return partial_trace(state, std::span<const int>(keep.begin(), keep.size()));
}

}  // namespace cvtk
