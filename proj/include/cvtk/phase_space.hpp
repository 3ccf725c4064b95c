#pragma once

// Gaussian phase-space primitives.
//
// Conventions used throughout the toolkit:
//   * quadratures X = a + a^dag, P = -i(a - a^dag), so [X, P] = 2i and the
//     vacuum has unit variance in both quadratures;
//   * modes are interleaved: r = (x1, p1, x2, p2, ..., xN, pN);
//   * mean photon number is tr(V)/4 + |mean|^2/4 - N/2.
// Other common conventions (hbar = 1, vacuum variance 1/2) differ by a factor 2
// in the covariance matrix.

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cvtk {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

inline constexpr double kPhysicalityTol = 1e-9;

/// Block-diagonal symplectic form of n modes, blocks [[0, 1], [-1, 0]].
class SymplecticForm {
 public:
  explicit SymplecticForm(int n_modes);

  int n_modes() const { return n_modes_; }
  const Mat& matrix() const { return matrix_; }

 private:
  int n_modes_;
  Mat matrix_;
};

SymplecticForm omega(int n_modes);

/// Shorthand for omega(n).matrix().
Mat omega_matrix(int n_modes);

/// A point in 2N-dimensional phase space.
struct PhasePoint {
  Vec coords;

  PhasePoint() = default;
  explicit PhasePoint(Vec c) : coords(std::move(c)) {}
  PhasePoint(std::initializer_list<double> values);

  int n_modes() const { return static_cast<int>(coords.size() / 2); }
};

/// Gaussian state rho_G(mean, cov). The constructor checks shapes and symmetry
/// (within tol) and symmetrizes cov; it does not check physicality.
class GaussianState {
 public:
  GaussianState(Vec mean, Mat cov, double tol = kPhysicalityTol);

  int n_modes() const { return static_cast<int>(mean_.size() / 2); }
  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }

  static GaussianState vacuum(int n_modes = 1);
  static GaussianState thermal(double nbar);
  /// Coherent state with mean (x, p); alpha = (x + i p) / 2.
  static GaussianState coherent(double x, double p);
  static GaussianState coherent(Complex alpha);
  /// Squeezed vacuum S(r)|0>, covariance diag(e^{-2r}, e^{2r}).
  static GaussianState squeezed(double r);
  /// Two-mode squeezed vacuum S12(r)|0,0>.
  static GaussianState tmsv(double r);

 private:
  Vec mean_;
  Mat cov_;
};

/// Tensor product: means concatenated, covariances direct-summed.
GaussianState tensor(const GaussianState& a, const GaussianState& b);

struct PhysicalityReport {
  bool physical = false;
  double min_eigenvalue = 0.0;   // of the Hermitian matrix V + i Omega
  std::vector<double> symplectic_spectrum;  // descending
};

PhysicalityReport is_physical(const GaussianState& state, double tol = kPhysicalityTol);

/// Throws PhysicalityError with the diagnostic when the state is unphysical.
void require_physical(const GaussianState& state, double tol = kPhysicalityTol);

/// Symplectic eigenvalues |eig(i Omega V)|, descending. V must be symmetric;
/// it need not be physical (partially transposed covariances are accepted).
std::vector<double> symplectic_spectrum(const Mat& cov);

double mean_photon_number(const GaussianState& state);

/// chi(s) = int W(r) exp(-i/2 s^T Omega r) d r
///        = exp[-1/8 s^T Omega V Omega^T s + i/2 mean^T Omega s].
Complex characteristic_fn(const GaussianState& state, const PhasePoint& s);

/// Normalized Gaussian Wigner function. Throws NumericalError for singular V.
double wigner_fn(const GaussianState& state, const PhasePoint& r);

/// Keeps the listed modes (0-based, order preserved as given).
GaussianState partial_trace(const GaussianState& state, std::span<const int> keep);
GaussianState partial_trace(const GaussianState& state, std::initializer_list<int> keep);

/// Row/column indices (2k, 2k+1) for each listed mode.
std::vector<int> quadrature_indices(std::span<const int> modes);

}  // namespace cvtk
