#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cvtk/phase_space.hpp"
#include "cvtk/unitaries.hpp"

namespace cvtk {

enum class LogBase { Two, E };

double log_base(double x, LogBase base);

/// g(x) = ((x+1)/2) log((x+1)/2) - ((x-1)/2) log((x-1)/2), g(1) = 0 exactly.
/// Throws InputError for x < 1 - tol; values in [1 - tol, 1] return 0.
double g_fn(double x, LogBase base = LogBase::Two, double tol = kPhysicalityTol);

/// (n+1) log(n+1) - n log n.
double thermal_entropy(double nbar, LogBase base = LogBase::Two);

/// Sum of g(nu_j) over the symplectic spectrum.
double von_neumann_entropy(const GaussianState& state, LogBase base = LogBase::Two);

/// g(sqrt(det A)) for a pure two-mode state. Throws InputError if any joint
/// symplectic eigenvalue differs from 1 by more than 1e-6.
double entanglement_entropy_two_mode(const GaussianState& state, LogBase base = LogBase::Two);

/// Flips the sign of the momenta of the listed modes. The result is not
/// checked for physicality.
GaussianState partial_transpose(const GaussianState& state, std::span<const int> transposed);
GaussianState partial_transpose(const GaussianState& state, std::initializer_list<int> transposed);

struct PptReport {
  bool separable = false;
  std::vector<double> pt_spectrum;  // descending
};

/// Separable iff every symplectic eigenvalue of the partial transpose is >= 1 - tol.
PptReport ppt_separable_1x1(const GaussianState& state, double tol = kPhysicalityTol);

/// Sum over partially transposed symplectic eigenvalues below 1 of -log(nu).
/// Default bipartition: mode 0 against the rest.
double log_negativity(const GaussianState& state, LogBase base = LogBase::Two);
double log_negativity(const GaussianState& state, std::span<const int> transposed, LogBase base);

/// Covariance [[a I, diag(c1, c2)], [diag(c1, c2), b I]] with c1 >= |c2|.
struct StandardForm {
  double a = 1.0;
  double b = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;
  /// Local symplectics with (L1 + L2) V (L1 + L2)^T equal to the standard form.
  std::pair<SymplecticOp, SymplecticOp> local_ops{SymplecticOp::identity(1),
                                                  SymplecticOp::identity(1)};

  Mat covariance() const;
};

/// Local Williamson on each mode, then rotations from a signed SVD of the
/// correlation block.
StandardForm standard_form_reduce(const GaussianState& state);

/// W(phi) = a + b + (c2 - c1) cos(2 phi), with (a, b, c1, c2) read as given.
double duan_witness(const StandardForm& sf, double phi);

/// Var((X1^phi - X2^phi)/sqrt2) + Var((P1^phi + P2^phi)/sqrt2) computed from the
/// covariance directly. Equals duan_witness when V is in standard form.
double duan_witness(const GaussianState& state, double phi);

struct TwoModeInvariants {
  double detA = 0.0;
  double detB = 0.0;
  double detC = 0.0;
  double detV = 0.0;
  double Delta = 0.0;

  /// det V >= 1 and Delta <= 1 + det V, within tol.
  bool physical(double tol = kPhysicalityTol) const;
};

TwoModeInvariants two_mode_invariants(const Mat& V);

/// nu+-^2 = (Delta +- sqrt(Delta^2 - 4 det V)) / 2, returned as (nu+, nu-).
std::pair<double, double> two_mode_symplectic_spectrum(const Mat& V);

}  // namespace cvtk
