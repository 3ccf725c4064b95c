#pragma once

// Conditioning a Gaussian state on the outcome of a single-mode measurement.
// The measured mode is removed; remaining modes keep their relative order.

#include <vector>

#include "cvtk/phase_space.hpp"

namespace cvtk {

/// sum_i w_i rho_G(mean_i, V_i); weights sum to 1 but may be negative.
struct SignedGaussianMixture {
  std::vector<double> weights;
  std::vector<GaussianState> states;

  static SignedGaussianMixture single(GaussianState s);
  int n_modes() const;
  bool empty() const { return states.empty(); }
  double wigner(const PhasePoint& r) const;
  double mean_photon_number() const;
};

struct MeasurementOutcome {
  double probability = 0.0;
  /// Empty when the outcome cannot occur.
  SignedGaussianMixture conditional;
};

struct OffOutcome {
  double p_off = 0.0;
  GaussianState off_state;
};

/// Vacuum projection on `measured`:
/// p_off = 2/sqrt(det(V_B + I)) exp[-1/2 m_B^T (V_B + I)^{-1} m_B],
/// mean_off = m_A - C (V_B + I)^{-1} m_B, V_off = V_A - C (V_B + I)^{-1} C^T.
/// Requires at least two modes.
OffOutcome condition_on_gaussian_povm(const GaussianState& state, int measured);

struct OnOffResult {
  MeasurementOutcome off;
  /// Weights 1/(1 - p_off) on the reduced state and -p_off/(1 - p_off) on the
  /// off state.
  MeasurementOutcome on;
};

OnOffResult on_off_detect(const GaussianState& state, int measured);

/// Radius of the negative central region of the heralded TMSV(r) on-state:
/// R^2 = (1 + t^2) ln(1 + t^2) / t^2 with t = tanh r. Lies in (1, sqrt(ln 4)).
double negative_region_radius(double r);

struct HomodyneResult {
  double density = 0.0;
  GaussianState conditional;
};

/// Measures X on `measured` with outcome x0. The conditional covariance does not
/// depend on x0; the mean is affine in it. Requires at least two modes.
HomodyneResult homodyne_x(const GaussianState& state, int measured, double x0);

/// Measures X^phi = X cos(phi) + P sin(phi) on `measured`.
HomodyneResult homodyne(const GaussianState& state, int measured, double phi, double x0);

/// Marginal density of X^phi on a single mode, any mode count.
double quadrature_density(const GaussianState& state, int mode, double phi, double x);

}  // namespace cvtk
