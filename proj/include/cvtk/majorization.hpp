#pragma once

#include <functional>
#include <vector>

#include "cvtk/phase_space.hpp"

namespace cvtk {

/// Nonnegative entries summing to 1. Entries in [-1e-12, 0) are clamped to 0.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> p);

  const std::vector<double>& values() const { return p_; }
  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  /// Entries sorted descending.
  std::vector<double> sorted() const;
  /// Zero-padded copy of length n >= size().
  ProbVector padded(std::size_t n) const;

 private:
  std::vector<double> p_;
};

/// Entries >= 0, columns sum to 1 and rows to at most 1, within col_tol.
class ColumnStochasticMatrix {
 public:
  explicit ColumnStochasticMatrix(Mat d, double col_tol = 1e-10);

  /// Truncation of an infinite column-stochastic matrix: column k may fall
  /// short of 1 by at most max_deficit(k).
  static ColumnStochasticMatrix truncated(Mat d, const Vec& max_deficit);

  const Mat& matrix() const { return d_; }
  /// 1 - column sums, clamped at 0.
  const Vec& column_deficits() const { return deficit_; }

 private:
  ColumnStochasticMatrix() = default;
  void validate_entries(double tol) const;

  Mat d_;
  Vec deficit_;
};

/// p majorizes q: sorted partial sums of p dominate those of q (within 1e-12),
/// shorter vector zero-padded.
bool majorizes(const ProbVector& p, const ProbVector& q);

struct ConcaveFunction {
  const char* name;
  std::function<double(double)> h;
};

/// Shannon entropy term -x ln x, sqrt x, -x^2, ln(1 + x).
const std::vector<ConcaveFunction>& concave_family();

/// sum h(p_n) <= sum h(q_n) + 1e-10 for every h in concave_family().
/// A consequence of p majorizing q, not a decision procedure for it.
bool concave_sum_check(const ProbVector& p, const ProbVector& q);

double shannon_entropy(const ProbVector& p);

/// q = D p. The output is majorized by p. For a truncated D the mass lost
/// through short columns must stay below 1e-10.
ProbVector apply_column_stochastic(const ColumnStochasticMatrix& D, const ProbVector& p);

/// Schmidt distribution p_n = (1 - lambda^2) lambda^{2n}, n = 0 .. size-1
/// (lambda = tanh r). Throws NumericalError when the discarded tail mass
/// lambda^{2 size} exceeds 1e-10.
ProbVector tmsv_schmidt_vector(double lambda, int size);
/// Smallest size whose tail mass lambda^{2 size} is below `tail`.
int tmsv_schmidt_size(double lambda, double tail = 1e-12);

/// Lower-triangular Toeplitz D with first column
/// d_n = (1-l^2)/(1-l'^2) [l^2 - H(n-1) l'^2] l^{2(n-1)}, H(-1) = 0, so that
/// D p(l') = p(l). Requires 0 <= l' < l < 1. Truncation leaves column k short
/// of 1 by (l^2 - l'^2)/(1 - l'^2) l^{2(size-1-k)}; validated against that bound.
ColumnStochasticMatrix tmsv_degradation_matrix(double lambda, double lambda_prime, int size);

/// LOCC conversion psi -> phi possible iff schmidt_phi majorizes schmidt_psi.
bool nielsen_transformable(const ProbVector& schmidt_psi, const ProbVector& schmidt_phi);

/// A density operator with spectrum `eigenvalues` admits an ensemble with
/// weights `weights` iff eigenvalues majorize weights.
bool ensemble_realizable(const ProbVector& eigenvalues, const ProbVector& weights);

}  // namespace cvtk
