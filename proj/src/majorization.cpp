#include "cvtk/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cvtk/errors.hpp"

namespace cvtk {

ProbVector::ProbVector(std::vector<double> p) : p_(std::move(p)) {
  if (p_.empty()) throw InputError("ProbVector: empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < p_.size(); ++i) {
    if (!std::isfinite(p_[i])) throw InputError("ProbVector: non-finite entry");
    if (p_[i] < -1e-12) {
      std::ostringstream os;
      os << "ProbVector: negative entry " << p_[i] << " at index " << i;
      throw InputError(os.str());
    }
    p_[i] = std::max(0.0, p_[i]);
    sum += p_[i];
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    std::ostringstream os;
    os.precision(17);
    os << "ProbVector: entries sum to " << sum << ", not 1";
    throw InputError(os.str());
  }
}

std::vector<double> ProbVector::sorted() const {
  std::vector<double> s = p_;
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

ProbVector ProbVector::padded(std::size_t n) const {
  if (n < p_.size()) throw InputError("ProbVector::padded: target shorter than vector");
  std::vector<double> q = p_;
  q.resize(n, 0.0);
  return ProbVector(std::move(q));
}

ColumnStochasticMatrix::ColumnStochasticMatrix(Mat d, double col_tol) : d_(std::move(d)) {
  validate_entries(col_tol);
  for (Eigen::Index k = 0; k < d_.cols(); ++k) {
    const double s = d_.col(k).sum();
    if (std::abs(s - 1.0) > col_tol) {
      std::ostringstream os;
      os.precision(17);
      os << "ColumnStochasticMatrix: column " << k << " sums to " << s;
      throw InputError(os.str());
    }
  }
  deficit_ = Vec::Zero(d_.cols());
}

ColumnStochasticMatrix ColumnStochasticMatrix::truncated(Mat d, const Vec& max_deficit) {
  ColumnStochasticMatrix m;
  m.d_ = std::move(d);
  if (max_deficit.size() != m.d_.cols())
    throw InputError("ColumnStochasticMatrix::truncated: one deficit bound per column required");
  m.validate_entries(1e-10);
  m.deficit_ = Vec(m.d_.cols());
  for (Eigen::Index k = 0; k < m.d_.cols(); ++k) {
    const double short_by = 1.0 - m.d_.col(k).sum();
    if (short_by < -1e-10 || short_by > max_deficit(k) + 1e-10) {
      std::ostringstream os;
      os.precision(17);
      os << "ColumnStochasticMatrix: column " << k << " is short of 1 by " << short_by
         << ", allowed [0, " << max_deficit(k) << "]";
      throw InputError(os.str());
    }
    m.deficit_(k) = std::max(0.0, short_by);
  }
  return m;
}

void ColumnStochasticMatrix::validate_entries(double tol) const {
  if (d_.size() == 0) throw InputError("ColumnStochasticMatrix: empty matrix");
  if (!d_.allFinite()) throw InputError("ColumnStochasticMatrix: non-finite entry");
  if (d_.minCoeff() < 0.0) throw InputError("ColumnStochasticMatrix: negative entry");
  for (Eigen::Index i = 0; i < d_.rows(); ++i)
    if (d_.row(i).sum() > 1.0 + tol)
      throw InputError("ColumnStochasticMatrix: row " + std::to_string(i) + " sums above 1");
}

bool majorizes(const ProbVector& p, const ProbVector& q) {
  const std::size_t n = std::max(p.size(), q.size());
  const auto ps = p.padded(n).sorted();
  const auto qs = q.padded(n).sorted();
  double sp = 0.0;
  double sq = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    sp += ps[m];
    sq += qs[m];
    if (sp < sq - 1e-12) return false;
  }
  return true;
}

const std::vector<ConcaveFunction>& concave_family() {
  static const std::vector<ConcaveFunction> family = {
      {"entropy", [](double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }},
      {"sqrt", [](double x) { return std::sqrt(x); }},
      {"neg_square", [](double x) { return -x * x; }},
      {"log1p", [](double x) { return std::log1p(x); }},
  };
  return family;
}

bool concave_sum_check(const ProbVector& p, const ProbVector& q) {
  const std::size_t n = std::max(p.size(), q.size());
  const auto pp = p.padded(n).values();
  const auto qq = q.padded(n).values();
  for (const auto& f : concave_family()) {
    double hp = 0.0;
    double hq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      hp += f.h(pp[i]);
      hq += f.h(qq[i]);
    }
    if (hp > hq + 1e-10) return false;
  }
  return true;
}

double shannon_entropy(const ProbVector& p) {
  double h = 0.0;
  for (double x : p.values())
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

ProbVector apply_column_stochastic(const ColumnStochasticMatrix& D, const ProbVector& p) {
  const Mat& d = D.matrix();
  if (d.cols() != static_cast<Eigen::Index>(p.size())) {
    std::ostringstream os;
    os << "apply_column_stochastic: D has " << d.cols() << " columns, p has " << p.size()
       << " entries";
    throw InputError(os.str());
  }
  const Vec pv = Eigen::Map<const Vec>(p.values().data(), static_cast<Eigen::Index>(p.size()));
  const double leak = D.column_deficits().dot(pv);
  if (leak > 1e-10) {
    std::ostringstream os;
    os << "apply_column_stochastic: truncated D loses mass " << leak;
    throw NumericalError(os.str());
  }
  const Vec q = d * pv;
  return ProbVector(std::vector<double>(q.data(), q.data() + q.size()));
}

int tmsv_schmidt_size(double lambda, double tail) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InputError("tmsv_schmidt_size: requires 0 <= lambda < 1");
  if (lambda == 0.0) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tail) / (2.0 * std::log(lambda)))));
}

ProbVector tmsv_schmidt_vector(double lambda, int size) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw InputError("tmsv_schmidt_vector: requires 0 <= lambda < 1");
  if (size < 1) throw InputError("tmsv_schmidt_vector: size must be >= 1");
  const double l2 = lambda * lambda;
  const double tail = std::pow(l2, size);
  if (tail > 1e-10) {
    std::ostringstream os;
    os << "tmsv_schmidt_vector: size " << size << " leaves tail mass " << tail;
    throw NumericalError(os.str());
  }
  std::vector<double> p(size);
  double pw = 1.0;
  for (int n = 0; n < size; ++n) {
    p[n] = (1.0 - l2) * pw;
    pw *= l2;
  }
  return ProbVector(std::move(p));
}

ColumnStochasticMatrix tmsv_degradation_matrix(double lambda, double lambda_prime, int size) {
  if (!(lambda_prime >= 0.0 && lambda_prime < lambda && lambda < 1.0)) {
    std::ostringstream os;
    os << "tmsv_degradation_matrix: requires 0 <= lambda' < lambda < 1 (got lambda' = "
       << lambda_prime << ", lambda = " << lambda << ")";
    throw InputError(os.str());
  }
  if (size < 2) throw InputError("tmsv_degradation_matrix: size must be >= 2");
  const double l2 = lambda * lambda;
  const double lp2 = lambda_prime * lambda_prime;
  const double pre = (1.0 - l2) / (1.0 - lp2);
  Vec first(size);
  first(0) = pre;
  double pw = 1.0;  // l^{2(n-1)}
  for (int n = 1; n < size; ++n) {
    first(n) = pre * (l2 - lp2) * pw;
    pw *= l2;
  }
  Mat d = Mat::Zero(size, size);
  for (int k = 0; k < size; ++k) d.col(k).tail(size - k) = first.head(size - k);
  // Column k keeps entries n = 0 .. size-1-k of the first column.
  Vec bound(size);
  for (int k = 0; k < size; ++k)
    bound(k) = (l2 - lp2) / (1.0 - lp2) * std::pow(l2, size - 1 - k);
  return ColumnStochasticMatrix::truncated(std::move(d), bound);
}

bool nielsen_transformable(const ProbVector& schmidt_psi, const ProbVector& schmidt_phi) {
  return majorizes(schmidt_phi, schmidt_psi);
}

bool ensemble_realizable(const ProbVector& eigenvalues, const ProbVector& weights) {
  return majorizes(eigenvalues, weights);
}

}  // namespace cvtk
