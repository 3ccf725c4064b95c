#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cvtk/errors.hpp"
#include "cvtk/majorization.hpp"
#include "support.hpp"

using namespace cvtk;
namespace ts = testing_support;

namespace {

// p majorizes q iff sum_i max(p_i - t, 0) >= sum_i max(q_i - t, 0) for every t.
// Piecewise linear in t, so checking at the entries of both vectors suffices.
bool majorizes_oracle(const std::vector<double>& p, const std::vector<double>& q) {
  auto excess = [](const std::vector<double>& v, double t) {
    double s = 0.0;
    for (double x : v) s += std::max(x - t, 0.0);
    return s;
  };
  std::vector<double> ts = p;
  ts.insert(ts.end(), q.begin(), q.end());
  ts.push_back(0.0);
  for (double t : ts)
    if (excess(p, t) < excess(q, t) - 1e-12) return false;
  return true;
}

std::vector<double> random_simplex(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = e(rng);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

// Convex mixture of random permutation matrices: doubly stochastic by construction.
Mat random_doubly_stochastic(int n, std::mt19937_64& rng) {
  const auto w = random_simplex(4, rng);
  Mat d = Mat::Zero(n, n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (double wk : w) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int j = 0; j < n; ++j) d(perm[j], j) += wk;
  }
  return d;
}

}  // namespace

TEST_CASE("ProbVector validation and accessors") {
  const ProbVector p({0.2, 0.5, 0.3});
  CHECK(p.sorted() == std::vector<double>{0.5, 0.3, 0.2});
  CHECK(p.padded(5).size() == 5);
  CHECK(p.padded(5)[4] == 0.0);
  CHECK(ProbVector({1.0 + 1e-11, -1e-13}).values()[1] == 0.0);
  CHECK_THROWS_AS(ProbVector({}), InputError);
  CHECK_THROWS_AS(ProbVector({0.6, 0.6}), InputError);
  CHECK_THROWS_AS(ProbVector({1.1, -0.1}), InputError);
  CHECK_THROWS_AS(ProbVector({NAN, 1.0}), InputError);
  CHECK_THROWS_AS(p.padded(2), InputError);
}

TEST_CASE("majorizes: textbook examples") {
  const ProbVector pure({1.0}), uniform3({1.0 / 3, 1.0 / 3, 1.0 / 3});
  const ProbVector mid({0.5, 0.25, 0.25}), other({0.4, 0.4, 0.2});
  CHECK(majorizes(pure, uniform3));
  CHECK_FALSE(majorizes(uniform3, pure));
  CHECK(majorizes(mid, uniform3));
  CHECK(majorizes(mid, mid));
  CHECK_FALSE(majorizes(mid, other));
  CHECK_FALSE(majorizes(other, mid));
  CHECK(majorizes(ProbVector({0.0, 1.0}), ProbVector({0.3, 0.7})));
  CHECK(majorizes(ProbVector({0.5, 0.5}), ProbVector({0.25, 0.25, 0.25, 0.25})));
}

TEST_CASE("majorizes agrees with the threshold oracle on random pairs") {
  std::mt19937_64 rng(4);
  int positive = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_simplex(2 + i % 4, rng);
    auto q = random_simplex(2 + (i / 4) % 4, rng);
    if (i % 2 == 0 && q.size() == p.size()) {
      const Mat d = random_doubly_stochastic(static_cast<int>(p.size()), rng);
      const Vec qv = d * Eigen::Map<const Vec>(p.data(), p.size());
      q.assign(qv.data(), qv.data() + qv.size());
    }
    const bool m = majorizes(ProbVector(p), ProbVector(q));
    CHECK(m == majorizes_oracle(p, q));
    positive += m;
  }
  CHECK(positive > 100);
}

TEST_CASE("majorization is reflexive and transitive along doubly stochastic chains") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const int n = 2 + i % 6;
    const auto p = random_simplex(n, rng);
    const ProbVector pv(p);
    const ProbVector qv = apply_column_stochastic(ColumnStochasticMatrix(random_doubly_stochastic(n, rng)), pv);
    const ProbVector rv = apply_column_stochastic(ColumnStochasticMatrix(random_doubly_stochastic(n, rng)), qv);
    CHECK(majorizes(pv, pv));
    CHECK(majorizes(pv, qv));
    CHECK(majorizes(qv, rv));
    CHECK(majorizes(pv, rv));
    CHECK(concave_sum_check(pv, qv));
    CHECK(concave_sum_check(pv, rv));
    CHECK(shannon_entropy(pv) <= shannon_entropy(rv) + 1e-12);
  }
}

TEST_CASE("concave sums are necessary for majorization") {
  CHECK(concave_family().size() == 4);
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const ProbVector p(random_simplex(4, rng)), q(random_simplex(4, rng));
    if (majorizes(p, q)) {
      CHECK(concave_sum_check(p, q));
      ++checked;
    }
    if (!concave_sum_check(p, q)) CHECK_FALSE(majorizes(p, q));
  }
  CHECK(checked > 10);
  const ProbVector pure({1.0, 0.0}), flat({0.5, 0.5});
  CHECK(concave_sum_check(pure, flat));
  CHECK_FALSE(concave_sum_check(flat, pure));
}

TEST_CASE("Shannon entropy of simple and TMSV Schmidt vectors") {
  CHECK(shannon_entropy(ProbVector({1.0})) == 0.0);
  CHECK(shannon_entropy(ProbVector({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  for (double r : {0.3, 1.0, 1.8}) {
    const double l = std::tanh(r);
    const auto p = tmsv_schmidt_vector(l, tmsv_schmidt_size(l, 1e-14));
    CHECK(shannon_entropy(p) == doctest::Approx(ts::tmsv_entropy_nats(r)).epsilon(1e-9));
  }
}

TEST_CASE("ColumnStochasticMatrix validation") {
  Mat perm(3, 3);
  perm << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  const ColumnStochasticMatrix d(perm);
  CHECK(d.column_deficits().isZero(0.0));
  Mat shortcol = perm;
  shortcol(2, 0) = 0.9;
  CHECK_THROWS_AS(ColumnStochasticMatrix{shortcol}, InputError);
  Mat neg = perm;
  neg(0, 0) = -0.1;
  neg(2, 0) = 1.1;
  CHECK_THROWS_AS(ColumnStochasticMatrix{neg}, InputError);
  Mat heavy(2, 2);
  heavy << 1, 1, 0, 0;
  CHECK_THROWS_AS(ColumnStochasticMatrix{heavy}, InputError);
  Vec bound(3);
  bound << 0.2, 0.0, 0.0;
  const auto t = ColumnStochasticMatrix::truncated(shortcol, bound);
  CHECK(t.column_deficits()(0) == doctest::Approx(0.1));
  bound(0) = 0.05;
  CHECK_THROWS_AS(ColumnStochasticMatrix::truncated(shortcol, bound), InputError);
  CHECK_THROWS_AS(ColumnStochasticMatrix::truncated(shortcol, Vec::Zero(2)), InputError);
}

TEST_CASE("apply_column_stochastic: permutation, averaging, leak guard") {
  const ProbVector p({0.6, 0.3, 0.1});
  Mat perm(3, 3);
  perm << 0, 1, 0, 0, 0, 1, 1, 0, 0;
  const auto q = apply_column_stochastic(ColumnStochasticMatrix(perm), p);
  CHECK(q.values() == std::vector<double>{0.3, 0.1, 0.6});
  CHECK(majorizes(q, p));
  const auto u = apply_column_stochastic(ColumnStochasticMatrix(Mat::Constant(3, 3, 1.0 / 3)), p);
  for (double x : u.values()) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(majorizes(p, u));
  CHECK_THROWS_AS(apply_column_stochastic(ColumnStochasticMatrix(Mat::Identity(2, 2)), p), InputError);
  Mat lossy = Mat::Identity(3, 3);
  lossy(2, 2) = 0.5;
  Vec bound = Vec::Constant(3, 0.5);
  CHECK_THROWS_AS(apply_column_stochastic(ColumnStochasticMatrix::truncated(lossy, bound), p), NumericalError);
}

TEST_CASE("TMSV Schmidt vectors: closed form, sizing, tail guard") {
  const double l = std::tanh(0.8);
  const int n = tmsv_schmidt_size(l);
  CHECK(std::pow(l, 2 * n) < 1e-12);
  CHECK(std::pow(l, 2 * (n - 1)) >= 1e-12);
  const auto p = tmsv_schmidt_vector(l, n);
  for (int k : {0, 3, 10}) CHECK(p[k] == doctest::Approx((1 - l * l) * std::pow(l, 2 * k)).epsilon(1e-12));
  CHECK(tmsv_schmidt_vector(0.0, 1)[0] == 1.0);
  CHECK_THROWS_AS(tmsv_schmidt_vector(l, 5), NumericalError);
  CHECK_THROWS_AS(tmsv_schmidt_vector(1.0, 5), InputError);
  CHECK_THROWS_AS(tmsv_schmidt_size(-0.1), InputError);
}

TEST_CASE("degradation matrix maps p(l') to p(l) within the truncation bound") {
  for (auto [r, rp] : {std::pair{1.0, 0.5}, std::pair{0.7, 0.0}, std::pair{1.5, 1.4}}) {
    const double l = std::tanh(r), lp = std::tanh(rp);
    const int n = tmsv_schmidt_size(l);
    const auto d = tmsv_degradation_matrix(l, lp, n);
    const Mat& m = d.matrix();
    CHECK(m(0, 0) == doctest::Approx((1 - l * l) / (1 - lp * lp)).epsilon(1e-14));
    CHECK(m(0, 1) == 0.0);
    for (int k = 0; k < n; ++k) {
      const double want = (l * l - lp * lp) / (1 - lp * lp) * std::pow(l, 2 * (n - 1 - k));
      CHECK(std::abs(d.column_deficits()(k) - want) < 1e-14);
    }
    const auto src = tmsv_schmidt_vector(lp, n);
    const auto out = apply_column_stochastic(d, src);
    const auto want = tmsv_schmidt_vector(l, n);
    double worst = 0.0;
    for (int k = 0; k < n; ++k) worst = std::max(worst, std::abs(out[k] - want[k]));
    CHECK(worst < 1e-12);
    CHECK(majorizes(src, out));
  }
  CHECK_THROWS_AS(tmsv_degradation_matrix(0.3, 0.5, 10), InputError);
  CHECK_THROWS_AS(tmsv_degradation_matrix(0.5, 0.5, 10), InputError);
  CHECK_THROWS_AS(tmsv_degradation_matrix(0.5, 0.3, 1), InputError);
}

TEST_CASE("Nielsen: TMSV can be degraded by LOCC but not enhanced") {
  const double rs[] = {0.0, 0.2, 0.5, 0.9, 1.4};
  const int n = tmsv_schmidt_size(std::tanh(1.4));
  for (double r : rs)
    for (double rp : rs) {
      const auto psi = tmsv_schmidt_vector(std::tanh(r), n);
      const auto phi = tmsv_schmidt_vector(std::tanh(rp), n);
      CHECK(nielsen_transformable(psi, phi) == (rp <= r));
    }
  // Product to anything is impossible unless the target is also a product.
  CHECK_FALSE(nielsen_transformable(ProbVector({1.0}), ProbVector({0.5, 0.5})));
  CHECK(nielsen_transformable(ProbVector({0.5, 0.5}), ProbVector({1.0})));
  // Incomparable Schmidt vectors: neither direction works.
  const ProbVector a({0.5, 0.25, 0.25}), b({0.4, 0.4, 0.2});
  CHECK_FALSE(nielsen_transformable(a, b));
  CHECK_FALSE(nielsen_transformable(b, a));
}

TEST_CASE("ensemble realizability") {
  const ProbVector maxmix({0.5, 0.5});
  CHECK(ensemble_realizable(maxmix, ProbVector({0.5, 0.5})));
  CHECK(ensemble_realizable(maxmix, ProbVector({0.25, 0.25, 0.25, 0.25})));
  CHECK(ensemble_realizable(maxmix, ProbVector({0.5, 0.3, 0.2})));
  CHECK_FALSE(ensemble_realizable(maxmix, ProbVector({0.7, 0.3})));
  CHECK_FALSE(ensemble_realizable(maxmix, ProbVector({1.0})));
  const ProbVector pure({1.0});
  CHECK(ensemble_realizable(pure, ProbVector({1.0})));
  // Repeating the same pure vector realizes any weights.
  CHECK(ensemble_realizable(pure, ProbVector({0.9, 0.1})));
}
