#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cvtk/errors.hpp"
#include "cvtk/fock.hpp"
#include "cvtk/phase_space.hpp"
#include "cvtk/unitaries.hpp"
#include "support.hpp"

using namespace cvtk;
namespace ts = testing_support;
using std::numbers::pi;

TEST_CASE("omega: block structure and algebraic identities") {
  const Mat o1 = omega_matrix(1);
  CHECK(o1(0, 0) == 0.0);
  CHECK(o1(0, 1) == 1.0);
  CHECK(o1(1, 0) == -1.0);
  CHECK(o1(1, 1) == 0.0);
  for (int n = 1; n <= 4; ++n) {
    const Mat o = omega_matrix(n);
    CHECK(o == ts::omega_oracle(n));
    CHECK((o + o.transpose()).isZero(0.0));
    CHECK((o * o + Mat::Identity(2 * n, 2 * n)).isZero(0.0));
    CHECK((o * o.transpose() - Mat::Identity(2 * n, 2 * n)).isZero(0.0));
  }
  CHECK(omega(2).n_modes() == 2);
  CHECK_THROWS_AS(omega(0), InputError);
}

TEST_CASE("quadrature commutator: [X, P] = 2i on the untruncated block") {
  const int cutoff = 12;
  const auto [a, ad] = fock::ladder_ops(cutoff);
  const CMat x = (a + ad).cast<Complex>();
  const CMat p = Complex(0, -1) * (a - ad).cast<Complex>();
  const CMat comm = x * p - p * x;
  for (int n = 0; n < cutoff; ++n) CHECK(std::abs(comm(n, n) - Complex(0, 2)) < 1e-12);
  // Vacuum variance of X is 1.
  CHECK(std::abs((x * x)(0, 0) - 1.0) < 1e-14);
}

TEST_CASE("is_physical: vacuum, sub-vacuum and squeezed covariances") {
  CHECK(is_physical(GaussianState::vacuum()).physical);
  const GaussianState sub(Vec::Zero(2), 0.5 * Mat::Identity(2, 2));
  const auto rep = is_physical(sub);
  CHECK_FALSE(rep.physical);
  CHECK(rep.min_eigenvalue == doctest::Approx(-0.5).epsilon(1e-12));
  REQUIRE(rep.symplectic_spectrum.size() == 1);
  CHECK(rep.symplectic_spectrum[0] == doctest::Approx(0.5));
  CHECK_THROWS_AS(require_physical(sub), PhysicalityError);
  for (double r : {-2.0, -0.3, 0.0, 0.7, 3.0}) {
    const auto sq = GaussianState::squeezed(r);
    CHECK(is_physical(sq).physical);
    CHECK(sq.cov().determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("GaussianState: rejects asymmetric covariance and symmetrizes within tolerance") {
  Mat v = Mat::Identity(2, 2);
  v(0, 1) = 0.1;
  CHECK_THROWS_AS(GaussianState(Vec::Zero(2), v), InputError);
  v(0, 1) = 1e-11;
  const GaussianState s(Vec::Zero(2), v);
  CHECK(s.cov()(0, 1) == s.cov()(1, 0));
  CHECK_THROWS_AS(GaussianState(Vec::Zero(3), Mat::Identity(3, 3)), InputError);
  CHECK_THROWS_AS(GaussianState(Vec::Zero(2), Mat::Identity(4, 4)), InputError);
}

TEST_CASE("symplectic spectrum is at least 1 for random physical states") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 3;
    const auto nu = ts::random_spectrum(n, rng);
    const Mat s = ts::random_symplectic(n, rng);
    const Mat v = s * ts::diag_modes(nu) * s.transpose();
    const auto got = symplectic_spectrum(0.5 * (v + v.transpose()));
    const auto oracle = ts::spectrum_oracle(v);
    for (int k = 0; k < n; ++k) {
      CHECK(got[k] >= 1.0 - 1e-9);
      CHECK(std::abs(got[k] - oracle[k]) < 1e-8 * oracle[k]);
      CHECK(std::abs(got[k] - nu[k]) < 1e-8 * nu[k]);
    }
  }
}

TEST_CASE("mean photon number: vacuum, thermal, squeezed, coherent") {
  CHECK(mean_photon_number(GaussianState::vacuum()) == doctest::Approx(0.0));
  for (double nbar : {0.0, 0.5, 3.0})
    CHECK(mean_photon_number(GaussianState::thermal(nbar)) == doctest::Approx(nbar).epsilon(1e-14));
  for (double r : {0.2, 1.0, 1.7})
    CHECK(mean_photon_number(GaussianState::squeezed(r)) == doctest::Approx(std::sinh(r) * std::sinh(r)).epsilon(1e-13));
  const Complex alpha(0.6, -1.1);
  CHECK(mean_photon_number(GaussianState::coherent(alpha)) == doctest::Approx(std::norm(alpha)).epsilon(1e-14));
  CHECK(mean_photon_number(GaussianState::tmsv(0.8)) == doctest::Approx(2 * std::pow(std::sinh(0.8), 2)).epsilon(1e-13));
}

TEST_CASE("characteristic function: normalization, vacuum value, thermal phase") {
  std::mt19937_64 rng(3);
  const GaussianState states[] = {GaussianState::vacuum(), GaussianState::coherent(1.0, -2.0),
                                  GaussianState::thermal(0.7), GaussianState::tmsv(0.5)};
  for (const auto& s : states) {
    CHECK(std::abs(characteristic_fn(s, PhasePoint(Vec::Zero(2 * s.n_modes()))) - 1.0) < 1e-15);
    std::normal_distribution<double> g(0.0, 1.5);
    for (int i = 0; i < 20; ++i) {
      Vec pt(2 * s.n_modes());
      for (auto& c : pt) c = g(rng);
      CHECK(std::abs(characteristic_fn(s, PhasePoint(pt))) <= 1.0 + 1e-15);
    }
  }
  CHECK(std::abs(characteristic_fn(GaussianState::vacuum(), {2.0, 0.0}) - std::exp(-0.5)) < 1e-15);
  const Complex th = characteristic_fn(GaussianState::thermal(1.3), {0.4, -0.9});
  CHECK(th.imag() == 0.0);
  CHECK(th.real() > 0.0);
  CHECK_THROWS_AS(characteristic_fn(GaussianState::vacuum(), {1.0, 2.0, 3.0, 4.0}), InputError);
}

TEST_CASE("characteristic function is the Fourier transform of the Wigner function") {
  const GaussianState s(Vec{{0.7, -0.4}}, Mat{{1.8, 0.3}, {0.3, 1.2}});
  const Mat o = omega_matrix(1);
  for (const Vec& k : {Vec{{0.5, 0.2}}, Vec{{-1.0, 0.8}}, Vec{{0.0, 2.0}}}) {
    const auto part = [&](double x, double p, bool imag) {
      const Vec r{{x, p}};
      const Complex z = wigner_fn(s, PhasePoint(r)) * std::exp(Complex(0, -0.5) * k.dot(o * r));
      return imag ? z.imag() : z.real();
    };
    const auto integral = [&](bool imag) {
      return ts::simpson([&](double x) { return ts::simpson([&](double p) { return part(x, p, imag); }, -12, 12, 480); },
                         -12, 12, 480);
    };
    const Complex chi = characteristic_fn(s, PhasePoint(k));
    CHECK(std::abs(Complex(integral(false), integral(true)) - chi) < 1e-8);
  }
}

TEST_CASE("characteristic function on the momentum axis is the position-density transform") {
  // chi(0, p) = int exp(i p x / 2) <x|rho|x> dx; for a coherent state with mean x0
  // this is exp(i p x0 / 2 - p^2 / 8).
  const double x0 = 1.3;
  for (double p : {0.4, -1.1, 2.5}) {
    const Complex want = std::exp(Complex(-p * p / 8.0, p * x0 / 2.0));
    CHECK(std::abs(characteristic_fn(GaussianState::coherent(x0, 0.7), {0.0, p}) - want) < 1e-14);
  }
}

TEST_CASE("Wigner function: peak values and normalization") {
  CHECK(wigner_fn(GaussianState::vacuum(), {0.0, 0.0}) == doctest::Approx(1.0 / (2 * pi)).epsilon(1e-15));
  CHECK(wigner_fn(GaussianState::vacuum(), {1.0, -0.5}) ==
        doctest::Approx(std::exp(-(1.0 + 0.25) / 2) / (2 * pi)).epsilon(1e-14));
  for (double nbar : {0.0, 1.0, 4.5})
    CHECK(wigner_fn(GaussianState::thermal(nbar), {0.0, 0.0}) ==
          doctest::Approx(1.0 / (2 * pi * (2 * nbar + 1))).epsilon(1e-14));
  CHECK(wigner_fn(GaussianState::coherent(1.5, -0.5), {1.5, -0.5}) == doctest::Approx(1.0 / (2 * pi)).epsilon(1e-14));
  // Normalization for nu up to 10.
  for (const auto& s : {GaussianState::thermal(4.5), GaussianState::squeezed(0.8), GaussianState::coherent(1.0, 2.0)}) {
    const double total = ts::simpson(
        [&](double x) { return ts::simpson([&](double p) { return wigner_fn(s, {x, p}); }, -30, 30, 600); }, -30,
        30, 600);
    CHECK(std::abs(total - 1.0) < 1e-6);
  }
  const GaussianState singular(Vec::Zero(2), Mat{{1.0, 1.0}, {1.0, 1.0}});
  CHECK_THROWS_AS(wigner_fn(singular, {0.0, 0.0}), NumericalError);
}

TEST_CASE("two-mode Wigner function matches the explicit Gaussian density") {
  const GaussianState s = GaussianState::tmsv(0.6);
  const Vec r{{0.3, -0.2, 0.5, 0.9}};
  const Mat v = s.cov();
  const double oracle = std::exp(-0.5 * r.dot(v.inverse() * r)) / (std::pow(2 * pi, 2) * std::sqrt(v.determinant()));
  CHECK(wigner_fn(s, PhasePoint(r)) == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("Wigner marginal over p equals the Fock position density") {
  // Single mode, nu <= 5, grid [-12, 12], step 0.01.
  const double r = -0.4, nbar = 1.5;  // p variance 4 e^{-0.8}: the p grid holds > 8 sigma
  const GaussianState g = apply(squeezer(r), GaussianState::thermal(nbar));
  const int cutoff = 120;
  fock::FockDensity rho = fock::thermal(nbar, cutoff);
  rho = fock::apply_gate({fock::GateKind::Squeezer, r}, std::vector<int>{0}, rho);
  double worst = 0.0;
  for (double x : {-3.0, -1.2, 0.0, 0.7, 2.5}) {
    const double marginal = ts::simpson([&](double p) { return wigner_fn(g, {x, p}); }, -12.0, 12.0, 2400);
    worst = std::max(worst, std::abs(marginal - fock::quadrature_density_fock(rho, x)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("partial trace: TMSV reduces to thermal, product states, index bookkeeping") {
  for (double r : {0.3, 1.0}) {
    const auto red = partial_trace(GaussianState::tmsv(r), {0});
    CHECK(ts::max_abs(red.cov() - std::cosh(2 * r) * Mat::Identity(2, 2)) < 1e-15);
  }
  const GaussianState a = GaussianState::squeezed(0.4);
  const GaussianState b = GaussianState::thermal(2.0);
  const auto keep_a = partial_trace(tensor(a, b), {0});
  CHECK(keep_a.cov() == a.cov());
  CHECK(keep_a.mean() == a.mean());

  std::mt19937_64 rng(5);
  const Mat s = ts::random_symplectic(3, rng);
  Vec m(6);
  m << 1, 2, 3, 4, 5, 6;
  const GaussianState three(m, s * s.transpose());
  const auto kept = partial_trace(three, {0, 2});
  const int idx[] = {0, 1, 4, 5};
  for (int i = 0; i < 4; ++i) {
    CHECK(kept.mean()(i) == m(idx[i]));
    for (int j = 0; j < 4; ++j) CHECK(kept.cov()(i, j) == three.cov()(idx[i], idx[j]));
  }
  // Nested traces compose.
  const auto nested = partial_trace(partial_trace(three, {0, 2}), {1});
  CHECK(nested.cov() == partial_trace(three, {2}).cov());
  CHECK_THROWS_AS(partial_trace(three, {}), InputError);
  CHECK_THROWS_AS(partial_trace(three, {3}), InputError);
  CHECK_THROWS_AS(partial_trace(three, {1, 1}), InputError);
}

TEST_CASE("partial trace agrees with the Fock-space partial trace") {
  const double r = 0.5;
  const auto g = partial_trace(GaussianState::tmsv(r), {1});
  const auto psi = fock::tmsv(r, 70);
  const int keep[] = {1};
  const auto red = fock::partial_trace_fock(psi, keep);
  const auto th = fock::thermal(std::sinh(r) * std::sinh(r), 70);
  CHECK(fock::trace_distance(red.rho, th.rho) < 1e-10);
  CHECK(g.cov()(0, 0) == doctest::Approx(2 * fock::mean_photon_number(red, 0) + 1).epsilon(1e-10));
}
