#include "cvtk/measurements.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cvtk/errors.hpp"
#include "cvtk/unitaries.hpp"

namespace cvtk {

namespace {

struct Split {
  Vec m_a, m_b;
  Mat v_a, v_b, c;  // c is the A-rows, B-columns block
};

Split split_modes(const GaussianState& state, int measured, const char* who) {
  const int n = state.n_modes();
  if (n < 2) throw InputError(std::string(who) + ": need at least two modes");
  if (measured < 0 || measured >= n)
    throw InputError(std::string(who) + ": measured mode " + std::to_string(measured) +
                     " out of range");
  std::vector<int> keep;
  for (int k = 0; k < n; ++k)
    if (k != measured) keep.push_back(k);
  const auto ia = quadrature_indices(keep);
  const int ib[2] = {2 * measured, 2 * measured + 1};
  const auto na = static_cast<Eigen::Index>(ia.size());
  Split s{Vec(na), Vec(2), Mat(na, na), Mat(2, 2), Mat(na, 2)};
  for (Eigen::Index i = 0; i < na; ++i) {
    s.m_a(i) = state.mean()(ia[i]);
    for (Eigen::Index j = 0; j < na; ++j) s.v_a(i, j) = state.cov()(ia[i], ia[j]);
    for (int j = 0; j < 2; ++j) s.c(i, j) = state.cov()(ia[i], ib[j]);
  }
  for (int i = 0; i < 2; ++i) {
    s.m_b(i) = state.mean()(ib[i]);
    for (int j = 0; j < 2; ++j) s.v_b(i, j) = state.cov()(ib[i], ib[j]);
  }
  return s;
}

GaussianState reduced(const GaussianState& state, int measured) {
  std::vector<int> keep;
  for (int k = 0; k < state.n_modes(); ++k)
    if (k != measured) keep.push_back(k);
  return partial_trace(state, keep);
}

}  // namespace

SignedGaussianMixture SignedGaussianMixture::single(GaussianState s) {
  SignedGaussianMixture m;
  m.weights.push_back(1.0);
  m.states.push_back(std::move(s));
  return m;
}

int SignedGaussianMixture::n_modes() const {
  if (states.empty()) throw InputError("SignedGaussianMixture: empty mixture");
  return states.front().n_modes();
}

double SignedGaussianMixture::wigner(const PhasePoint& r) const {
  if (states.empty()) throw InputError("SignedGaussianMixture: empty mixture");
  double w = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) w += weights[i] * wigner_fn(states[i], r);
  return w;
}

double SignedGaussianMixture::mean_photon_number() const {
  if (states.empty()) throw InputError("SignedGaussianMixture: empty mixture");
  double n = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) n += weights[i] * cvtk::mean_photon_number(states[i]);
  return n;
}

OffOutcome condition_on_gaussian_povm(const GaussianState& state, int measured) {
  const Split s = split_modes(state, measured, "condition_on_gaussian_povm");
  const Mat vb = s.v_b + Mat::Identity(2, 2);
  const Eigen::LLT<Mat> llt(vb);
  if (llt.info() != Eigen::Success)
    throw NumericalError("condition_on_gaussian_povm: V_B + I is not positive definite");
  const double p_off =
      2.0 / std::sqrt(vb.determinant()) * std::exp(-0.5 * s.m_b.dot(llt.solve(s.m_b)));
  const Mat gain = llt.solve(s.c.transpose()).transpose();  // C (V_B + I)^{-1}
  return {p_off, GaussianState(s.m_a - gain * s.m_b, s.v_a - gain * s.c.transpose())};
}

OnOffResult on_off_detect(const GaussianState& state, int measured) {
  const OffOutcome off = condition_on_gaussian_povm(state, measured);
  OnOffResult res;
  res.off.probability = off.p_off;
  res.off.conditional = SignedGaussianMixture::single(off.off_state);
  res.on.probability = 1.0 - off.p_off;
  if (res.on.probability > 1e-14) {
    const double inv = 1.0 / res.on.probability;
    res.on.conditional.weights = {inv, -off.p_off * inv};
    res.on.conditional.states = {reduced(state, measured), off.off_state};
  } else {
    res.on.probability = 0.0;
  }
  return res;
}

double negative_region_radius(double r) {
  if (!(r > 0.0)) throw InputError("negative_region_radius: requires r > 0");
  const double t2 = std::tanh(r) * std::tanh(r);
  // log1p(t2)/t2 -> 1 as t2 -> 0; the series avoids cancellation for tiny r.
  const double ratio = t2 < 1e-8 ? 1.0 - t2 / 2.0 : std::log1p(t2) / t2;
  return std::sqrt((1.0 + t2) * ratio);
}

HomodyneResult homodyne_x(const GaussianState& state, int measured, double x0) {
  const Split s = split_modes(state, measured, "homodyne_x");
  const double vxx = s.v_b(0, 0);
  if (!(vxx > 0.0)) {
    std::ostringstream os;
    os << "homodyne_x: measured X variance must be positive (got " << vxx << ")";
    throw NumericalError(os.str());
  }
  const double dx = x0 - s.m_b(0);
  const double density = std::exp(-0.5 * dx * dx / vxx) / std::sqrt(2.0 * std::numbers::pi * vxx);
  const Vec cx = s.c.col(0);
  return {density, GaussianState(s.m_a + cx * (dx / vxx), s.v_a - cx * cx.transpose() / vxx)};
}

HomodyneResult homodyne(const GaussianState& state, int measured, double phi, double x0) {
  if (measured < 0 || measured >= state.n_modes())
    throw InputError("homodyne: measured mode " + std::to_string(measured) + " out of range");
  const SymplecticOp rot = embed(rotation(phi), state.n_modes(), {measured});
  return homodyne_x(apply(rot, state), measured, x0);
}

double quadrature_density(const GaussianState& state, int mode, double phi, double x) {
  if (mode < 0 || mode >= state.n_modes())
    throw InputError("quadrature_density: mode " + std::to_string(mode) + " out of range");
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  const int i = 2 * mode;
  const double mean = c * state.mean()(i) + s * state.mean()(i + 1);
  const double var = c * c * state.cov()(i, i) + 2.0 * c * s * state.cov()(i, i + 1) +
                     s * s * state.cov()(i + 1, i + 1);
  if (!(var > 0.0)) throw NumericalError("quadrature_density: non-positive quadrature variance");
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace cvtk
