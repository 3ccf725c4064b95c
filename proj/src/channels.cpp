#include "cvtk/channels.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "cvtk/errors.hpp"

namespace cvtk {

namespace {

void require_channel_shape(const GaussianChannel& ch, const char* who) {
  const auto n = ch.K.rows();
  if (n == 0 || n % 2 != 0 || ch.K.cols() != n || ch.N.rows() != n || ch.N.cols() != n ||
      ch.d.size() != n)
    throw InputError(std::string(who) + ": malformed channel (K, N must be 2N x 2N, d length 2N)");
}

}  // namespace

GaussianChannel GaussianChannel::identity(int n_modes) {
  if (n_modes < 1) throw InputError("identity channel: n_modes must be >= 1");
  const int dim = 2 * n_modes;
  return {Mat::Identity(dim, dim), Mat::Zero(dim, dim), Vec::Zero(dim)};
}

GaussianChannel GaussianChannel::from_unitary(const SymplecticOp& op) {
  const auto dim = op.S.rows();
  return {op.S, Mat::Zero(dim, dim), op.d};
}

ChannelReport validate_channel(const GaussianChannel& ch, double tol) {
  require_channel_shape(ch, "validate_channel");
  if ((ch.N - ch.N.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, ch.N.cwiseAbs().maxCoeff()))
    throw InputError("validate_channel: N is not symmetric");
  const int n = ch.n_modes();
  const Mat om = omega_matrix(n);
  const Mat ns = 0.5 * (ch.N + ch.N.transpose());
  const CMat m = ns.cast<Complex>() +
                 Complex(0.0, 1.0) * (om - ch.K * om * ch.K.transpose()).cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMat> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("validate_channel: eigen-decomposition failed");

  ChannelReport rep;
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  rep.valid = rep.min_eigenvalue >= -tol;
  if (n == 1) {
    const double dk = ch.K.determinant();
    rep.det_margin = ns.determinant() - (dk - 1.0) * (dk - 1.0);
    Eigen::SelfAdjointEigenSolver<Mat> en(ns, Eigen::EigenvaluesOnly);
    rep.min_noise_eigenvalue = en.eigenvalues().minCoeff();
  } else {
    rep.det_margin = std::numeric_limits<double>::quiet_NaN();
    rep.min_noise_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& state, double tol) {
  const auto rep = validate_channel(ch, tol);
  if (!rep.valid) {
    std::ostringstream os;
    os << "apply_channel: N + i Omega - i K Omega K^T has eigenvalue " << rep.min_eigenvalue;
    throw PhysicalityError(os.str());
  }
  if (ch.n_modes() != state.n_modes()) {
    std::ostringstream os;
    os << "apply_channel: channel acts on " << ch.n_modes() << " mode(s), state has "
       << state.n_modes();
    throw InputError(os.str());
  }
  return {ch.K * state.mean() + ch.d, ch.K * state.cov() * ch.K.transpose() + ch.N};
}

GaussianChannel phase_insensitive(double tau, double mu) {
  if (!(tau >= 0.0)) throw InputError("phase_insensitive: requires tau >= 0");
  if (!(mu >= std::abs(tau - 1.0) - 1e-12)) {
    std::ostringstream os;
    os << "phase_insensitive: requires mu >= |tau - 1| (mu = " << mu << ", |tau - 1| = "
       << std::abs(tau - 1.0) << ")";
    throw InputError(os.str());
  }
  return {std::sqrt(tau) * Mat::Identity(2, 2), mu * Mat::Identity(2, 2), Vec::Zero(2)};
}

GaussianChannel pure_loss(double T) {
  if (!(T >= 0.0 && T <= 1.0)) throw InputError("pure_loss: requires 0 <= T <= 1");
  return phase_insensitive(T, 1.0 - T);
}

GaussianChannel quantum_limited_amp(double G) {
  if (!(G >= 1.0)) throw InputError("quantum_limited_amp: requires G >= 1");
  return phase_insensitive(G, G - 1.0);
}

GaussianChannel compose_channels(const GaussianChannel& ch2, const GaussianChannel& ch1) {
  require_channel_shape(ch1, "compose_channels");
  require_channel_shape(ch2, "compose_channels");
  if (ch1.K.rows() != ch2.K.rows()) throw InputError("compose_channels: mode count mismatch");
  return {ch2.K * ch1.K, ch2.K * ch1.N * ch2.K.transpose() + ch2.N, ch2.K * ch1.d + ch2.d};
}

PhaseInsensitiveParams compose_phase_insensitive(double loss_T, double amp_G) {
  if (!(loss_T >= 0.0 && loss_T <= 1.0))
    throw InputError("compose_phase_insensitive: requires 0 <= T <= 1");
  if (!(amp_G >= 1.0)) throw InputError("compose_phase_insensitive: requires G >= 1");
  return {loss_T * amp_G, amp_G * (1.0 - loss_T) + (amp_G - 1.0)};
}

LossAmpSplit split_phase_insensitive(double tau, double mu) {
  if (!(tau >= 0.0) || !(mu >= std::abs(tau - 1.0) - 1e-12))
    throw InputError("split_phase_insensitive: requires tau >= 0 and mu >= |tau - 1|");
  const double g = 0.5 * (mu + tau + 1.0);
  return {std::min(1.0, tau / g), g};
}

GaussianChannel channel_from_dilation(const SymplecticOp& joint, int n_env) {
  const auto dim = joint.S.rows();
  if (n_env < 1 || dim % 2 != 0 || 2 * n_env >= dim || joint.S.cols() != dim || joint.d.size() != dim)
    throw InputError("channel_from_dilation: joint op must cover at least one system mode plus n_env");
  const double res = symplectic_residual(joint.S);
  if (res > kSymplecticTol) {
    std::ostringstream os;
    os << "channel_from_dilation: joint matrix is not symplectic (residual " << res << ")";
    throw InputError(os.str());
  }
  const auto ns = dim - 2 * n_env;
  const Mat s_se = joint.S.block(0, ns, ns, 2 * n_env);
  return {joint.S.topLeftCorner(ns, ns), s_se * s_se.transpose(), joint.d.head(ns)};
}

GaussianChannel embed(const GaussianChannel& ch, int n_modes, std::span<const int> targets) {
  require_channel_shape(ch, "embed");
  if (static_cast<int>(targets.size()) != ch.n_modes())
    throw InputError("embed: target count does not match channel mode count");
  std::set<int> seen;
  for (int t : targets) {
    if (t < 0 || t >= n_modes)
      throw InputError("embed: target mode " + std::to_string(t) + " out of range");
    if (!seen.insert(t).second)
      throw InputError("embed: target mode " + std::to_string(t) + " repeated");
  }
  GaussianChannel out = GaussianChannel::identity(n_modes);
  const auto idx = quadrature_indices(targets);
  const auto k = static_cast<Eigen::Index>(idx.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    out.d(idx[i]) = ch.d(i);
    for (Eigen::Index j = 0; j < k; ++j) {
      out.K(idx[i], idx[j]) = ch.K(i, j);
      out.N(idx[i], idx[j]) = ch.N(i, j);
    }
  }
  return out;
}

}  // namespace cvtk
