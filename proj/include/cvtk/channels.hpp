#pragma once

// Gaussian channels: r -> K r + d, V -> K V K^T + N.

#include "cvtk/phase_space.hpp"
#include "cvtk/unitaries.hpp"

namespace cvtk {

struct GaussianChannel {
  Mat K;
  Mat N;
  Vec d;

  int n_modes() const { return static_cast<int>(K.rows() / 2); }
  static GaussianChannel identity(int n_modes);
  static GaussianChannel from_unitary(const SymplecticOp& op);
};

struct ChannelReport {
  bool valid = false;
  double min_eigenvalue = 0.0;  // of N + i Omega - i K Omega K^T
  // Single-mode cross-check: det N - (det K - 1)^2 and min eig N; NaN otherwise.
  // Up to tolerance, valid iff both are >= 0.
  double det_margin = 0.0;
  double min_noise_eigenvalue = 0.0;
};

/// Throws InputError on shape mismatch or non-symmetric N.
ChannelReport validate_channel(const GaussianChannel& ch, double tol = kPhysicalityTol);

/// Throws PhysicalityError for an invalid channel.
GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& state,
                            double tol = kPhysicalityTol);

/// Single-mode K = sqrt(tau) I, N = mu I. Requires tau >= 0, mu >= |tau - 1|.
GaussianChannel phase_insensitive(double tau, double mu);
/// (tau, mu) = (T, 1 - T), T in [0, 1].
GaussianChannel pure_loss(double T);
/// (tau, mu) = (G, G - 1), G >= 1.
GaussianChannel quantum_limited_amp(double G);

/// ch2 after ch1: (K2 K1, K2 N1 K2^T + N2, K2 d1 + d2).
GaussianChannel compose_channels(const GaussianChannel& ch2, const GaussianChannel& ch1);

struct PhaseInsensitiveParams {
  double tau = 1.0;
  double mu = 0.0;
};

/// Loss(T) followed by amplifier(G): tau = T G, mu = G(1 - T) + (G - 1).
/// The opposite order gives mu = 1 - 2T + T G instead.
PhaseInsensitiveParams compose_phase_insensitive(double loss_T, double amp_G);

struct LossAmpSplit {
  double T = 1.0;
  double G = 1.0;
};

/// Inverse of compose_phase_insensitive: G = (mu + tau + 1)/2, T = tau/G.
LossAmpSplit split_phase_insensitive(double tau, double mu);

/// Joint unitary on system modes followed by n_env environment modes, the
/// environment starting in vacuum: K = S_S, N = S_SE S_SE^T, d = system part.
GaussianChannel channel_from_dilation(const SymplecticOp& joint, int n_env);

/// Lifts a k-mode channel onto the listed modes of an n-mode system.
GaussianChannel embed(const GaussianChannel& ch, int n_modes, std::span<const int> targets);

}  // namespace cvtk
