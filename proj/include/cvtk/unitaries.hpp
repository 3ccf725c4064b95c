#pragma once

// Gaussian unitaries as affine symplectic maps r -> S r + d, V -> S V S^T.

#include <span>
#include <vector>

#include "cvtk/phase_space.hpp"

namespace cvtk {

inline constexpr double kSymplecticTol = 1e-8;

struct SymplecticOp {
  Vec d;
  Mat S;

  int n_modes() const { return static_cast<int>(S.rows() / 2); }
  static SymplecticOp identity(int n_modes);
};

/// max |S Omega S^T - Omega|.
double symplectic_residual(const Mat& S);
bool is_symplectic(const Mat& S, double tol = kSymplecticTol);

SymplecticOp displacement(double x, double p);
/// Q(r) = diag(e^{-r}, e^{r}).
SymplecticOp squeezer(double r);
/// R(theta) = [[cos, sin], [-sin, cos]], i.e. X -> X cos + P sin.
SymplecticOp rotation(double theta);
/// B(beta): X1 -> X1 cos - X2 sin, X2 -> X1 sin + X2 cos; transmissivity cos^2.
SymplecticOp beam_splitter(double beta);
/// Q12(r) with diagonal blocks I cosh r and off-diagonal blocks -Z sinh r.
SymplecticOp two_mode_squeezer(double r);

/// Lifts a k-mode op onto the listed modes (0-based) of an n-mode system.
SymplecticOp embed(const SymplecticOp& op, int n_modes, std::span<const int> targets);
SymplecticOp embed(const SymplecticOp& op, int n_modes, std::initializer_list<int> targets);

/// Throws InputError on dimension mismatch or if S is not symplectic within tol.
GaussianState apply(const SymplecticOp& op, const GaussianState& state,
                    double tol = kSymplecticTol);

/// op2 after op1: S = S2 S1, d = S2 d1 + d2.
SymplecticOp compose(const SymplecticOp& op2, const SymplecticOp& op1);

/// S^{-1} = -Omega S^T Omega, d' = -S^{-1} d.
SymplecticOp inverse(const SymplecticOp& op);

bool is_passive(const SymplecticOp& op, double tol = 1e-10);

struct WilliamsonDecomposition {
  Mat W;
  std::vector<double> spectrum;  // one nu per mode, matching the column blocks of W
};

/// V = W diag(nu_1 I, ..., nu_N I) W^T with nu descending. Within a degenerate
/// group the remaining U(k) freedom is fixed so that W is as close as possible
/// to V^{1/2} diag(nu)^{-1/2}; in particular V = nu I gives W = I.
WilliamsonDecomposition williamson(const Mat& V);

/// Closed form for V = [[a I, c Z], [c Z, b I]]:
/// W = [[w+ I, w- Z], [w- Z, w+ I]], w+-^2 = ((a+b)/s +- 1)/2 with
/// s = sqrt((a+b)^2 - 4c^2) and sign(w-) = sign(c). The spectrum is returned
/// in mode order (nu-, nu+), nu+- = (s +- (b - a))/2.
WilliamsonDecomposition williamson_standard_form(double a, double b, double c);

struct EulerDecomposition {
  Mat K;
  Mat L;
  std::vector<double> squeeze_params;  // r_j >= 0, descending
};

/// S = K [Q(r_1) + ... + Q(r_N)] L with K, L orthogonal symplectic.
EulerDecomposition euler_decompose(const Mat& S);

/// Direct sum of Q(r_j).
Mat squeeze_block(const std::vector<double>& r);

}  // namespace cvtk
