#pragma once

// Truncated Fock-space engine, independent of the phase-space code paths.
//
// Multi-mode states use a uniform cutoff d - 1 per mode and index
// |n_0, n_1, ..., n_{M-1}> -> n_0 d^{M-1} + ... + n_{M-1} (mode 0 slowest),
// i.e. operators on mode k enter as I (x) ... (x) op (x) ... (x) I.

#include <span>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "cvtk/entanglement.hpp"
#include "cvtk/phase_space.hpp"

namespace cvtk::fock {

using SparseC = Eigen::SparseMatrix<Complex>;

inline constexpr double kPureTailBudget = 1e-12;
inline constexpr double kThermalTailBudget = 1e-10;

struct FockPure {
  int cutoff = 0;
  int n_modes = 1;
  CVec amp;
  double deficit = 0.0;  // 1 - norm^2 lost to truncation

  int levels() const { return cutoff + 1; }
};

struct FockDensity {
  int cutoff = 0;
  int n_modes = 1;
  CMat rho;
  double deficit = 0.0;  // 1 - trace lost to truncation

  int levels() const { return cutoff + 1; }
};

FockDensity to_density(const FockPure& psi);
FockPure tensor(const FockPure& a, const FockPure& b);
FockDensity tensor(const FockDensity& a, const FockDensity& b);

/// a (sub-diagonal sqrt(n)) and a^dag on levels 0 .. cutoff.
std::pair<Mat, Mat> ladder_ops(int cutoff);

FockPure vacuum(int n_modes, int cutoff);
FockPure number_state(int n, int cutoff);
/// e^{-|alpha|^2/2} alpha^n / sqrt(n!).
FockPure coherent(Complex alpha, int cutoff, double budget = kPureTailBudget);
/// S(r)|0> = exp(r/2 a^2 - r/2 a^dag^2)|0>: amplitude of |2n> is
/// (-tanh r)^n sqrt((2n)!) / (2^n n! sqrt(cosh r)).
FockPure squeezed_vacuum(double r, int cutoff, double budget = kPureTailBudget);
/// S12(r)|0,0> = sum_n (-tanh r)^n / cosh r |n, n>.
FockPure tmsv(double r, int cutoff, double budget = kPureTailBudget);
/// Diagonal Bose-Einstein weights nbar^n / (1 + nbar)^{n+1}.
FockDensity thermal(double nbar, int cutoff, double budget = kThermalTailBudget);

enum class GateKind { Displacement, Squeezer, Rotation, BeamSplitter, TwoModeSqueezer };

/// Displacement: alpha = (x + i p)/2 from (p1, p2) = (x, p).
/// Squeezer r, Rotation theta, BeamSplitter beta, TwoModeSqueezer r: p1 only.
struct Gate {
  GateKind kind;
  double p1 = 0.0;
  double p2 = 0.0;

  int arity() const;
};

/// Anti-Hermitian generator G with U = exp(G):
///   D(alpha):  alpha a^dag - alpha^* a
///   S(r):      r/2 (a^2 - a^dag^2)
///   R(theta):  -i theta a^dag a
///   B(beta):   beta (a1 a2^dag - a1^dag a2)
///   S12(r):    r (a1 a2 - a1^dag a2^dag)
SparseC generator(const Gate& gate, int cutoff);

/// Dense exp(G) by scaling and squaring.
CMat gaussian_unitary_matrix(const Gate& gate, int cutoff);

/// Lifts a single-mode operator onto `mode` of an n-mode space.
SparseC on_mode(const SparseC& op, int mode, int n_modes, int levels);

/// exp(G) v by scaled Taylor series; G sparse over the full space.
CVec expm_action(const SparseC& g, const CVec& v);

FockPure apply_gate(const Gate& gate, std::span<const int> targets, const FockPure& psi);
FockDensity apply_gate(const Gate& gate, std::span<const int> targets, const FockDensity& rho);

/// Kraus operators of pure loss, E_k = sum_n sqrt(C(n,k)) T^{(n-k)/2} (1-T)^{k/2} |n-k><n|.
std::vector<Mat> loss_kraus(double T, int cutoff);
/// Kraus operators of the quantum-limited amplifier,
/// <n+k|A_k|n> = sqrt(C(n+k,k)) G^{-(n+1)/2} (1 - 1/G)^{k/2}; levels above the
/// cutoff are dropped and show up as trace deficit.
std::vector<Mat> amplifier_kraus(double G, int cutoff);
FockDensity apply_kraus(const std::vector<Mat>& kraus, int mode, const FockDensity& rho);

/// Loss(T) then amplifier(G) with G = (mu + tau + 1)/2, T = tau/G.
FockDensity apply_phase_insensitive(double tau, double mu, int mode, const FockDensity& rho);

double laguerre(int n, double y);
/// ((-1)^n / 2pi) L_n(x^2 + p^2) exp(-(x^2 + p^2)/2).
double number_wigner(int n, double x, double p);
/// <x|n> = H_n(x/sqrt2) exp(-x^2/4) / sqrt(2^{n+1/2} sqrt(pi) n!), by the
/// normalized Hermite-function recurrence.
double wavefunction(int n, double x);
/// psi_0(x) .. psi_cutoff(x).
Vec wavefunctions(int cutoff, double x);

/// Pi_n = sum_{m >= n} C(m, n) eta^n (1 - eta)^{m-n} |m><m|, n = 0 .. cutoff.
std::vector<Mat> photodetect_povm(double eta, int cutoff);
std::vector<double> photodetect_probabilities(const FockDensity& rho, double eta);
/// Same statistics from the dilation: mix with vacuum on B(beta), cos^2 beta = eta,
/// then ideal photon counting on the transmitted mode.
std::vector<double> photodetect_dilation(const FockDensity& rho, double eta);

struct SchmidtResult {
  std::vector<double> coefficients;  // lambda_j, descending
  CMat u;                             // columns: mode-0 basis
  CMat v;                             // columns: mode-1 basis
};

/// Two-mode pure state |psi> = sum_j sqrt(lambda_j) |u_j>|v_j>.
SchmidtResult schmidt(const FockPure& psi);

/// -sum p log p with 0 log 0 = 0.
double entropy_of(const std::vector<double>& p, LogBase base = LogBase::Two);
/// Throws NumericalError for eigenvalues below -1e-8.
double vn_entropy(const FockDensity& rho, LogBase base = LogBase::Two);

FockDensity partial_trace_fock(const FockDensity& rho, std::span<const int> keep);
FockDensity partial_trace_fock(const FockDensity& rho, std::initializer_list<int> keep);
/// Reduced state of a pure state without forming the full density matrix.
FockDensity partial_trace_fock(const FockPure& psi, std::span<const int> keep);
FockDensity partial_transpose_fock(const FockDensity& rho, std::span<const int> transposed);

/// Trace norm of the partial transpose from the eigenvalues of each
/// connected block of its sparsity pattern.
double trace_norm_hermitian(const CMat& h);
double log_negativity_fock(const FockDensity& rho, std::span<const int> transposed,
                           LogBase base = LogBase::Two);

double trace_distance(const CMat& a, const CMat& b);

double mean_photon_number(const FockDensity& rho, int mode);

struct OnOffFock {
  double p_off = 0.0;
  double p_on = 0.0;
  FockDensity off_state;  // empty rho when p_off == 0
  FockDensity on_state;   // empty rho when p_on == 0
};

/// Remaining modes after projecting `measured` on |0><0| or I - |0><0|.
OnOffFock on_off_probabilities(const FockDensity& rho, int measured);
OnOffFock on_off_probabilities(const FockPure& psi, int measured);

struct HomodyneFock {
  double density = 0.0;
  FockDensity conditional;
};

/// Projects `measured` on the X^phi eigenstate |x0>, phi applied as R(phi).
HomodyneFock homodyne_fock(const FockDensity& rho, int measured, double phi, double x0);

/// <x|rho|x> of a single-mode state.
double quadrature_density_fock(const FockDensity& rho, double x);

struct HomodyneMoments {
  double mean_nd = 0.0;
  double second_nd = 0.0;
  double var_nd = 0.0;
  double mean_xphi = 0.0;    // <X^phi>, phi = arg alpha_lo
  double second_xphi = 0.0;  // <(X^phi)^2>
  double mean_n = 0.0;       // <a^dag a>
};

/// Balanced homodyne on a single-mode signal: the local oscillator is a
/// coherent Fock state on a second mode and N_D = a^dag c + c^dag a.
HomodyneMoments homodyne_moments(const FockDensity& rho, Complex alpha_lo);

}  // namespace cvtk::fock
