#pragma once

// Circuit description files. One directive per line, '#' starts a comment:
//
//   modes: N
//   initial: <kind> [params] [mode=i | modes=i,j]
//   op: <name> [params] mode=i | modes=i,j
//   measure: homodyne mode=i [phi=..] [x0=..] | onoff mode=i outcome=off|on
//   report: photon_number | entropy | log_negativity | entanglement_entropy
//           | duan [phi=..] | ppt | spectrum
//
// Modes are 1-based. `modes:` must come first. An initial line without a mode
// applies to every mode; modes without an initial line start in vacuum.
// Ops run in file order, then measurements in file order. The measured mode is
// removed from the state; reports refer to what remains.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cvtk/entanglement.hpp"
#include "cvtk/errors.hpp"
#include "cvtk/measurements.hpp"
#include "cvtk/phase_space.hpp"

namespace cvtk::circuit {

enum class InitialKind { Vacuum, Thermal, Coherent, Squeezed, Tmsv };
enum class OpKind {
  Displacement,
  Squeezer,
  Rotation,
  BeamSplitter,
  TwoModeSqueezer,
  PureLoss,
  Amplifier,
  PhaseInsensitive
};
enum class MeasureKind { Homodyne, OnOff };
enum class ReportKind { PhotonNumber, Entropy, LogNegativity, EntanglementEntropy, Duan, Ppt, Spectrum };

using Params = std::map<std::string, double>;

struct InitialSpec {
  InitialKind kind = InitialKind::Vacuum;
  Params params;
  std::vector<int> modes;  // 1-based; empty means every mode
  bool operator==(const InitialSpec&) const = default;
};

struct OpSpec {
  OpKind kind = OpKind::Displacement;
  Params params;
  std::vector<int> modes;  // 1-based
  bool operator==(const OpSpec&) const = default;
};

struct MeasureSpec {
  MeasureKind kind = MeasureKind::Homodyne;
  int mode = 1;  // 1-based, original numbering
  double phi = 0.0;
  double x0 = 0.0;
  bool on = false;
  bool operator==(const MeasureSpec&) const = default;
};

struct ReportSpec {
  ReportKind kind = ReportKind::PhotonNumber;
  double phi = 0.0;
  bool operator==(const ReportSpec&) const = default;
};

struct CircuitSpec {
  int n_modes = 1;
  std::vector<InitialSpec> initial;
  std::vector<OpSpec> ops;
  std::vector<MeasureSpec> measurements;
  std::vector<ReportSpec> reports;
  bool operator==(const CircuitSpec&) const = default;
};

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

struct ParseResult {
  std::optional<CircuitSpec> spec;
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty() && spec.has_value(); }
};

/// Collects every error rather than stopping at the first.
ParseResult parse_circuit(const std::string& text);

/// The same schema as a JSON document:
/// {"modes": N, "initial": [{"kind": .., <param>: .., "mode": i | "modes": [i, j]}],
///  "ops": [{"name": .., ...}], "measure": [{"kind": .., ...}], "report": [{"name": .., ...}]}
/// Line numbers in diagnostics count entries in that order, "modes" being line 1.
ParseResult parse_circuit_json(const std::string& text);

/// Canonical text form; parse_circuit(render(s)) == s.
std::string render(const CircuitSpec& spec);

class ParseError : public InputError {
 public:
  explicit ParseError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

std::string format_diagnostics(const std::vector<Diagnostic>& diags, const std::string& source);

struct GridSpec {
  double xmin = -5.0, xmax = 5.0, pmin = -5.0, pmax = 5.0, step = 0.05;
};

/// "xmin:xmax:pmin:pmax:step"; throws InputError.
GridSpec parse_grid(const std::string& text);

struct RunOptions {
  LogBase base = LogBase::Two;
  bool oracle = false;
  int oracle_cutoff = 30;
};

struct Metric {
  std::string name;
  std::vector<double> values;
  std::string unit;
  std::optional<double> fock;  // oracle value of values[0] when available
};

struct OutcomeRecord {
  std::string label;
  double value = 0.0;  // probability, or density for homodyne
  std::optional<double> fock;
};

struct RunReport {
  RunOptions options;
  int n_modes_initial = 0;
  std::vector<int> remaining_modes;  // 1-based, original numbering
  std::vector<OutcomeRecord> outcomes;
  /// Single Gaussian term unless an on event was conditioned on.
  SignedGaussianMixture final_state;
  std::vector<Metric> metrics;
};

/// Builds the initial Gaussian state (PhysicalityError if unphysical).
GaussianState initial_state(const CircuitSpec& spec);

/// Parse + physicality of the initial state and every channel.
void check(const CircuitSpec& spec);

RunReport run(const CircuitSpec& spec, const RunOptions& options = {});

/// Plain-text report; every number printed with 17 significant digits.
std::string format_report(const RunReport& report);

/// CSV "x,p,w", x outer loop, p inner loop, 17 significant digits.
std::string wigner_grid_csv(const std::function<double(double, double)>& w, const GridSpec& grid);
/// Writes the CSV to `path`; I/O errors raise Error naming the path.
void emit_wigner_grid(const SignedGaussianMixture& state, const GridSpec& grid, const std::string& path);
void emit_wigner_grid(const std::function<double(double, double)>& w, const GridSpec& grid,
                      const std::string& path);

}  // namespace cvtk::circuit
