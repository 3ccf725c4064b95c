#include "cvtk/circuit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cvtk/channels.hpp"
#include "cvtk/fock.hpp"
#include "cvtk/unitaries.hpp"

namespace cvtk::circuit {

namespace {

struct KindInfo {
  const char* name;
  std::vector<std::string> params;
  int arity;
};

const std::vector<std::pair<InitialKind, KindInfo>>& initial_table() {
  static const std::vector<std::pair<InitialKind, KindInfo>> t = {
      {InitialKind::Vacuum, {"vacuum", {}, 1}},
      {InitialKind::Thermal, {"thermal", {"nbar"}, 1}},
      {InitialKind::Coherent, {"coherent", {"p", "x"}, 1}},
      {InitialKind::Squeezed, {"squeezed", {"r"}, 1}},
      {InitialKind::Tmsv, {"tmsv", {"r"}, 2}},
  };
  return t;
}

const std::vector<std::pair<OpKind, KindInfo>>& op_table() {
  static const std::vector<std::pair<OpKind, KindInfo>> t = {
      {OpKind::Displacement, {"displacement", {"p", "x"}, 1}},
      {OpKind::Squeezer, {"squeezer", {"r"}, 1}},
      {OpKind::Rotation, {"rotation", {"theta"}, 1}},
      {OpKind::BeamSplitter, {"beam_splitter", {"beta"}, 2}},
      {OpKind::TwoModeSqueezer, {"two_mode_squeezer", {"r"}, 2}},
      {OpKind::PureLoss, {"pure_loss", {"T"}, 1}},
      {OpKind::Amplifier, {"amplifier", {"G"}, 1}},
      {OpKind::PhaseInsensitive, {"phase_insensitive", {"mu", "tau"}, 1}},
  };
  return t;
}

const std::vector<std::pair<ReportKind, const char*>>& report_table() {
  static const std::vector<std::pair<ReportKind, const char*>> t = {
      {ReportKind::PhotonNumber, "photon_number"},
      {ReportKind::Entropy, "entropy"},
      {ReportKind::LogNegativity, "log_negativity"},
      {ReportKind::EntanglementEntropy, "entanglement_entropy"},
      {ReportKind::Duan, "duan"},
      {ReportKind::Ppt, "ppt"},
      {ReportKind::Spectrum, "spectrum"},
  };
  return t;
}

template <typename K, typename V>
const V* find_by_kind(const std::vector<std::pair<K, V>>& table, K kind) {
  for (const auto& [k, v] : table)
    if (k == kind) return &v;
  return nullptr;
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Token {
  std::string text;
  int column;  // 1-based
};

struct Line {
  int number;
  std::string directive;
  int directive_column;
  std::vector<Token> tokens;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Parser {
 public:
  ParseResult parse(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
      ++number;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.resize(hash);
      if (trim(raw).empty()) continue;
      handle(split(raw, number));
    }
    finish();
    ParseResult res;
    res.errors = std::move(errors_);
    if (res.errors.empty()) res.spec = std::move(spec_);
    return res;
  }

 private:
  CircuitSpec spec_;
  std::vector<Diagnostic> errors_;
  bool have_modes_ = false;
  int last_line_ = 0;
  std::vector<int> initial_lines_;
  std::vector<int> measure_lines_;
  std::vector<int> report_lines_;
  std::vector<int> report_cols_;

  void error(int line, int col, std::string msg) { errors_.push_back({line, col, std::move(msg)}); }

  Line split(const std::string& raw, int number) {
    Line line{number, "", 1, {}};
    last_line_ = number;
    const auto colon = raw.find(':');
    if (colon == std::string::npos) {
      const auto b = raw.find_first_not_of(" \t");
      error(number, static_cast<int>(b) + 1, "expected '<directive>: ...'");
      return line;
    }
    const auto b = raw.find_first_not_of(" \t");
    line.directive = trim(raw.substr(0, colon));
    line.directive_column = static_cast<int>(b) + 1;
    std::size_t i = colon + 1;
    while (i < raw.size()) {
      while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r')) ++i;
      if (i >= raw.size()) break;
      const std::size_t start = i;
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r') ++i;
      line.tokens.push_back({raw.substr(start, i - start), static_cast<int>(start) + 1});
    }
    return line;
  }

  void handle(const Line& line) {
    if (line.directive.empty()) return;
    if (line.directive == "modes") return handle_modes(line);
    if (!have_modes_) {
      error(line.number, line.directive_column, "'modes:' must come before '" + line.directive + ":'");
      return;
    }
    if (line.directive == "initial") return handle_initial(line);
    if (line.directive == "op") return handle_op(line);
    if (line.directive == "measure") return handle_measure(line);
    if (line.directive == "report") return handle_report(line);
    error(line.number, line.directive_column,
          "unknown directive '" + line.directive + "' (expected modes, initial, op, measure, report)");
  }

  bool parse_double(const Token& tok, const std::string& key, const std::string& value, int line, double& out) {
    const char* first = value.data();
    const char* last = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || ptr != last || !std::isfinite(out)) {
      error(line, tok.column + static_cast<int>(key.size()) + 1,
            "parameter '" + key + "': '" + value + "' is not a finite number");
      return false;
    }
    return true;
  }

  bool parse_int(const std::string& s, int& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  }

  // Mode list from "i" or "i,j"; 1-based range check.
  bool parse_modes(const Token& tok, const std::string& key, const std::string& value, int line,
                   std::vector<int>& out) {
    out.clear();
    std::size_t start = 0;
    const int col = tok.column + static_cast<int>(key.size()) + 1;
    while (true) {
      const auto comma = value.find(',', start);
      const std::string part = value.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      int m = 0;
      if (!parse_int(part, m)) {
        error(line, col, "'" + key + "': '" + value + "' is not a mode index list");
        return false;
      }
      if (m < 1 || m > spec_.n_modes) {
        error(line, col, "'" + key + "': mode " + std::to_string(m) + " out of range 1.." +
                             std::to_string(spec_.n_modes));
        return false;
      }
      out.push_back(m);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return true;
  }

  struct KeyValues {
    std::vector<std::tuple<std::string, std::string, Token>> items;
  };

  bool key_values(const Line& line, std::size_t from, KeyValues& kv) {
    bool ok = true;
    std::set<std::string> seen;
    for (std::size_t i = from; i < line.tokens.size(); ++i) {
      const Token& t = line.tokens[i];
      const auto eq = t.text.find('=');
      if (eq == std::string::npos || eq == 0) {
        error(line.number, t.column, "expected key=value, got '" + t.text + "'");
        ok = false;
        continue;
      }
      const std::string key = t.text.substr(0, eq);
      if (!seen.insert(key).second) {
        error(line.number, t.column, "parameter '" + key + "' given twice");
        ok = false;
        continue;
      }
      kv.items.emplace_back(key, t.text.substr(eq + 1), t);
    }
    return ok;
  }

  // Shared handling of initial/op lines: named numeric params plus targets.
  bool params_and_modes(const Line& line, const KindInfo& info, bool modes_optional, Params& params,
                        std::vector<int>& modes) {
    KeyValues kv;
    bool ok = key_values(line, 1, kv);
    bool have_modes = false;
    for (const auto& [key, value, tok] : kv.items) {
      if (key == "mode" || key == "modes") {
        if (have_modes) {
          error(line.number, tok.column, "targets given twice");
          ok = false;
          continue;
        }
        have_modes = true;
        if (!parse_modes(tok, key, value, line.number, modes)) {
          ok = false;
          continue;
        }
        if (static_cast<int>(modes.size()) != info.arity) {
          error(line.number, tok.column, std::string(info.name) + " acts on " + std::to_string(info.arity) +
                                             " mode(s), got " + std::to_string(modes.size()));
          ok = false;
        } else if (modes.size() == 2 && modes[0] == modes[1]) {
          error(line.number, tok.column, std::string(info.name) + " needs two distinct modes");
          ok = false;
        }
        continue;
      }
      if (std::find(info.params.begin(), info.params.end(), key) == info.params.end()) {
        std::string expected;
        for (const auto& p : info.params) expected += (expected.empty() ? "" : ", ") + p;
        error(line.number, tok.column, "unknown parameter '" + key + "' for " + info.name +
                                           (expected.empty() ? " (takes none)" : " (expected " + expected + ")"));
        ok = false;
        continue;
      }
      double v = 0.0;
      if (parse_double(tok, key, value, line.number, v)) params[key] = v;
      else ok = false;
    }
    for (const auto& p : info.params) {
      if (!params.count(p) && ok) {
        error(line.number, line.tokens[0].column, std::string(info.name) + ": missing parameter '" + p + "'");
        ok = false;
      }
    }
    if (!have_modes && !(modes_optional && info.arity == 1)) {
      error(line.number, line.tokens[0].column,
            std::string(info.name) + ": missing target " + (info.arity == 2 ? "'modes=i,j'" : "'mode=i'"));
      ok = false;
    }
    return ok;
  }

  void handle_modes(const Line& line) {
    if (have_modes_) {
      error(line.number, line.directive_column, "'modes:' given twice");
      return;
    }
    if (line.tokens.size() != 1) {
      error(line.number, line.directive_column, "'modes:' takes exactly one integer");
      return;
    }
    int n = 0;
    if (!parse_int(line.tokens[0].text, n) || n < 1 || n > 16) {
      error(line.number, line.tokens[0].column, "'modes:' must be an integer in 1..16");
      return;
    }
    spec_.n_modes = n;
    have_modes_ = true;
  }

  void handle_initial(const Line& line) {
    if (line.tokens.empty()) {
      error(line.number, line.directive_column, "initial: missing state kind");
      return;
    }
    const Token& name = line.tokens[0];
    for (const auto& [kind, info] : initial_table()) {
      if (name.text != info.name) continue;
      InitialSpec s;
      s.kind = kind;
      if (!params_and_modes(line, info, true, s.params, s.modes)) return;
      spec_.initial.push_back(std::move(s));
      initial_lines_.push_back(line.number);
      return;
    }
    error(line.number, name.column,
          "unknown state '" + name.text + "' (expected vacuum, thermal, coherent, squeezed, tmsv)");
  }

  void handle_op(const Line& line) {
    if (line.tokens.empty()) {
      error(line.number, line.directive_column, "op: missing operation name");
      return;
    }
    const Token& name = line.tokens[0];
    for (const auto& [kind, info] : op_table()) {
      if (name.text != info.name) continue;
      OpSpec s;
      s.kind = kind;
      if (!params_and_modes(line, info, false, s.params, s.modes)) return;
      std::string range;
      if (kind == OpKind::PureLoss && !(s.params["T"] >= 0.0 && s.params["T"] <= 1.0))
        range = "pure_loss: requires 0 <= T <= 1";
      if (kind == OpKind::Amplifier && !(s.params["G"] >= 1.0)) range = "amplifier: requires G >= 1";
      if (kind == OpKind::PhaseInsensitive && !(s.params["tau"] >= 0.0))
        range = "phase_insensitive: requires tau >= 0";
      if (!range.empty()) {
        error(line.number, name.column, range);
        return;
      }
      spec_.ops.push_back(std::move(s));
      return;
    }
    error(line.number, name.column, "unknown operation '" + name.text + "'");
  }

  void handle_measure(const Line& line) {
    if (line.tokens.empty()) {
      error(line.number, line.directive_column, "measure: missing measurement kind");
      return;
    }
    const Token& name = line.tokens[0];
    MeasureSpec m;
    if (name.text == "homodyne") m.kind = MeasureKind::Homodyne;
    else if (name.text == "onoff") m.kind = MeasureKind::OnOff;
    else {
      error(line.number, name.column, "unknown measurement '" + name.text + "' (expected homodyne, onoff)");
      return;
    }
    KeyValues kv;
    bool ok = key_values(line, 1, kv);
    bool have_mode = false, have_outcome = false;
    for (const auto& [key, value, tok] : kv.items) {
      if (key == "mode") {
        std::vector<int> modes;
        if (parse_modes(tok, key, value, line.number, modes) && modes.size() == 1) {
          m.mode = modes[0];
          have_mode = true;
        } else {
          if (modes.size() > 1) error(line.number, tok.column, "measure: exactly one mode");
          ok = false;
        }
      } else if (m.kind == MeasureKind::Homodyne && (key == "phi" || key == "x0")) {
        ok = parse_double(tok, key, value, line.number, key == "phi" ? m.phi : m.x0) && ok;
      } else if (m.kind == MeasureKind::OnOff && key == "outcome") {
        if (value == "on" || value == "off") {
          m.on = value == "on";
          have_outcome = true;
        } else {
          error(line.number, tok.column, "outcome must be 'on' or 'off', got '" + value + "'");
          ok = false;
        }
      } else {
        error(line.number, tok.column, "unknown parameter '" + key + "' for " + name.text);
        ok = false;
      }
    }
    if (!have_mode && ok) {
      error(line.number, name.column, name.text + ": missing 'mode=i'");
      ok = false;
    }
    if (m.kind == MeasureKind::OnOff && !have_outcome && ok) {
      error(line.number, name.column, "onoff: missing 'outcome=off|on'");
      ok = false;
    }
    if (!ok) return;
    for (std::size_t i = 0; i < spec_.measurements.size(); ++i) {
      if (spec_.measurements[i].mode == m.mode) {
        error(line.number, name.column, "mode " + std::to_string(m.mode) + " already measured on line " +
                                            std::to_string(measure_lines_[i]));
        return;
      }
    }
    spec_.measurements.push_back(m);
    measure_lines_.push_back(line.number);
  }

  void handle_report(const Line& line) {
    if (line.tokens.empty()) {
      error(line.number, line.directive_column, "report: missing report name");
      return;
    }
    const Token& name = line.tokens[0];
    for (const auto& [kind, rname] : report_table()) {
      if (name.text != rname) continue;
      ReportSpec r;
      r.kind = kind;
      KeyValues kv;
      bool ok = key_values(line, 1, kv);
      for (const auto& [key, value, tok] : kv.items) {
        if (kind == ReportKind::Duan && key == "phi") {
          ok = parse_double(tok, key, value, line.number, r.phi) && ok;
        } else {
          error(line.number, tok.column, "unknown parameter '" + key + "' for " + name.text);
          ok = false;
        }
      }
      if (!ok) return;
      spec_.reports.push_back(r);
      report_lines_.push_back(line.number);
      report_cols_.push_back(name.column);
      return;
    }
    error(line.number, name.column, "unknown report '" + name.text + "'");
  }

  void finish() {
    if (!have_modes_) {
      error(last_line_ > 0 ? 1 : 0, 1, "missing 'modes:' directive");
      return;
    }
    // Initial assignments: each mode at most once.
    std::vector<int> owner(spec_.n_modes + 1, 0);
    for (std::size_t i = 0; i < spec_.initial.size(); ++i) {
      std::vector<int> targets = spec_.initial[i].modes;
      if (targets.empty())
        for (int m = 1; m <= spec_.n_modes; ++m) targets.push_back(m);
      for (int m : targets) {
        if (owner[m] != 0) {
          error(initial_lines_[i], 1, "mode " + std::to_string(m) + " already initialized on line " +
                                          std::to_string(owner[m]));
          break;
        }
        owner[m] = initial_lines_[i];
      }
    }
    const int remaining = spec_.n_modes - static_cast<int>(spec_.measurements.size());
    if (!spec_.measurements.empty() && remaining < 1)
      error(measure_lines_.back(), 1, "every mode is measured; at least one must remain");
    bool heralded_on = false;
    for (std::size_t i = 0; i < spec_.measurements.size(); ++i) {
      if (heralded_on)
        error(measure_lines_[i], 1, "measurements after an 'outcome=on' event are not supported");
      if (spec_.measurements[i].kind == MeasureKind::OnOff && spec_.measurements[i].on) heralded_on = true;
    }
    for (std::size_t i = 0; i < spec_.reports.size(); ++i) {
      const ReportKind k = spec_.reports[i].kind;
      const char* name = *find_by_kind(report_table(), k);
      if (heralded_on && k != ReportKind::PhotonNumber) {
        error(report_lines_[i], report_cols_[i],
              std::string(name) + ": the heralded on-state is a signed mixture; only photon_number applies");
        continue;
      }
      const bool needs_two = k == ReportKind::EntanglementEntropy || k == ReportKind::Duan || k == ReportKind::Ppt;
      if (needs_two && remaining != 2)
        error(report_lines_[i], report_cols_[i],
              std::string(name) + ": needs exactly 2 remaining modes, have " + std::to_string(remaining));
      if (k == ReportKind::LogNegativity && remaining < 2)
        error(report_lines_[i], report_cols_[i], "log_negativity: needs at least 2 remaining modes");
    }
  }
};

std::string modes_token(const std::vector<int>& modes) {
  if (modes.size() == 1) return "mode=" + std::to_string(modes[0]);
  std::string s = "modes=";
  for (std::size_t i = 0; i < modes.size(); ++i) s += (i ? "," : "") + std::to_string(modes[i]);
  return s;
}

std::string params_text(const Params& p) {
  std::string s;
  for (const auto& [k, v] : p) s += " " + k + "=" + fmt(v);
  return s;
}

std::vector<int> zero_based(const std::vector<int>& modes) {
  std::vector<int> out;
  for (int m : modes) out.push_back(m - 1);
  return out;
}

GaussianState single_initial(const InitialSpec& s) {
  const Params& p = s.params;
  switch (s.kind) {
    case InitialKind::Vacuum: return GaussianState::vacuum(1);
    // Built directly so that nbar < 0 surfaces as a physicality violation.
    case InitialKind::Thermal: return {Vec::Zero(2), (2.0 * p.at("nbar") + 1.0) * Mat::Identity(2, 2)};
    case InitialKind::Coherent: return GaussianState::coherent(p.at("x"), p.at("p"));
    case InitialKind::Squeezed: return GaussianState::squeezed(p.at("r"));
    case InitialKind::Tmsv: return GaussianState::tmsv(p.at("r"));
  }
  throw InputError("unknown initial state");
}

bool is_unitary(OpKind k) {
  return k != OpKind::PureLoss && k != OpKind::Amplifier && k != OpKind::PhaseInsensitive;
}

SymplecticOp unitary_of(const OpSpec& s) {
  const Params& p = s.params;
  switch (s.kind) {
    case OpKind::Displacement: return displacement(p.at("x"), p.at("p"));
    case OpKind::Squeezer: return squeezer(p.at("r"));
    case OpKind::Rotation: return rotation(p.at("theta"));
    case OpKind::BeamSplitter: return beam_splitter(p.at("beta"));
    case OpKind::TwoModeSqueezer: return two_mode_squeezer(p.at("r"));
    default: break;
  }
  throw InputError("not a unitary op");
}

GaussianChannel channel_of(const OpSpec& s) {
  const Params& p = s.params;
  switch (s.kind) {
    case OpKind::PureLoss: return pure_loss(p.at("T"));
    case OpKind::Amplifier: return quantum_limited_amp(p.at("G"));
    case OpKind::PhaseInsensitive:
      // Unvalidated (K, N) so that mu < |tau - 1| surfaces as a physicality violation.
      return {std::sqrt(p.at("tau")) * Mat::Identity(2, 2), p.at("mu") * Mat::Identity(2, 2), Vec::Zero(2)};
    default: break;
  }
  return GaussianChannel::from_unitary(unitary_of(s));
}

std::string step_label(const OpSpec& s) {
  return std::string(find_by_kind(op_table(), s.kind)->name) + params_text(s.params) + " " + modes_token(s.modes);
}

// Fock oracle replay of the circuit; returns the final density and per-outcome values.
struct FockRun {
  fock::FockDensity rho;
  std::vector<double> outcomes;
};

FockRun fock_replay(const CircuitSpec& spec, int cutoff) {
  const int n = spec.n_modes;
  double dim = std::pow(cutoff + 1.0, n);
  if (dim > 1600.0) {
    std::ostringstream os;
    os << "oracle: Fock dimension (" << cutoff + 1 << ")^" << n << " exceeds 1600; lower --oracle-cutoff";
    throw NumericalError(os.str());
  }
  // Pure until the first thermal mode, channel or measurement; gates on a
  // vector are far cheaper than on a density matrix.
  std::vector<fock::FockPure> pure_modes(n, fock::vacuum(1, cutoff));
  std::vector<std::optional<fock::FockDensity>> mixed_modes(n);
  std::vector<std::pair<double, std::vector<int>>> tmsv_pairs;
  for (const auto& s : spec.initial) {
    std::vector<int> targets = s.modes;
    if (targets.empty())
      for (int m = 1; m <= n; ++m) targets.push_back(m);
    const Params& p = s.params;
    for (int m : targets) {
      switch (s.kind) {
        case InitialKind::Vacuum: break;
        case InitialKind::Thermal: mixed_modes[m - 1] = fock::thermal(p.at("nbar"), cutoff); break;
        case InitialKind::Coherent:
          pure_modes[m - 1] = fock::coherent(Complex(p.at("x") / 2, p.at("p") / 2), cutoff);
          break;
        case InitialKind::Squeezed: pure_modes[m - 1] = fock::squeezed_vacuum(p.at("r"), cutoff); break;
        case InitialKind::Tmsv: break;
      }
    }
    if (s.kind == InitialKind::Tmsv) tmsv_pairs.emplace_back(p.at("r"), zero_based(s.modes));
  }

  std::optional<fock::FockPure> psi;
  std::optional<fock::FockDensity> rho;
  if (std::none_of(mixed_modes.begin(), mixed_modes.end(), [](const auto& m) { return m.has_value(); })) {
    psi = pure_modes[0];
    for (int m = 1; m < n; ++m) psi = fock::tensor(*psi, pure_modes[m]);
  } else {
    auto mode_density = [&](int m) { return mixed_modes[m] ? *mixed_modes[m] : fock::to_density(pure_modes[m]); };
    rho = mode_density(0);
    for (int m = 1; m < n; ++m) rho = fock::tensor(*rho, mode_density(m));
  }
  auto gate = [&](const fock::Gate& g, const std::vector<int>& t) {
    if (psi)
      psi = fock::apply_gate(g, t, *psi);
    else
      rho = fock::apply_gate(g, t, *rho);
  };
  auto density = [&]() -> fock::FockDensity& {
    if (psi) {
      rho = fock::to_density(*psi);
      psi.reset();
    }
    return *rho;
  };
  for (const auto& [r, modes] : tmsv_pairs) gate({fock::GateKind::TwoModeSqueezer, r}, modes);

  for (const auto& op : spec.ops) {
    const auto t = zero_based(op.modes);
    const Params& p = op.params;
    switch (op.kind) {
      case OpKind::Displacement: gate({fock::GateKind::Displacement, p.at("x"), p.at("p")}, t); break;
      case OpKind::Squeezer: gate({fock::GateKind::Squeezer, p.at("r")}, t); break;
      case OpKind::Rotation: gate({fock::GateKind::Rotation, p.at("theta")}, t); break;
      case OpKind::BeamSplitter: gate({fock::GateKind::BeamSplitter, p.at("beta")}, t); break;
      case OpKind::TwoModeSqueezer: gate({fock::GateKind::TwoModeSqueezer, p.at("r")}, t); break;
      case OpKind::PureLoss: rho = fock::apply_kraus(fock::loss_kraus(p.at("T"), cutoff), t[0], density()); break;
      case OpKind::Amplifier: rho = fock::apply_kraus(fock::amplifier_kraus(p.at("G"), cutoff), t[0], density()); break;
      case OpKind::PhaseInsensitive:
        rho = fock::apply_phase_insensitive(p.at("tau"), p.at("mu"), t[0], density());
        break;
    }
  }
  density();

  FockRun out;
  std::vector<int> current;
  for (int m = 1; m <= n; ++m) current.push_back(m);
  for (const auto& m : spec.measurements) {
    const int idx = static_cast<int>(std::find(current.begin(), current.end(), m.mode) - current.begin());
    if (m.kind == MeasureKind::OnOff) {
      auto res = fock::on_off_probabilities(*rho, idx);
      out.outcomes.push_back(m.on ? res.p_on : res.p_off);
      rho = m.on ? res.on_state : res.off_state;
    } else {
      auto res = fock::homodyne_fock(*rho, idx, m.phi, m.x0);
      out.outcomes.push_back(res.density);
      rho = res.conditional;
    }
    if (rho->rho.size() == 0) throw NumericalError("oracle: conditioned on an outcome of probability 0");
    current.erase(current.begin() + idx);
  }
  out.rho = std::move(*rho);
  return out;
}

}  // namespace

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : InputError(diagnostics.empty() ? "parse error" : diagnostics.front().message),
      diagnostics_(std::move(diagnostics)) {}

std::string format_diagnostics(const std::vector<Diagnostic>& diags, const std::string& source) {
  std::string out;
  for (const auto& d : diags)
    out += source + ":" + std::to_string(d.line) + ":" + std::to_string(d.column) + ": error: " + d.message + "\n";
  return out;
}

ParseResult parse_circuit(const std::string& text) { return Parser().parse(text); }

ParseResult parse_circuit_json(const std::string& text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    ParseResult r;
    r.errors.push_back({1, static_cast<int>(e.byte), std::string("invalid JSON: ") + e.what()});
    return r;
  }
  ParseResult bad;
  auto fail = [&](int line, std::string msg) {
    bad.errors.push_back({line, 1, std::move(msg)});
    return bad;
  };
  if (!doc.is_object()) return fail(1, "top level must be an object");
  std::string lines;
  int line = 1;
  auto number = [](const json& v) -> std::string {
    return v.is_number() ? fmt(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump();
  };
  auto targets = [&](const json& e) -> std::string {
    if (e.contains("mode")) return " mode=" + number(e["mode"]);
    if (e.contains("modes") && e["modes"].is_array()) {
      std::string s = " modes=";
      for (std::size_t i = 0; i < e["modes"].size(); ++i) s += (i ? "," : "") + number(e["modes"][i]);
      return s;
    }
    return "";
  };
  auto rest = [&](const json& e, const char* name_key) {
    std::string s;
    for (const auto& [k, v] : e.items())
      if (k != name_key && k != "mode" && k != "modes") s += " " + k + "=" + number(v);
    return s;
  };
  if (!doc.contains("modes")) return fail(1, "missing \"modes\"");
  lines += "modes: " + number(doc["modes"]) + "\n";
  const std::pair<const char*, const char*> sections[] = {
      {"initial", "kind"}, {"ops", "name"}, {"measure", "kind"}, {"report", "name"}};
  for (const auto& [section, name_key] : sections) {
    if (!doc.contains(section)) continue;
    if (!doc[section].is_array()) return fail(line + 1, std::string("\"") + section + "\" must be an array");
    const std::string directive = std::string(section) == "ops" ? "op" : section;
    for (const auto& e : doc[section]) {
      ++line;
      if (!e.is_object() || !e.contains(name_key) || !e[name_key].is_string())
        return fail(line, std::string(section) + " entry needs a string \"" + name_key + "\"");
      lines += directive + ": " + e[name_key].get<std::string>() + rest(e, name_key) + targets(e) + "\n";
    }
  }
  return parse_circuit(lines);
}

std::string render(const CircuitSpec& spec) {
  std::string out = "modes: " + std::to_string(spec.n_modes) + "\n";
  for (const auto& s : spec.initial) {
    out += std::string("initial: ") + find_by_kind(initial_table(), s.kind)->name + params_text(s.params);
    if (!s.modes.empty()) out += " " + modes_token(s.modes);
    out += "\n";
  }
  for (const auto& s : spec.ops) out += "op: " + step_label(s) + "\n";
  for (const auto& m : spec.measurements) {
    if (m.kind == MeasureKind::Homodyne)
      out += "measure: homodyne mode=" + std::to_string(m.mode) + " phi=" + fmt(m.phi) + " x0=" + fmt(m.x0) + "\n";
    else
      out += "measure: onoff mode=" + std::to_string(m.mode) + " outcome=" + (m.on ? "on" : "off") + "\n";
  }
  for (const auto& r : spec.reports) {
    out += std::string("report: ") + *find_by_kind(report_table(), r.kind);
    if (r.kind == ReportKind::Duan) out += " phi=" + fmt(r.phi);
    out += "\n";
  }
  return out;
}

GridSpec parse_grid(const std::string& text) {
  std::vector<double> v;
  std::size_t start = 0;
  while (true) {
    const auto colon = text.find(':', start);
    const std::string part = text.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), x);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty())
      throw InputError("grid: '" + part + "' is not a number (expected xmin:xmax:pmin:pmax:step)");
    v.push_back(x);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (v.size() != 5) throw InputError("grid: expected xmin:xmax:pmin:pmax:step");
  GridSpec g{v[0], v[1], v[2], v[3], v[4]};
  if (!(g.step > 0.0) || !(g.xmax >= g.xmin) || !(g.pmax >= g.pmin))
    throw InputError("grid: requires step > 0, xmax >= xmin, pmax >= pmin");
  if ((g.xmax - g.xmin) / g.step > 1e5 || (g.pmax - g.pmin) / g.step > 1e5)
    throw InputError("grid: more than 1e5 points per axis");
  return g;
}

GaussianState initial_state(const CircuitSpec& spec) {
  const int n = spec.n_modes;
  Vec mean = Vec::Zero(2 * n);
  Mat cov = Mat::Identity(2 * n, 2 * n);
  for (const auto& s : spec.initial) {
    std::vector<int> targets = s.modes;
    if (targets.empty())
      for (int m = 1; m <= n; ++m) targets.push_back(m);
    if (s.kind == InitialKind::Tmsv) {
      const GaussianState g = single_initial(s);
      const auto idx = quadrature_indices(zero_based(targets));
      for (int i = 0; i < 4; ++i) {
        mean(idx[i]) = g.mean()(i);
        for (int j = 0; j < 4; ++j) cov(idx[i], idx[j]) = g.cov()(i, j);
      }
      continue;
    }
    const GaussianState g = single_initial(s);
    for (int m : targets) {
      mean.segment(2 * (m - 1), 2) = g.mean();
      cov.block(2 * (m - 1), 2 * (m - 1), 2, 2) = g.cov();
    }
  }
  GaussianState state(mean, cov);
  require_physical(state);
  return state;
}

void check(const CircuitSpec& spec) {
  initial_state(spec);
  for (const auto& op : spec.ops) {
    if (is_unitary(op.kind)) continue;
    const auto rep = validate_channel(channel_of(op));
    if (!rep.valid) throw PhysicalityError("channel " + step_label(op) + " is not completely positive");
  }
}

RunReport run(const CircuitSpec& spec, const RunOptions& options) {
  RunReport rep;
  rep.options = options;
  rep.n_modes_initial = spec.n_modes;
  GaussianState state = initial_state(spec);
  for (const auto& op : spec.ops) {
    try {
      const auto t = zero_based(op.modes);
      if (is_unitary(op.kind)) state = apply(embed(unitary_of(op), spec.n_modes, t), state);
      else state = apply_channel(embed(channel_of(op), spec.n_modes, t), state);
    } catch (const PhysicalityError& e) {
      throw PhysicalityError("op " + step_label(op) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("op " + step_label(op) + ": " + e.what());
    }
  }

  std::vector<int> current;
  for (int m = 1; m <= spec.n_modes; ++m) current.push_back(m);
  std::optional<SignedGaussianMixture> mixture;
  for (const auto& m : spec.measurements) {
    const int idx = static_cast<int>(std::find(current.begin(), current.end(), m.mode) - current.begin());
    OutcomeRecord rec;
    if (m.kind == MeasureKind::OnOff) {
      const OnOffResult r = on_off_detect(state, idx);
      rec.label = "onoff mode=" + std::to_string(m.mode) + " outcome=" + (m.on ? "on" : "off") + " probability";
      if (m.on) {
        rec.value = r.on.probability;
        if (r.on.conditional.empty())
          throw NumericalError("measure onoff mode=" + std::to_string(m.mode) + ": on event has probability 0");
        mixture = r.on.conditional;
      } else {
        rec.value = r.off.probability;
        state = r.off.conditional.states.front();
      }
    } else {
      const HomodyneResult r = homodyne(state, idx, m.phi, m.x0);
      rec.label = "homodyne mode=" + std::to_string(m.mode) + " phi=" + fmt(m.phi) + " x0=" + fmt(m.x0) + " density";
      rec.value = r.density;
      state = r.conditional;
    }
    rep.outcomes.push_back(rec);
    current.erase(current.begin() + idx);
  }
  rep.remaining_modes = current;
  rep.final_state = mixture ? *mixture : SignedGaussianMixture::single(state);

  std::optional<FockRun> fr;
  if (options.oracle) {
    fr = fock_replay(spec, options.oracle_cutoff);
    for (std::size_t i = 0; i < rep.outcomes.size(); ++i) rep.outcomes[i].fock = fr->outcomes[i];
  }

  const std::string info_unit = options.base == LogBase::Two ? "bits" : "nats";
  for (const auto& r : spec.reports) {
    Metric mt;
    mt.name = *find_by_kind(report_table(), r.kind);
    switch (r.kind) {
      case ReportKind::PhotonNumber:
        mt.unit = "photons";
        mt.values = {rep.final_state.mean_photon_number()};
        if (fr) {
          double n = 0.0;
          for (int k = 0; k < fr->rho.n_modes; ++k) n += fock::mean_photon_number(fr->rho, k);
          mt.fock = n;
        }
        break;
      case ReportKind::Entropy:
        mt.unit = info_unit;
        mt.values = {von_neumann_entropy(state, options.base)};
        if (fr) mt.fock = fock::vn_entropy(fr->rho, options.base);
        break;
      case ReportKind::LogNegativity: {
        mt.name += " (mode " + std::to_string(current.front()) + " | rest)";
        mt.unit = info_unit;
        mt.values = {log_negativity(state, options.base)};
        const int first[1] = {0};
        if (fr) mt.fock = fock::log_negativity_fock(fr->rho, first, options.base);
        break;
      }
      case ReportKind::EntanglementEntropy:
        mt.unit = info_unit;
        mt.values = {entanglement_entropy_two_mode(state, options.base)};
        if (fr) mt.fock = fock::vn_entropy(fock::partial_trace_fock(fr->rho, {0}), options.base);
        break;
      case ReportKind::Duan:
        mt.name += " phi=" + fmt(r.phi);
        mt.unit = "vacuum units (separable >= 2)";
        mt.values = {duan_witness(state, r.phi)};
        break;
      case ReportKind::Ppt: {
        const PptReport p = ppt_separable_1x1(state);
        mt.unit = "separable flag, then partially transposed symplectic spectrum";
        mt.values = {p.separable ? 1.0 : 0.0};
        mt.values.insert(mt.values.end(), p.pt_spectrum.begin(), p.pt_spectrum.end());
        break;
      }
      case ReportKind::Spectrum:
        mt.unit = "symplectic eigenvalues, descending";
        mt.values = symplectic_spectrum(state.cov());
        break;
    }
    rep.metrics.push_back(std::move(mt));
  }
  return rep;
}

std::string format_report(const RunReport& rep) {
  std::ostringstream os;
  os << "# cvtk report\n";
  os << "# convention: [X,P] = 2i, vacuum quadrature variance 1, ordering (x1,p1,...,xN,pN)\n";
  os << "# log base: " << (rep.options.base == LogBase::Two ? "2 (bits)" : "e (nats)") << "\n";
  if (rep.options.oracle) os << "# oracle: fock cutoff " << rep.options.oracle_cutoff << "\n";
  else os << "# oracle: off\n";
  os << "modes: " << rep.n_modes_initial << "\n";
  os << "remaining:";
  for (int m : rep.remaining_modes) os << " " << m;
  os << "\n";
  auto fock_suffix = [&](double value, const std::optional<double>& fock) {
    if (!fock) return std::string();
    return " fock=" + fmt(*fock) + " delta=" + fmt(std::abs(value - *fock));
  };
  for (const auto& o : rep.outcomes) os << "outcome " << o.label << " = " << fmt(o.value) << fock_suffix(o.value, o.fock) << "\n";
  const auto& fs = rep.final_state;
  os << "state: " << (fs.states.size() == 1 ? "gaussian" : "signed_gaussian_mixture") << " terms=" << fs.states.size() << "\n";
  for (std::size_t t = 0; t < fs.states.size(); ++t) {
    os << "term " << t + 1 << " weight = " << fmt(fs.weights[t]) << "\n";
    os << "mean =";
    for (Eigen::Index i = 0; i < fs.states[t].mean().size(); ++i) os << " " << fmt(fs.states[t].mean()(i));
    os << "\n";
    for (Eigen::Index i = 0; i < fs.states[t].cov().rows(); ++i) {
      os << "cov[" << i << "] =";
      for (Eigen::Index j = 0; j < fs.states[t].cov().cols(); ++j) os << " " << fmt(fs.states[t].cov()(i, j));
      os << "\n";
    }
  }
  for (const auto& m : rep.metrics) {
    os << "metric " << m.name << " =";
    for (double v : m.values) os << " " << fmt(v);
    os << " [" << m.unit << "]" << fock_suffix(m.values.front(), m.fock) << "\n";
  }
  return os.str();
}

std::string wigner_grid_csv(const std::function<double(double, double)>& w, const GridSpec& g) {
  const int nx = static_cast<int>(std::floor((g.xmax - g.xmin) / g.step + 1e-9)) + 1;
  const int np = static_cast<int>(std::floor((g.pmax - g.pmin) / g.step + 1e-9)) + 1;
  std::string out = "x,p,w\n";
  out.reserve(static_cast<std::size_t>(nx) * np * 60);
  for (int i = 0; i < nx; ++i) {
    const double x = g.xmin + i * g.step;
    for (int j = 0; j < np; ++j) {
      const double p = g.pmin + j * g.step;
      out += fmt(x) + "," + fmt(p) + "," + fmt(w(x, p)) + "\n";
    }
  }
  return out;
}

void emit_wigner_grid(const std::function<double(double, double)>& w, const GridSpec& grid,
                      const std::string& path) {
  const std::string csv = wigner_grid_csv(w, grid);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << csv;
  if (!f) throw Error("write to '" + path + "' failed");
}

void emit_wigner_grid(const SignedGaussianMixture& state, const GridSpec& grid, const std::string& path) {
  if (state.empty() || state.n_modes() != 1)
    throw InputError("wigner grid: needs a single remaining mode");
  emit_wigner_grid([&](double x, double p) { return state.wigner(PhasePoint{x, p}); }, grid, path);
}

}  // namespace cvtk::circuit
