#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cvtk/circuit.hpp"
#include "cvtk/fock.hpp"
#include "cvtk/majorization.hpp"

namespace {

using namespace cvtk;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kParse = 2, kPhysicality = 3, kNumerical = 4, kOther = 1 };

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read '" + path + "'");
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

circuit::CircuitSpec load_spec(const std::string& path, bool json) {
  const std::string text = slurp(path);
  circuit::ParseResult res = json ? circuit::parse_circuit_json(text) : circuit::parse_circuit(text);
  if (!res.ok()) throw circuit::ParseError(res.errors);
  return *res.spec;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw Error("write to '" + path.string() + "' failed");
}

std::vector<double> read_csv_numbers(const std::string& path) {
  std::string text = slurp(path);
  for (char& c : text)
    if (c == ',' || c == ';' || c == '\n' || c == '\r' || c == '\t') c = ' ';
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw InputError(path + ": '" + tok + "' is not a number");
    out.push_back(v);
  }
  return out;
}

LogBase parse_base(const std::string& s) {
  if (s == "2") return LogBase::Two;
  if (s == "e") return LogBase::E;
  throw InputError("--log-base must be 2 or e");
}

std::string partial_sums(const ProbVector& p, std::size_t n) {
  std::string out;
  double s = 0.0;
  char buf[40];
  for (double x : p.padded(n).sorted()) {
    s += x;
    std::snprintf(buf, sizeof buf, " %.17g", s);
    out += buf;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cvtk: continuous-variable Gaussian toolkit"};
  app.require_subcommand(1);

  std::string file, log_base = "2", grid_text, out_dir;
  bool oracle = false, json = false;
  int oracle_cutoff = 30;
  auto* run = app.add_subcommand("run", "run a circuit file and print its report");
  run->add_option("file", file, "circuit file")->required();
  run->add_flag("--oracle", oracle, "cross-check against the truncated Fock engine");
  run->add_option("--oracle-cutoff", oracle_cutoff, "Fock cutoff per mode")->check(CLI::Range(1, 200));
  run->add_option("--log-base", log_base, "2 or e")->check(CLI::IsMember({"2", "e"}));
  run->add_option("--grid", grid_text, "Wigner grid xmin:xmax:pmin:pmax:step (single remaining mode)");
  run->add_option("--out", out_dir, "directory for report.txt and wigner.csv");
  run->add_flag("--json", json, "circuit file is the JSON form");

  auto* chk = app.add_subcommand("check", "parse and check physicality only");
  chk->add_option("file", file, "circuit file")->required();
  chk->add_flag("--json", json, "circuit file is the JSON form");

  std::string p_path, q_path;
  auto* maj = app.add_subcommand("majorize", "compare two probability vectors");
  maj->add_option("p", p_path, "CSV of p")->required();
  maj->add_option("q", q_path, "CSV of q")->required();

  std::string state_path, grid_out = "grid.csv";
  int number = -1;
  auto* wig = app.add_subcommand("wigner", "emit a single-mode Wigner grid");
  auto* state_opt = wig->add_option("--state", state_path, "circuit file leaving one mode");
  wig->add_option("--number", number, "number state |n> from the Fock engine")->check(CLI::Range(0, 200))
      ->excludes(state_opt);
  wig->add_option("--grid", grid_text, "xmin:xmax:pmin:pmax:step");
  wig->add_option("--out", grid_out, "output CSV path");
  wig->add_flag("--json", json, "state file is the JSON form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParse;
  }

  try {
    if (*run) {
      const auto spec = load_spec(file, json);
      circuit::RunOptions opts;
      opts.base = parse_base(log_base);
      opts.oracle = oracle;
      opts.oracle_cutoff = oracle_cutoff;
      std::optional<circuit::GridSpec> grid;
      if (!grid_text.empty()) grid = circuit::parse_grid(grid_text);
      const auto report = circuit::run(spec, opts);
      const std::string text = circuit::format_report(report);
      if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "report.txt", text);
      }
      std::cout << text;
      if (grid) {
        const fs::path path = fs::path(out_dir.empty() ? "." : out_dir) / "wigner.csv";
        circuit::emit_wigner_grid(report.final_state, *grid, path.string());
        std::cout << "wigner grid: " << path.string() << "\n";
      }
    } else if (*chk) {
      const auto spec = load_spec(file, json);
      circuit::check(spec);
      std::cout << "ok: " << spec.n_modes << " mode(s), " << spec.ops.size() << " op(s), "
                << spec.measurements.size() << " measurement(s)\n";
    } else if (*maj) {
      const ProbVector p(read_csv_numbers(p_path));
      const ProbVector q(read_csv_numbers(q_path));
      const std::size_t n = std::max(p.size(), q.size());
      std::printf("p_majorizes_q = %s\n", majorizes(p, q) ? "true" : "false");
      std::printf("q_majorizes_p = %s\n", majorizes(q, p) ? "true" : "false");
      std::printf("partial_sums_p =%s\n", partial_sums(p, n).c_str());
      std::printf("partial_sums_q =%s\n", partial_sums(q, n).c_str());
      std::printf("shannon_p = %.17g [nats]\n", shannon_entropy(p));
      std::printf("shannon_q = %.17g [nats]\n", shannon_entropy(q));
    } else if (*wig) {
      const circuit::GridSpec grid = grid_text.empty() ? circuit::GridSpec{} : circuit::parse_grid(grid_text);
      if (number >= 0) {
        circuit::emit_wigner_grid([&](double x, double p) { return fock::number_wigner(number, x, p); }, grid,
                                  grid_out);
      } else {
        if (state_path.empty()) throw InputError("wigner: give --state <file> or --number n");
        const auto report = circuit::run(load_spec(state_path, json));
        circuit::emit_wigner_grid(report.final_state, grid, grid_out);
      }
      std::cout << "wigner grid: " << grid_out << "\n";
    }
  } catch (const circuit::ParseError& e) {
    std::cerr << circuit::format_diagnostics(e.diagnostics(), file.empty() ? state_path : file);
    return kParse;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kParse;
  } catch (const PhysicalityError& e) {
    std::cerr << "physicality violation: " << e.what() << "\n";
    return kPhysicality;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOk;
}
