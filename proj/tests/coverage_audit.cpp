// Runs every test case named in coverage_trace.json and checks that each
// required tag maps to at least one case and that every mapped case passes.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <string>
#include <sys/wait.h>
#include <utility>

#include <json.hpp>

namespace {

struct CaseResult {
  bool passed = false;
  std::string detail;
};

// doctest splits filters on unescaped commas; the shell sees single quotes.
std::string filter_arg(const std::string& name) {
  std::string out = "'";
  for (char c : name) {
    if (c == '\'') {
      out += "'\\''";
    } else if (c == ',') {
      out += "\\,";
    } else {
      out += c;
    }
  }
  return out + "'";
}

CaseResult run_case(const std::string& binary, const std::string& name) {
  const std::string cmd = std::string(CVTK_TEST_BIN_DIR) + "/" + binary +
                          " --no-version -tc=" + filter_arg(name) + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {false, "popen failed"};
  std::string output;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) output += buf;
  const int status = pclose(pipe);
  const bool exited_ok = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  if (!exited_ok) return {false, "nonzero exit"};
  static const std::regex summary(R"(test cases:\s*1\s*\|\s*1 passed\s*\|\s*0 failed)");
  if (!std::regex_search(output, summary)) {
    return {false, "filter did not select exactly one passing case"};
  }
  return {true, ""};
}

}  // namespace

int main() {
  nlohmann::json doc;
  try {
    std::ifstream in(CVTK_TRACE_FILE);
    if (!in) {
      std::cout << "FAIL cannot open " << CVTK_TRACE_FILE << "\n";
      return 1;
    }
    in >> doc;
  } catch (const std::exception& e) {
    std::cout << "FAIL trace parse: " << e.what() << "\n";
    return 1;
  }

  const auto& trace = doc.at("trace");
  std::map<std::pair<std::string, std::string>, CaseResult> cache;
  int ok = 0, missing = 0, failed = 0;

  for (const auto& tag_json : doc.at("required")) {
    const std::string tag = tag_json.get<std::string>();
    if (!trace.contains(tag) || trace.at(tag).empty()) {
      std::cout << "MISSING " << tag << "\n";
      ++missing;
      continue;
    }
    bool tag_ok = true;
    for (const auto& entry : trace.at(tag)) {
      const auto key = std::make_pair(entry.at("binary").get<std::string>(),
                                      entry.at("case").get<std::string>());
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, run_case(key.first, key.second)).first;
      if (!it->second.passed) {
        std::cout << "FAIL " << tag << ": " << key.first << " \"" << key.second
                  << "\" (" << it->second.detail << ")\n";
        tag_ok = false;
      }
    }
    if (tag_ok) {
      std::cout << "OK " << tag << " (" << trace.at(tag).size() << " case(s))\n";
      ++ok;
    } else {
      ++failed;
    }
  }

  std::cout << "coverage: " << ok << " ok, " << missing << " missing, " << failed
            << " failed, " << cache.size() << " distinct cases run\n";
  return (missing == 0 && failed == 0) ? 0 : 1;
}
