#pragma once

#include <string>
#include <vector>

namespace fieldcalc {

struct SourceLocation {
  std::string file;
  int line = 0;    // 1-based; 0 when synthetic
  int column = 0;

  bool valid() const { return line > 0 && column > 0; }
  std::string to_string() const;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceLocation location;
  std::string rule;  // e.g. "T-FUN", "S-SPR", "SANITY-III"
  std::string message;

  std::string to_string() const;
  std::string to_json() const;
};

struct Report {
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics) {
      if (d.severity == Severity::Error) return false;
    }
    return true;
  }
  void error(SourceLocation loc, std::string rule, std::string message) {
    diagnostics.push_back({Severity::Error, std::move(loc), std::move(rule), std::move(message)});
  }
  void warning(SourceLocation loc, std::string rule, std::string message) {
    diagnostics.push_back(
        {Severity::Warning, std::move(loc), std::move(rule), std::move(message)});
  }
  void append(const Report& other) {
    diagnostics.insert(diagnostics.end(), other.diagnostics.begin(), other.diagnostics.end());
  }
};

}  // namespace fieldcalc
