#include "fieldcalc/diag.hpp"

#include <nlohmann/json.hpp>

namespace fieldcalc {

std::string SourceLocation::to_string() const {
  if (!valid()) return file.empty() ? "<unknown>" : file;
  return file + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::string Diagnostic::to_string() const {
  std::string out = location.to_string() + ": ";
  out += severity == Severity::Error ? "error" : "warning";
  if (!rule.empty()) out += " [" + rule + "]";
  return out + ": " + message;
}

std::string Diagnostic::to_json() const {
  nlohmann::json j;
  j["severity"] = severity == Severity::Error ? "error" : "warning";
  j["location"] = {{"file", location.file}, {"line", location.line}, {"column", location.column}};
  j["ruleName"] = rule;
  j["message"] = message;
  return j.dump();
}

}  // namespace fieldcalc
