#pragma once

#include <string>
#include <vector>

#include "fieldcalc/ast.hpp"
#include "fieldcalc/diag.hpp"

namespace fieldcalc {

struct ParseResult {
  Program program;
  Report report;
  bool ok() const { return report.ok(); }
};

// Parses one source file. Signature annotation lines (@sig/@stab/@ann)
// immediately precede the definition they attach to and are validated
// for arity and refinement against its type signature.
ParseResult parse_program(const std::string& text, const std::string& filename = "<input>");

// Parses the files in order into one program; duplicate definitions
// across files are diagnosed.
ParseResult parse_files(const std::vector<std::string>& paths);

// Convenience for tests: parse a sort / annotated signature written in
// the source syntax, e.g. "real(real,pr)" or "<real,bool>(<real,bool>,<pr,bool>)[!]".
SortSignature parse_sort_signature(const std::string& text);
AnnotatedSignature parse_annotated_signature(const std::string& text);
Sort parse_sort(const std::string& text);

}  // namespace fieldcalc
