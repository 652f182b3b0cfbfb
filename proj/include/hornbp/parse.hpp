#pragma once

#include <string>
#include <string_view>

#include "hornbp/kb.hpp"

namespace hornbp {

struct ParseError : std::runtime_error {
  int line = 0;
  int column = 0;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        line(l),
        column(c) {}
};

/// Parse the textual KB format:
///
///   pred <name>/<arity> [(role, ...)].
///   builtin <name>/<arity>.
///   [<p> ::] <name>(<const>, ...).
///   [learned ::] <head> [| <head>]* <- <atom>, ... .
///   # comment to end of line
///
/// Rules are assigned ids r1, r2, ... in file order. Predicates must be
/// declared before use. Throws ParseError with position on any violation;
/// arity mismatches, undeclared predicates and duplicate facts are
/// parse-time errors.
KnowledgeBase parse_kb(std::string_view text);

/// Parse a single ground proposition such as `likes(jack, jill)` or a bare
/// nullary `rain`. Arguments must be constants. Throws ParseError.
Proposition parse_proposition(std::string_view text);

}  // namespace hornbp
