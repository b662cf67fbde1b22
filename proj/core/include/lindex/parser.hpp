#pragma once

#include <string_view>

#include "lindex/expr.hpp"

namespace lindex {

// Analytic functions admit z1..zn; weight components admit |z1|..|zn| and |z|
// instead. Both share
//
//   expr   := ['-'] term (('+' | '-') term)*
//   term   := factor ('*' factor)*
//   factor := atom ('^' uint)?
//   atom   := number | 'z'uint | '|z'uint'|' | '|z|' | '(' expr ')'
//           | 'exp(' expr ')' | '1/(' expr ')'
//
// Nodes carry their source span. Errors: SyntaxError (with line and column),
// ArityError for a variable index outside 1..n, DomainError for a node of the
// other grammar.
enum class Grammar { analytic, weight };

Expr parse_expression(std::string_view text, int n, Grammar grammar = Grammar::analytic);

}  // namespace lindex
