#ifndef PVCAGG_SYNTAX_HPP
#define PVCAGG_SYNTAX_HPP

#include <string>
#include <string_view>

#include "pvcagg/algebra.hpp"

namespace pvcagg {

// Textual expression syntax (see README for the full grammar):
//
//   x1*y11*(z1+z5)                         semiring expression
//   max{x1*y11 (x) 10 + x2 (x) 50}         semimodule sum with monoid tag
//   [min{x (x) 10 + y (x) 20} <= 15]       conditional
//
// `(x)` (or U+2297) is the scalar action. A bare number or inf opposite a
// semimodule side of a comparison is a monoid constant of that side's kind.
// Printing is the exact inverse of parsing: parse(print(e)) == e.

Operand parse_expression(std::string_view text);
SemiringExpr parse_semiring(std::string_view text);
SemimoduleExpr parse_semimodule(std::string_view text);

std::string print(const SemiringExpr& expr);
std::string print(const SemimoduleExpr& expr);
std::string print(const Operand& expr);

}  // namespace pvcagg

#endif  // PVCAGG_SYNTAX_HPP
