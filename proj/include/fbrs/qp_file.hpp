#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fbrs/newton.hpp"
#include "fbrs/qp_core.hpp"

namespace fbrs {

/**
 * FBQP text format, version 1. Line oriented, whitespace separated, `#` starts
 * a comment that runs to end of line, blank lines are ignored:
 *
 *   FBQP 1
 *   n <int>
 *   q <int>
 *   H            followed by n rows of n floats
 *   f            followed by 1 row of n floats
 *   A            followed by q rows of n floats
 *   b            followed by 1 row of q floats
 *   x0           optional, followed by 1 row of n+q floats (z then v)
 */
struct QpFile {
  QpProblem<double> problem;
  std::optional<PrimalDualPoint<double>> x0;
};

/// Throws ParseError / DimensionMismatch (with line numbers) or InvalidProblem.
QpFile parse_qp(std::string_view text);

QpFile read_qp_file(const std::string& path);

/// Floats are written in shortest round-trip form, so parse ∘ serialize is exact.
std::string serialize_qp(const QpProblem<double>& problem,
                         const std::optional<PrimalDualPoint<double>>& x0 = {});

inline constexpr std::string_view kTraceCsvHeader =
    "iter,norm_Feps,norm_F0,norm_Fnr,t,delta,eps,backtracks";

/// One row per iterate, floats with 17 significant digits.
void write_trace_csv(std::ostream& out,
                     const std::vector<IterationRecord<double>>& trace);

}  // namespace fbrs
