#pragma once

#include "avgtrack/mpc.hpp"
#include "avgtrack/plant.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace avgtrack::cli {

/// Raised for unreadable files, malformed JSON, and missing or inconsistent
/// keys. The message names the line (for syntax errors) or the key.
class ProblemFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemFile {
  TrackingProblem problem;
  std::optional<Vector> x0;
  MpcConfig mpc;
  Convention convention = Convention::HalfLinearTerms;
};

/// JSON keys: "A", "B", "C", "Q", "R" (nested row-major arrays), "r_ss"
/// (array); optional "x0" (array), "mpc" {"N", "L", "qp_tol"} and
/// "convention" ("half" | "exact").
ProblemFile parse_problem(std::string_view text, std::string_view source = "<input>");
ProblemFile load_problem(const std::string& path);

/// True for the scalar example A = 2, B = 1, C = 1, Q = R = 1, r_ss = 1 under
/// the half convention, whose reference values the benchmark and
/// oracle commands print alongside their own.
bool is_reference_scalar_example(const ProblemFile& pf);

}  // namespace avgtrack::cli
