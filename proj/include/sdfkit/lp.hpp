#pragma once

#include <vector>

#include "sdfkit/market.hpp"

namespace sdfkit::lp {

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

/// maximize objective . x  subject to  a x (sense) rhs,  lower <= x <= upper.
/// Bounds may be infinite; a free variable has lower = -inf and upper = +inf.
struct Problem {
  Mat a;
  Vec rhs;
  std::vector<Sense> sense;
  Vec objective;
  Vec lower;
  Vec upper;

  /// Empty problem with `cols` variables, all bounded to [0, +inf) and zero cost.
  static Problem with_variables(Eigen::Index cols);
  void add_row(const Vec& coefficients, Sense s, double value);
};

struct Options {
  double pivot_tolerance = 1e-9;
  double optimality_tolerance = 1e-10;
  double feasibility_tolerance = 1e-9;
  int max_iterations = 0;  // 0 picks a limit from the problem size
};

struct Solution {
  Status status = Status::NumericalFailure;
  Vec x;
  double objective = 0.0;
  int iterations = 0;
  double max_violation = 0.0;  // largest scaled constraint or bound violation of x
};

/// Dense two-phase primal simplex for bounded variables.
///
/// Entering and leaving variables follow Bland's lowest-index rule, so the
/// method cannot cycle and the output is a deterministic function of the
/// input. Rows are equilibrated before solving. If the final point fails the
/// feasibility check, or the iteration cap is hit, the solve is retried once
/// with a tighter pivot tolerance before NumericalFailure is reported.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace sdfkit::lp
