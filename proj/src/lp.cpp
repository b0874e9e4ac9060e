#include "sdfkit/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "sdfkit/error.hpp"

namespace sdfkit::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// How an original variable maps onto standard-form columns.
struct ColumnMap {
  enum class Kind { Shifted, Reflected, Split } kind;
  Eigen::Index column;  // first standard-form column
  double offset;        // l for Shifted, u for Reflected
};

// maximize c.x  s.t.  A x = b,  0 <= x <= u, on a dense tableau.
class BoundedSimplex {
 public:
  BoundedSimplex(const Mat& a, const Vec& b, const Vec& upper, const Options& opt)
      : m_(a.rows()), n_(a.cols()), opt_(opt) {
    // Columns [0, n) are structural, [n, n+m) are artificials.
    tableau_ = Mat::Zero(m_, n_ + m_);
    upper_ = Vec::Zero(n_ + m_);
    upper_.head(n_) = upper;
    upper_.tail(m_).setConstant(kInf);
    xb_.resize(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sign = b(i) < 0.0 ? -1.0 : 1.0;
      tableau_.row(i).head(n_) = sign * a.row(i);
      tableau_(i, n_ + i) = 1.0;
      xb_(i) = sign * b(i);
    }
    a_std_ = a;
    b_std_ = b;
    basis_.resize(static_cast<std::size_t>(m_));
    for (Eigen::Index i = 0; i < m_; ++i) basis_[static_cast<std::size_t>(i)] = n_ + i;
    is_basic_.assign(static_cast<std::size_t>(n_ + m_), 0);
    for (Eigen::Index i = 0; i < m_; ++i) is_basic_[static_cast<std::size_t>(n_ + i)] = 1;
    at_upper_.assign(static_cast<std::size_t>(n_ + m_), 0);
    iteration_cap_ = opt.max_iterations > 0 ? opt.max_iterations : static_cast<int>(200 * (m_ + n_) + 2000);
  }

  Status run(const Vec& structural_cost) {
    // Phase 1: maximize -sum(artificials).
    Vec cost1 = Vec::Zero(n_ + m_);
    cost1.tail(m_).setConstant(-1.0);
    const Status s1 = iterate(cost1);
    if (s1 != Status::Optimal) return Status::NumericalFailure;
    double infeasibility = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (basis_[static_cast<std::size_t>(i)] >= n_) infeasibility += std::max(0.0, xb_(i));
    const double scale = 1.0 + (m_ > 0 ? b_std_.cwiseAbs().maxCoeff() : 0.0);
    if (infeasibility > opt_.feasibility_tolerance * scale) return Status::Infeasible;

    drive_out_artificials();
    for (Eigen::Index j = n_; j < n_ + m_; ++j) upper_(j) = 0.0;

    Vec cost2 = Vec::Zero(n_ + m_);
    cost2.head(n_) = structural_cost;
    const Status s2 = iterate(cost2);
    if (s2 != Status::Optimal) return s2;
    refine_basic_values();
    return Status::Optimal;
  }

  Vec structural_values() const {
    Vec x = Vec::Zero(n_);
    for (Eigen::Index j = 0; j < n_; ++j)
      if (!is_basic_[static_cast<std::size_t>(j)] && at_upper_[static_cast<std::size_t>(j)]) x(j) = upper_(j);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) x(j) = xb_(i);
    }
    return x;
  }

  int iterations() const { return iterations_; }

 private:
  Status iterate(const Vec& cost) {
    // Reduced costs d = c - c_B^T T.
    Vec reduced = cost;
    for (Eigen::Index i = 0; i < m_; ++i) reduced -= cost(basis_[static_cast<std::size_t>(i)]) * tableau_.row(i).transpose();

    const double opt_tol = opt_.optimality_tolerance * std::max(1.0, cost.cwiseAbs().maxCoeff());
    while (true) {
      if (iterations_ >= iteration_cap_) return Status::NumericalFailure;

      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < n_ + m_; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (is_basic_[js] || upper_(j) <= 0.0) continue;
        if ((!at_upper_[js] && reduced(j) > opt_tol) || (at_upper_[js] && reduced(j) < -opt_tol)) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return Status::Optimal;
      ++iterations_;

      const double dir = at_upper_[static_cast<std::size_t>(entering)] ? -1.0 : 1.0;
      double step = upper_(entering);
      Eigen::Index leave = -1;
      bool leave_to_upper = false;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double alpha = dir * tableau_(i, entering);
        const Eigen::Index var = basis_[static_cast<std::size_t>(i)];
        double limit;
        bool to_upper;
        if (alpha > opt_.pivot_tolerance) {
          limit = std::max(0.0, xb_(i)) / alpha;
          to_upper = false;
        } else if (alpha < -opt_.pivot_tolerance && std::isfinite(upper_(var))) {
          limit = std::max(0.0, upper_(var) - xb_(i)) / -alpha;
          to_upper = true;
        } else {
          continue;
        }
        const bool better = limit < step;
        const bool tie = leave >= 0 && limit == step && var < basis_[static_cast<std::size_t>(leave)];
        if (better || tie) {
          step = limit;
          leave = i;
          leave_to_upper = to_upper;
        }
      }
      if (leave < 0 && !std::isfinite(step)) return Status::Unbounded;

      xb_ -= (dir * step) * tableau_.col(entering);
      if (leave < 0) {
        at_upper_[static_cast<std::size_t>(entering)] ^= 1;
        clamp_basic_values();
        continue;
      }

      const double entering_value =
          at_upper_[static_cast<std::size_t>(entering)] ? upper_(entering) - step : step;
      const Eigen::Index leaving = basis_[static_cast<std::size_t>(leave)];
      pivot(leave, entering, reduced);
      is_basic_[static_cast<std::size_t>(leaving)] = 0;
      at_upper_[static_cast<std::size_t>(leaving)] = leave_to_upper ? 1 : 0;
      is_basic_[static_cast<std::size_t>(entering)] = 1;
      at_upper_[static_cast<std::size_t>(entering)] = 0;
      basis_[static_cast<std::size_t>(leave)] = entering;
      xb_(leave) = entering_value;
      clamp_basic_values();
    }
  }

  void pivot(Eigen::Index r, Eigen::Index j, Vec& reduced) {
    tableau_.row(r) /= tableau_(r, j);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = tableau_(i, j);
      if (f != 0.0) tableau_.row(i) -= f * tableau_.row(r);
    }
    const double f = reduced(j);
    if (f != 0.0) reduced -= f * tableau_.row(r).transpose();
  }

  void clamp_basic_values() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double u = upper_(basis_[static_cast<std::size_t>(i)]);
      if (xb_(i) < 0.0 && xb_(i) > -opt_.feasibility_tolerance) xb_(i) = 0.0;
      if (std::isfinite(u) && xb_(i) > u && xb_(i) < u + opt_.feasibility_tolerance) xb_(i) = u;
    }
  }

  void drive_out_artificials() {
    Vec unused = Vec::Zero(n_ + m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        const auto js = static_cast<std::size_t>(j);
        if (is_basic_[js] || std::abs(tableau_(i, j)) <= opt_.pivot_tolerance) continue;
        const Eigen::Index leaving = basis_[static_cast<std::size_t>(i)];
        pivot(i, j, unused);
        is_basic_[static_cast<std::size_t>(leaving)] = 0;
        at_upper_[static_cast<std::size_t>(leaving)] = 0;
        xb_(i) = at_upper_[js] ? upper_(j) : 0.0;
        is_basic_[js] = 1;
        at_upper_[js] = 0;
        basis_[static_cast<std::size_t>(i)] = j;
        break;
      }
      // A row with no eligible pivot is redundant; its artificial stays basic at zero.
    }
  }

  // Recompute x_B = B^-1 (b - N x_N) from the original columns to shed
  // accumulated tableau round-off.
  void refine_basic_values() {
    if (m_ == 0) return;
    Mat basis_matrix(m_, m_);
    Vec rhs = b_std_;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) {
        basis_matrix.col(i) = a_std_.col(j);
      } else {
        basis_matrix.col(i).setZero();
        basis_matrix(j - n_, i) = b_std_(j - n_) < 0.0 ? -1.0 : 1.0;
      }
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (!is_basic_[js] && at_upper_[js]) rhs -= upper_(j) * a_std_.col(j);
    }
    Eigen::FullPivLU<Mat> lu(basis_matrix);
    if (!lu.isInvertible()) return;
    const Vec refined = lu.solve(rhs);
    if (refined.allFinite()) xb_ = refined;
    clamp_basic_values();
  }

  Eigen::Index m_, n_;
  Options opt_;
  Mat tableau_;
  Mat a_std_;
  Vec b_std_;
  Vec upper_;
  Vec xb_;
  std::vector<Eigen::Index> basis_;
  std::vector<char> is_basic_;
  std::vector<char> at_upper_;
  int iterations_ = 0;
  int iteration_cap_ = 0;
};

double max_violation(const Problem& p, const Vec& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.a.rows(); ++i) {
    const double lhs = p.a.row(i).dot(x);
    const double scale = 1.0 + std::abs(p.rhs(i)) + p.a.row(i).cwiseAbs().dot(x.cwiseAbs());
    double v = 0.0;
    switch (p.sense[static_cast<std::size_t>(i)]) {
      case Sense::Equal: v = std::abs(lhs - p.rhs(i)); break;
      case Sense::LessEqual: v = std::max(0.0, lhs - p.rhs(i)); break;
      case Sense::GreaterEqual: v = std::max(0.0, p.rhs(i) - lhs); break;
    }
    worst = std::max(worst, v / scale);
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double scale = 1.0 + std::abs(x(j));
    if (std::isfinite(p.lower(j))) worst = std::max(worst, (p.lower(j) - x(j)) / scale);
    if (std::isfinite(p.upper(j))) worst = std::max(worst, (x(j) - p.upper(j)) / scale);
  }
  return worst;
}

Solution solve_once(const Problem& p, const Options& opt) {
  const Eigen::Index rows = p.a.rows();
  const Eigen::Index cols = p.a.cols();

  std::vector<ColumnMap> maps;
  Eigen::Index std_cols = 0;
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (std::isfinite(p.lower(j))) {
      maps.push_back({ColumnMap::Kind::Shifted, std_cols++, p.lower(j)});
    } else if (std::isfinite(p.upper(j))) {
      maps.push_back({ColumnMap::Kind::Reflected, std_cols++, p.upper(j)});
    } else {
      maps.push_back({ColumnMap::Kind::Split, std_cols, 0.0});
      std_cols += 2;
    }
  }
  Eigen::Index slack_cols = 0;
  for (const Sense s : p.sense)
    if (s != Sense::Equal) ++slack_cols;

  Mat a = Mat::Zero(rows, std_cols + slack_cols);
  Vec b = p.rhs;
  Vec c = Vec::Zero(std_cols + slack_cols);
  Vec u = Vec::Constant(std_cols + slack_cols, kInf);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const ColumnMap& cm = maps[static_cast<std::size_t>(j)];
    switch (cm.kind) {
      case ColumnMap::Kind::Shifted:
        a.col(cm.column) = p.a.col(j);
        b -= cm.offset * p.a.col(j);
        c(cm.column) = p.objective(j);
        u(cm.column) = p.upper(j) - p.lower(j);
        break;
      case ColumnMap::Kind::Reflected:
        a.col(cm.column) = -p.a.col(j);
        b -= cm.offset * p.a.col(j);
        c(cm.column) = -p.objective(j);
        break;
      case ColumnMap::Kind::Split:
        a.col(cm.column) = p.a.col(j);
        a.col(cm.column + 1) = -p.a.col(j);
        c(cm.column) = p.objective(j);
        c(cm.column + 1) = -p.objective(j);
        break;
    }
  }
  Eigen::Index slack = std_cols;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Sense s = p.sense[static_cast<std::size_t>(i)];
    if (s == Sense::LessEqual) a(i, slack++) = 1.0;
    if (s == Sense::GreaterEqual) a(i, slack++) = -1.0;
  }
  // Row equilibration.
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double scale = a.row(i).cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      a.row(i) /= scale;
      b(i) /= scale;
    }
  }

  BoundedSimplex simplex(a, b, u, opt);
  Solution sol;
  sol.status = simplex.run(c);
  sol.iterations = simplex.iterations();
  if (sol.status != Status::Optimal) return sol;

  const Vec xs = simplex.structural_values();
  sol.x.resize(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const ColumnMap& cm = maps[static_cast<std::size_t>(j)];
    switch (cm.kind) {
      case ColumnMap::Kind::Shifted: sol.x(j) = cm.offset + xs(cm.column); break;
      case ColumnMap::Kind::Reflected: sol.x(j) = cm.offset - xs(cm.column); break;
      case ColumnMap::Kind::Split: sol.x(j) = xs(cm.column) - xs(cm.column + 1); break;
    }
  }
  sol.objective = p.objective.dot(sol.x);
  sol.max_violation = max_violation(p, sol.x);
  if (sol.max_violation > 1e-7) sol.status = Status::NumericalFailure;
  return sol;
}

}  // namespace

Problem Problem::with_variables(Eigen::Index cols) {
  Problem p;
  p.a.resize(0, cols);
  p.rhs.resize(0);
  p.objective = Vec::Zero(cols);
  p.lower = Vec::Zero(cols);
  p.upper = Vec::Constant(cols, kInf);
  return p;
}

void Problem::add_row(const Vec& coefficients, Sense s, double value) {
  if (coefficients.size() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "LP row has the wrong width");
  a.conservativeResize(a.rows() + 1, Eigen::NoChange);
  a.row(a.rows() - 1) = coefficients.transpose();
  rhs.conservativeResize(rhs.size() + 1);
  rhs(rhs.size() - 1) = value;
  sense.push_back(s);
}

Solution solve(const Problem& problem, const Options& options) {
  const Eigen::Index cols = problem.a.cols();
  if (problem.rhs.size() != problem.a.rows() || static_cast<Eigen::Index>(problem.sense.size()) != problem.a.rows() ||
      problem.objective.size() != cols || problem.lower.size() != cols || problem.upper.size() != cols)
    throw Error(ErrorCode::DimensionMismatch, "inconsistent LP dimensions");
  for (Eigen::Index j = 0; j < cols; ++j)
    if (problem.lower(j) > problem.upper(j)) {
      Solution s;
      s.status = Status::Infeasible;
      return s;
    }

  Solution first = solve_once(problem, options);
  if (first.status != Status::NumericalFailure) return first;
  Options retry = options;
  retry.pivot_tolerance = options.pivot_tolerance * 1e-2;
  retry.max_iterations = options.max_iterations > 0 ? 4 * options.max_iterations : 0;
  Solution second = solve_once(problem, retry);
  second.iterations += first.iterations;
  return second;
}

}  // namespace sdfkit::lp
