#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sdfkit/lp.hpp"

using namespace sdfkit;
using namespace sdfkit::lp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec row(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

// Best objective over all vertices of a 2-variable polygon given as
// a x <= b rows (box bounds included as rows).
double vertex_enumeration(const std::vector<Vec>& a, const std::vector<double>& b, const Vec& c, bool* feasible) {
  double best = -kInf;
  *feasible = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double det = a[i](0) * a[j](1) - a[i](1) * a[j](0);
      if (std::abs(det) < 1e-12) continue;
      const double x = (b[i] * a[j](1) - a[i](1) * b[j]) / det;
      const double y = (a[i](0) * b[j] - b[i] * a[j](0)) / det;
      bool ok = true;
      for (std::size_t k = 0; k < a.size(); ++k) ok = ok && a[k](0) * x + a[k](1) * y <= b[k] + 1e-9;
      if (!ok) continue;
      *feasible = true;
      best = std::max(best, c(0) * x + c(1) * y);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("textbook maximization") {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
  Problem p = Problem::with_variables(2);
  p.objective = row({3, 5});
  p.add_row(row({1, 0}), Sense::LessEqual, 4);
  p.add_row(row({0, 2}), Sense::LessEqual, 12);
  p.add_row(row({3, 2}), Sense::LessEqual, 18);
  const Solution s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(36.0));
  CHECK(s.x(0) == doctest::Approx(2.0));
  CHECK(s.x(1) == doctest::Approx(6.0));
}

TEST_CASE("equalities, free and bounded variables") {
  // max x - y, x + y = 1, x free, -2 <= y <= 3 -> y = -2, x = 3
  Problem p = Problem::with_variables(2);
  p.objective = row({1, -1});
  p.lower = row({-kInf, -2});
  p.upper = row({kInf, 3});
  p.add_row(row({1, 1}), Sense::Equal, 1);
  const Solution s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.x(0) == doctest::Approx(3.0));
  CHECK(s.x(1) == doctest::Approx(-2.0));
}

TEST_CASE("infeasible and unbounded") {
  Problem p = Problem::with_variables(1);
  p.objective = row({1});
  p.add_row(row({1}), Sense::GreaterEqual, 2);
  p.add_row(row({1}), Sense::LessEqual, 1);
  CHECK(solve(p).status == Status::Infeasible);

  Problem q = Problem::with_variables(2);
  q.objective = row({1, 1});
  q.add_row(row({1, -1}), Sense::LessEqual, 1);
  CHECK(solve(q).status == Status::Unbounded);
}

TEST_CASE("degenerate problem terminates") {
  // classic cycling example under the largest-coefficient rule
  Problem p = Problem::with_variables(4);
  p.objective = row({0.75, -20, 0.5, -6});
  p.add_row(row({0.25, -8, -1, 9}), Sense::LessEqual, 0);
  p.add_row(row({0.5, -12, -0.5, 3}), Sense::LessEqual, 0);
  p.add_row(row({0, 0, 1, 0}), Sense::LessEqual, 1);
  const Solution s = solve(p);
  REQUIRE(s.status == Status::Optimal);
  CHECK(s.objective == doctest::Approx(1.25));
}

TEST_CASE("property: random 2-variable LPs match vertex enumeration") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> coef(-6, 6);
  int agree = 0, total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    Problem p = Problem::with_variables(2);
    p.lower = row({-10, -10});
    p.upper = row({10, 10});
    p.objective = row({double(coef(rng)), double(coef(rng))});
    std::vector<Vec> a{row({1, 0}), row({-1, 0}), row({0, 1}), row({0, -1})};
    std::vector<double> b{10, 10, 10, 10};
    const int rows = 1 + trial % 5;
    for (int k = 0; k < rows; ++k) {
      const Vec r = row({double(coef(rng)), double(coef(rng))});
      const double rhs = coef(rng);
      if (trial % 3 == 0) {
        p.add_row(r, Sense::GreaterEqual, rhs);
        a.push_back(-r);
        b.push_back(-rhs);
      } else {
        p.add_row(r, Sense::LessEqual, rhs);
        a.push_back(r);
        b.push_back(rhs);
      }
    }
    bool feasible = false;
    const double best = vertex_enumeration(a, b, p.objective, &feasible);
    const Solution s = solve(p);
    ++total;
    if (!feasible) {
      agree += s.status == Status::Infeasible;
    } else if (s.status == Status::Optimal) {
      agree += std::abs(s.objective - best) <= 1e-8 * (1.0 + std::abs(best));
      CHECK(s.max_violation <= 1e-9);
    }
  }
  CHECK(agree == total);
}

TEST_CASE("deterministic output") {
  Problem p = Problem::with_variables(3);
  p.objective = row({1, 1, 1});
  p.add_row(row({1, 1, 0}), Sense::LessEqual, 1);
  p.add_row(row({0, 1, 1}), Sense::LessEqual, 1);
  const Solution a = solve(p), b = solve(p);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}
