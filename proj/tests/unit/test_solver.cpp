#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tariffsim/error.hpp"
#include "tariffsim/milp_model.hpp"
#include "tariffsim/solver.hpp"

using namespace tariffsim;
using lp::LinearProgram;
using lp::Sense;
using lp::SolveStatus;

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Random bounded MIP: min c'x, A x <= b, 0 <= x <= u, first k columns integral.
LinearProgram random_mip(std::mt19937_64& rng, int vars, int ints, int rows, int range) {
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_real_distribution<double> pos(0.5, 4.0);
  LinearProgram p;
  for (int j = 0; j < vars; ++j) {
    p.add_variable("x" + std::to_string(j), 0.0, j < ints ? range : pos(rng) * 2, j < ints,
                   coef(rng));
  }
  for (int i = 0; i < rows; ++i) {
    std::vector<lp::Term> terms;
    for (int j = 0; j < vars; ++j) terms.push_back({j, coef(rng)});
    p.add_constraint("r" + std::to_string(i), terms, Sense::kLessEqual, pos(rng) * 3);
  }
  return p;
}

}  // namespace

TEST_CASE("lp: single lower bound") {
  LinearProgram p;
  const int x = p.add_variable("x", 0.0, lp::kInfinity, false, 1.0);
  p.add_constraint("c", {{x, 1.0}}, Sense::kGreaterEqual, 3.0);
  const auto s = lp::solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.values[0] == doctest::Approx(3.0));
  CHECK(s.objective == doctest::Approx(3.0));
}

TEST_CASE("lp: textbook two-variable case") {
  LinearProgram p;
  const int x = p.add_variable("x", 0.0, lp::kInfinity, false, -1.0);
  const int y = p.add_variable("y", 0.0, lp::kInfinity, false, -1.0);
  p.add_constraint("c", {{x, 1.0}, {y, 1.0}}, Sense::kLessEqual, 1.0);
  const auto s = lp::solve_lp(p);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(-1.0));
}

TEST_CASE("lp: infeasible and unbounded are reported as status") {
  LinearProgram inf;
  const int x = inf.add_variable("x", 0.0, 1.0, false, 1.0);
  inf.add_constraint("c", {{x, 1.0}}, Sense::kGreaterEqual, 2.0);
  CHECK(lp::solve_lp(inf).status == SolveStatus::kInfeasible);
  CHECK(lp::solve_mip(inf).status == SolveStatus::kInfeasible);

  LinearProgram unb;
  const int y = unb.add_variable("y", 0.0, lp::kInfinity, false, -1.0);
  unb.add_constraint("c", {{y, 1.0}}, Sense::kGreaterEqual, 1.0);
  CHECK(lp::solve_lp(unb).status == SolveStatus::kUnbounded);
}

TEST_CASE("lp: free variables and equality rows") {
  LinearProgram p;
  const int x = p.add_variable("x", -lp::kInfinity, lp::kInfinity, false, 1.0);
  const int y = p.add_variable("y", -2.0, 5.0, false, 2.0);
  p.add_constraint("e", {{x, 1.0}, {y, 1.0}}, Sense::kEqual, 1.0);
  p.add_constraint("g", {{x, 1.0}, {y, -1.0}}, Sense::kGreaterEqual, -3.0);
  const auto s = lp::solve_lp(p);
  const auto o = oracle::dense_simplex(p);
  REQUIRE(s.optimal());
  REQUIRE(o.status == oracle::LpResult::kOptimal);
  CHECK(s.objective == doctest::Approx(o.objective).epsilon(1e-10));
}

TEST_CASE("mip: rounding by branching") {
  LinearProgram p;
  const int n = p.add_variable("n", 0.0, lp::kInfinity, true, -1.0);
  p.add_constraint("c", {{n, 1.0}}, Sense::kLessEqual, 2.5);
  const auto s = lp::solve_mip(p);
  REQUIRE(s.optimal());
  CHECK(s.values[0] == doctest::Approx(2.0));
  CHECK(s.objective == doctest::Approx(-2.0));
  CHECK(s.best_bound <= s.objective + 1e-9);
}

TEST_CASE("mip without integers equals the LP solve") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 10; ++k) {
    const auto p = random_mip(rng, 6, 0, 5, 0);
    const auto a = lp::solve_lp(p);
    const auto b = lp::solve_mip(p);
    REQUIRE(a.status == b.status);
    if (a.optimal()) CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
  }
}

TEST_CASE("random LPs agree with the dense tableau oracle") {
  std::mt19937_64 rng(23);
  int optimal = 0;
  for (int k = 0; k < 60; ++k) {
    const auto p = random_mip(rng, 8, 0, 6, 0);
    const auto a = lp::solve_lp(p);
    const auto o = oracle::dense_simplex(p);
    if (o.status == oracle::LpResult::kOptimal) {
      ++optimal;
      REQUIRE(a.optimal());
      CHECK(rel_diff(a.objective, o.objective) <= 1e-9);
      CHECK(p.max_violation(a.values) <= 1e-7);
    } else {
      CHECK_FALSE(a.optimal());
    }
  }
  CHECK(optimal > 20);
}

TEST_CASE("small random MIPs equal exhaustive enumeration") {
  std::mt19937_64 rng(29);
  lp::SolveOptions opts;
  opts.relative_mip_gap = 1e-12;
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    const auto p = random_mip(rng, 6, 4, 4, 5);
    const auto s = lp::solve_mip(p, opts);
    const auto e = oracle::enumerate_integers(p);
    if (!e.objective) {
      CHECK(s.status == SolveStatus::kInfeasible);
      continue;
    }
    ++checked;
    REQUIRE(s.optimal());
    CHECK(rel_diff(s.objective, *e.objective) <= 1e-9);
    CHECK(s.best_bound <= s.objective + 1e-9);
    for (int j = 0; j < 4; ++j) CHECK(s.values[j] == std::round(s.values[j]));
  }
  CHECK(checked > 10);
}

TEST_CASE("scaling the objective scales the optimum") {
  std::mt19937_64 rng(31);
  const auto p = random_mip(rng, 6, 3, 4, 4);
  auto q = p;
  for (std::size_t j = 0; j < q.num_variables(); ++j) q.set_cost(static_cast<int>(j), 7.5 * p.objective()[j]);
  const auto a = lp::solve_mip(p);
  const auto b = lp::solve_mip(q);
  REQUIRE(a.status == b.status);
  if (a.optimal()) CHECK(b.objective == doctest::Approx(7.5 * a.objective).epsilon(1e-9));
}

TEST_CASE("toy building relaxation matches the oracle") {
  auto grid = std::make_shared<const TimeGrid>(3600, 10, parse_date("2025-06-02"));
  const auto tariff = make_flat_tariff("reference", *grid, 0.2102, 0.0816);
  oracle::ToyBuildingSpec spec;
  spec.steps = 10;
  spec.seed = 4;
  const auto bp = oracle::toy_building(spec, tariff, grid);
  const auto model = build_problem(bp);
  const auto relaxed = model.lp.relaxation();
  const auto a = lp::solve_lp(relaxed);
  const auto o = oracle::dense_simplex(relaxed);
  REQUIRE(a.optimal());
  REQUIRE(o.status == oracle::LpResult::kOptimal);
  CHECK(rel_diff(a.objective, o.objective) <= 1e-8);
}

TEST_CASE("toy sizing with three integer designs equals enumeration") {
  // min cost of meeting demand 2.5 with integer units of size 1 (cost 3) or
  // a continuous top-up at 2 per unit, at most 2 units.
  LinearProgram p;
  const int n = p.add_variable("n", 0.0, 2.0, true, 3.0);
  const int g = p.add_variable("g", 0.0, lp::kInfinity, false, 2.0);
  p.add_variable("z", 0.0, 1.0, true, 0.5);
  p.add_constraint("d", {{n, 1.0}, {g, 1.0}}, Sense::kGreaterEqual, 2.5);
  const auto s = lp::solve_mip(p);
  const auto e = oracle::enumerate_integers(p);
  REQUIRE(e.objective);
  CHECK(e.assignments == 6);
  CHECK(s.objective == doctest::Approx(*e.objective));
  CHECK(s.objective == doctest::Approx(5.0));
}

TEST_CASE("solver options and factory validation") {
  lp::SolveOptions o;
  CHECK_NOTHROW(o.validate());
  o.lp_tolerance = 0.0;
  CHECK_THROWS_AS(o.validate(), ValidationError);
  CHECK(lp::make_solver("builtin")->name() == "builtin-simplex-bb");
  CHECK_THROWS_AS(lp::make_solver("no-such-solver"), ValidationError);
}

TEST_CASE("LP text output names every section") {
  LinearProgram p;
  const int n = p.add_variable("n", 0.0, 3.0, true, -1.0);
  const int x = p.add_variable("x", 0.0, lp::kInfinity, false, 1.0);
  p.add_constraint("c1", {{n, 1.0}, {x, -1.0}}, Sense::kLessEqual, 1.5);
  std::ostringstream out;
  p.write_lp_format(out);
  const std::string s = out.str();
  for (const char* key : {"Minimize", "Subject To", "c1:", "Bounds", "General", "End"}) {
    CHECK(s.find(key) != std::string::npos);
  }
}

TEST_CASE("invalid problems are rejected") {
  LinearProgram p;
  p.add_variable("x", 1.0, 0.0, false, 1.0);
  CHECK_THROWS_AS(p.validate(), ValidationError);
  LinearProgram q;
  q.add_variable("x", 0.0, 1.0, false, std::nan(""));
  CHECK_THROWS_AS(q.validate(), ValidationError);
}
