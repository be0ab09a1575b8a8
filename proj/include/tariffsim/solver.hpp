#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tariffsim/linear_program.hpp"

namespace tariffsim::lp {

struct SolveOptions {
  double lp_tolerance = 1e-7;
  double integrality_tolerance = 1e-5;
  std::size_t max_bb_nodes = 200000;
  double time_limit_s = 3600.0;
  double relative_mip_gap = 1e-6;
  // 0 selects a limit proportional to the problem size.
  std::size_t max_lp_iterations = 0;

  void validate() const;
};

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kLimitReached };

std::string_view to_string(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::kLimitReached;
  std::vector<double> values;
  double objective = 0.0;
  // Best proven lower bound (minimization) and relative incumbent gap.
  double best_bound = -kInfinity;
  double mip_gap = 0.0;
  std::size_t lp_iterations = 0;
  std::size_t nodes = 0;
  std::string diagnostics;

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

// Solves the continuous relaxation with the built-in bounded revised simplex.
Solution solve_lp(const LinearProgram& lp, const SolveOptions& opts = {});

// Best-bound branch-and-bound over the integer variables. A problem without
// integer variables is solved as a single LP.
Solution solve_mip(const LinearProgram& lp, const SolveOptions& opts = {});

// Plug-in boundary for alternative engines. Everything above the solver talks
// to a MipSolver and never to the simplex directly.
class MipSolver {
 public:
  virtual ~MipSolver() = default;
  virtual std::string name() const = 0;
  virtual Solution solve(const LinearProgram& lp, const SolveOptions& opts) const = 0;
};

class BuiltinMipSolver final : public MipSolver {
 public:
  std::string name() const override { return "builtin-simplex-bb"; }
  Solution solve(const LinearProgram& lp, const SolveOptions& opts) const override {
    return solve_mip(lp, opts);
  }
};

std::unique_ptr<MipSolver> make_solver(std::string_view name);

}  // namespace tariffsim::lp
