#include "tariffsim/solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "simplex.hpp"
#include "tariffsim/error.hpp"

namespace tariffsim::lp {

namespace {

using Clock = std::chrono::steady_clock;
using detail::Basis;
using detail::BoundedSimplex;
using detail::SimplexResult;

SolveStatus to_status(SimplexResult r) {
  switch (r) {
    case SimplexResult::kOptimal:
      return SolveStatus::kOptimal;
    case SimplexResult::kInfeasible:
      return SolveStatus::kInfeasible;
    case SimplexResult::kUnbounded:
      return SolveStatus::kUnbounded;
    default:
      return SolveStatus::kLimitReached;
  }
}

Clock::time_point deadline_for(const SolveOptions& opts) {
  if (!std::isfinite(opts.time_limit_s)) return Clock::time_point::max();
  return Clock::now() + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(opts.time_limit_s));
}

struct Node {
  double bound = 0.0;
  std::size_t id = 0;
  std::vector<double> lower;  // integer columns only
  std::vector<double> upper;
  Basis basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

double relative_gap(double incumbent, double bound) {
  if (!std::isfinite(incumbent)) return kInfinity;
  if (!std::isfinite(bound)) return kInfinity;
  return std::max(0.0, incumbent - bound) / std::max(1.0, std::abs(incumbent));
}

}  // namespace

void SolveOptions::validate() const {
  if (!(lp_tolerance > 0.0) || !(integrality_tolerance > 0.0) ||
      !(relative_mip_gap >= 0.0) || !(time_limit_s > 0.0)) {
    throw ValidationError("solver tolerances and limits must be positive");
  }
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal:
      return "optimal";
    case SolveStatus::kInfeasible:
      return "infeasible";
    case SolveStatus::kUnbounded:
      return "unbounded";
    case SolveStatus::kLimitReached:
      return "limit-reached";
  }
  return "unknown";
}

Solution solve_lp(const LinearProgram& lp, const SolveOptions& opts) {
  opts.validate();
  lp.validate();
  BoundedSimplex simplex(lp, opts.lp_tolerance);
  if (opts.max_lp_iterations > 0) simplex.set_iteration_limit(opts.max_lp_iterations);
  simplex.set_deadline(deadline_for(opts));
  const SimplexResult r = simplex.solve();

  Solution sol;
  sol.status = to_status(r);
  sol.lp_iterations = simplex.iterations();
  sol.diagnostics = simplex.diagnostics();
  sol.values = simplex.structural_values();
  sol.objective = simplex.objective();
  if (sol.optimal()) {
    sol.best_bound = sol.objective;
    const double viol = lp.max_violation(sol.values);
    if (viol > opts.lp_tolerance * 10.0) {
      sol.status = SolveStatus::kLimitReached;
      sol.diagnostics = fmt::format("final residual {:.3e} exceeds tolerance", viol);
    }
  }
  return sol;
}

Solution solve_mip(const LinearProgram& lp, const SolveOptions& opts) {
  opts.validate();
  lp.validate();
  std::vector<int> ints;
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    if (lp.variables()[j].integer) ints.push_back(static_cast<int>(j));
  }
  if (ints.empty()) return solve_lp(lp, opts);

  const auto start = Clock::now();
  const auto deadline = deadline_for(opts);
  const double itol = opts.integrality_tolerance;

  std::vector<double> lower(lp.num_variables());
  std::vector<double> upper(lp.num_variables());
  for (std::size_t j = 0; j < lp.num_variables(); ++j) {
    lower[j] = lp.variables()[j].lower;
    upper[j] = lp.variables()[j].upper;
  }
  Solution result;
  for (int j : ints) {
    lower[j] = std::ceil(lower[j] - itol);
    upper[j] = std::floor(upper[j] + itol);
    if (lower[j] > upper[j]) {
      result.status = SolveStatus::kInfeasible;
      result.diagnostics = fmt::format("integer column {} has an empty domain", j);
      return result;
    }
  }

  BoundedSimplex simplex(lp, opts.lp_tolerance);
  if (opts.max_lp_iterations > 0) simplex.set_iteration_limit(opts.max_lp_iterations);
  simplex.set_deadline(deadline);

  double incumbent = kInfinity;
  std::vector<double> incumbent_x;
  std::size_t iterations = 0;

  auto node_bounds = [&](const Node& node) {
    for (std::size_t k = 0; k < ints.size(); ++k) {
      lower[ints[k]] = node.lower[k];
      upper[ints[k]] = node.upper[k];
    }
    simplex.set_structural_bounds(lower, upper);
  };

  auto most_fractional = [&](const std::vector<double>& x) {
    int pick = -1;
    double best = itol;
    for (std::size_t k = 0; k < ints.size(); ++k) {
      const double v = x[ints[k]];
      const double frac = v - std::floor(v);
      const double dist = std::min(frac, 1.0 - frac);
      if (dist > best + 1e-12) {
        best = dist;
        pick = static_cast<int>(k);
      }
    }
    return pick;
  };

  auto accept_incumbent = [&](std::vector<double> x, double obj) {
    for (int j : ints) x[j] = std::round(x[j]);
    const double viol = lp.max_violation(x);
    if (viol > 1e-6 * std::max(1.0, std::abs(obj))) return false;
    const double value = lp.evaluate_objective(x);
    if (value < incumbent) {
      incumbent = value;
      incumbent_x = std::move(x);
      return true;
    }
    return false;
  };

  // Root.
  Node root;
  root.id = 0;
  for (int j : ints) {
    root.lower.push_back(lower[j]);
    root.upper.push_back(upper[j]);
  }
  node_bounds(root);
  SimplexResult r = simplex.solve();
  iterations = simplex.iterations();
  if (r != SimplexResult::kOptimal) {
    result.status = to_status(r);
    result.lp_iterations = iterations;
    result.diagnostics = "root relaxation: " + simplex.diagnostics();
    if (r == SimplexResult::kUnbounded) result.status = SolveStatus::kUnbounded;
    return result;
  }
  double root_bound = simplex.objective();
  Basis root_basis = simplex.basis();

  // Rounding heuristic: fix every integer column at a rounded root value.
  {
    const auto x = simplex.structural_values();
    for (int mode = 0; mode < 2 && std::isinf(incumbent); ++mode) {
      Node fixed = root;
      for (std::size_t k = 0; k < ints.size(); ++k) {
        const double v = x[ints[k]];
        double rv = mode == 0 ? std::ceil(v - itol) : std::round(v);
        rv = std::clamp(rv, root.lower[k], root.upper[k]);
        fixed.lower[k] = fixed.upper[k] = rv;
      }
      node_bounds(fixed);
      if (simplex.solve(&root_basis) == SimplexResult::kOptimal) {
        accept_incumbent(simplex.structural_values(), simplex.objective());
      }
    }
    iterations = simplex.iterations();
  }

  std::priority_queue<Node, std::vector<Node>, WorseNode> open;
  root.bound = root_bound;
  root.basis = std::move(root_basis);
  open.push(std::move(root));
  std::size_t next_id = 1;
  std::size_t nodes = 0;
  bool limit_hit = false;
  double best_bound = root_bound;

  while (!open.empty()) {
    best_bound = std::min(open.top().bound, incumbent);
    if (relative_gap(incumbent, best_bound) <= opts.relative_mip_gap) break;
    if (nodes >= opts.max_bb_nodes || Clock::now() > deadline) {
      limit_hit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (relative_gap(incumbent, node.bound) <= opts.relative_mip_gap &&
        std::isfinite(incumbent)) {
      continue;
    }
    ++nodes;
    node_bounds(node);
    r = simplex.solve(node.basis.empty() ? nullptr : &node.basis);
    if (r == SimplexResult::kInfeasible) continue;
    if (r != SimplexResult::kOptimal) {
      if (r == SimplexResult::kUnbounded) {
        result.status = SolveStatus::kUnbounded;
        result.diagnostics = "unbounded node relaxation";
        return result;
      }
      limit_hit = true;
      result.diagnostics = "node relaxation: " + simplex.diagnostics();
      open.push(std::move(node));
      break;
    }
    const double obj = simplex.objective();
    if (std::isfinite(incumbent) && relative_gap(incumbent, obj) <= opts.relative_mip_gap) {
      continue;
    }
    auto x = simplex.structural_values();
    const int k = most_fractional(x);
    if (k < 0) {
      accept_incumbent(std::move(x), obj);
      continue;
    }
    const double v = x[ints[k]];
    Basis basis = simplex.basis();
    Node down = node;
    down.id = next_id++;
    down.bound = obj;
    down.upper[k] = std::floor(v);
    down.basis = basis;
    Node up = std::move(node);
    up.id = next_id++;
    up.bound = obj;
    up.lower[k] = std::ceil(v);
    up.basis = std::move(basis);
    open.push(std::move(down));
    open.push(std::move(up));
  }
  iterations = simplex.iterations();
  if (open.empty()) best_bound = incumbent;

  result.lp_iterations = iterations;
  result.nodes = nodes;
  if (!std::isfinite(incumbent)) {
    result.status = limit_hit ? SolveStatus::kLimitReached : SolveStatus::kInfeasible;
    result.best_bound = best_bound;
    if (result.diagnostics.empty()) {
      result.diagnostics = limit_hit ? "no incumbent before limit" : "no integer-feasible point";
    }
    return result;
  }
  result.values = std::move(incumbent_x);
  result.objective = incumbent;
  result.best_bound = std::min(best_bound, incumbent);
  result.mip_gap = relative_gap(incumbent, result.best_bound);
  result.status = limit_hit && result.mip_gap > opts.relative_mip_gap
                      ? SolveStatus::kLimitReached
                      : SolveStatus::kOptimal;
  if (result.status == SolveStatus::kLimitReached && result.diagnostics.empty()) {
    result.diagnostics = fmt::format("stopped after {} nodes in {:.1f} s, gap {:.3e}", nodes,
                                     std::chrono::duration<double>(Clock::now() - start).count(),
                                     result.mip_gap);
  }
  return result;
}

std::unique_ptr<MipSolver> make_solver(std::string_view name) {
  if (name.empty() || name == "builtin" || name == "builtin-simplex-bb") {
    return std::make_unique<BuiltinMipSolver>();
  }
  throw ValidationError(fmt::format("unknown solver '{}'", name));
}

}  // namespace tariffsim::lp
