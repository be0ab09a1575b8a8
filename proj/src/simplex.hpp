#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tariffsim/linear_program.hpp"

namespace tariffsim::lp::detail {

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree, kFixed };

struct Basis {
  std::vector<int> head;
  std::vector<VarStatus> status;

  bool empty() const { return head.empty(); }
};

enum class SimplexResult {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kTimeLimit,
  kNumerical,
};

// Bounded-variable primal revised simplex.
//
// Every row i gets a logical variable r_i = a_i x carrying the row bounds, so
// the working system is A x - r = 0 with simple bounds on all n + m columns.
// Phase 1 minimizes the sum of bound violations of the basic variables and
// hands over to phase 2 as soon as the basis is primal feasible. The basis
// inverse is a sparse LU of the basis matrix followed by a product-form eta
// file, refactored every kRefactorInterval pivots.
class BoundedSimplex {
 public:
  BoundedSimplex(const LinearProgram& lp, double primal_tolerance);

  // Replaces the bounds of the structural columns (branch-and-bound nodes).
  void set_structural_bounds(std::span<const double> lower,
                             std::span<const double> upper);
  void set_iteration_limit(std::size_t limit) { iteration_limit_ = limit; }
  void set_deadline(std::chrono::steady_clock::time_point deadline) {
    deadline_ = deadline;
  }

  // Starts from `warm` when given and factorizable, else from the slack basis.
  SimplexResult solve(const Basis* warm = nullptr);

  std::vector<double> structural_values() const;
  double objective() const;
  Basis basis() const;
  std::size_t iterations() const { return total_iterations_; }
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  static constexpr std::size_t kRefactorInterval = 96;
  static constexpr std::size_t kStallLimit = 60;

  void reset_to_slack_basis();
  bool install_basis(const Basis& warm);
  void place_nonbasic(int j);
  bool refactor();
  void compute_basic_values();
  void ftran(Eigen::VectorXd& v) const;
  void btran(Eigen::VectorXd& v) const;
  void load_column(int j, Eigen::VectorXd& v) const;
  double column_dot(int j, const Eigen::VectorXd& y) const;
  double infeasibility_costs(Eigen::VectorXd& cb) const;
  double phase2_objective() const;
  SimplexResult iterate();

  int m_ = 0;
  int n_ = 0;
  double primal_tol_;
  double dual_tol_ = 1e-9;
  double pivot_tol_ = 1e-9;

  std::vector<int> col_start_;
  std::vector<int> row_idx_;
  std::vector<double> val_;
  std::vector<double> col_weight_;

  std::vector<double> cost_;
  std::vector<double> lb_;
  std::vector<double> ub_;
  double offset_ = 0.0;

  std::vector<double> x_;
  std::vector<int> head_;
  std::vector<int> pos_;
  std::vector<VarStatus> status_;

  struct Eta {
    int row;
    double pivot;
    std::vector<std::pair<int, double>> entries;
  };
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
  bool factored_ = false;

  std::size_t iteration_limit_ = 0;
  std::size_t total_iterations_ = 0;
  std::chrono::steady_clock::time_point deadline_ =
      std::chrono::steady_clock::time_point::max();
  std::string diagnostics_;
};

}  // namespace tariffsim::lp::detail
