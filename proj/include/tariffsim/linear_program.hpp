#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace tariffsim::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  bool integer = false;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kEqual;
  double rhs = 0.0;
};

// Solver-facing description of a minimization problem:
//   min c'x + offset  s.t.  rows, lower <= x <= upper, some x integral.
class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper,
                   bool integer = false, double cost = 0.0);
  int add_constraint(std::string name, std::vector<Term> terms, Sense sense,
                     double rhs);

  void set_cost(int var, double cost) { objective_[var] = cost; }
  void add_cost(int var, double cost) { objective_[var] += cost; }
  void set_objective_offset(double offset) { objective_offset_ = offset; }
  void set_bounds(int var, double lower, double upper);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const std::vector<double>& objective() const { return objective_; }
  double objective_offset() const { return objective_offset_; }

  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  std::size_t num_integer_variables() const;
  std::size_t num_nonzeros() const;

  // Throws ValidationError on non-finite coefficients, dangling variable
  // references or crossed bounds.
  void validate() const;

  double evaluate_objective(std::span<const double> x) const;
  // Largest bound or row violation of a point (absolute).
  double max_violation(std::span<const double> x) const;
  double row_activity(std::size_t row, std::span<const double> x) const;

  // Same problem with every integrality flag dropped.
  LinearProgram relaxation() const;

  // CPLEX LP text format, readable by common external solvers.
  void write_lp_format(std::ostream& out) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  std::vector<double> objective_;
  double objective_offset_ = 0.0;
};

}  // namespace tariffsim::lp
