#include "tariffsim/linear_program.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "tariffsim/error.hpp"

namespace tariffsim::lp {

namespace {

// LP-format identifiers may not contain spaces or a handful of operators.
std::string lp_name(const std::string& name, const char* fallback, std::size_t idx) {
  if (name.empty()) return fmt::format("{}{}", fallback, idx);
  std::string out = name;
  for (char& ch : out) {
    switch (ch) {
      case ' ':
      case ':':
      case '+':
      case '-':
      case '*':
      case '^':
      case '<':
      case '>':
      case '=':
        ch = '_';
        break;
      default:
        break;
    }
  }
  if (std::isdigit(static_cast<unsigned char>(out.front())) || out.front() == '.') {
    out.insert(out.begin(), '_');
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

int LinearProgram::add_variable(std::string name, double lower, double upper,
                                bool integer, double cost) {
  variables_.push_back(Variable{std::move(name), lower, upper, integer});
  objective_.push_back(cost);
  return static_cast<int>(variables_.size()) - 1;
}

int LinearProgram::add_constraint(std::string name, std::vector<Term> terms,
                                  Sense sense, double rhs) {
  constraints_.push_back(Constraint{std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(constraints_.size()) - 1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  variables_[var].lower = lower;
  variables_[var].upper = upper;
}

std::size_t LinearProgram::num_integer_variables() const {
  return static_cast<std::size_t>(std::count_if(
      variables_.begin(), variables_.end(), [](const Variable& v) { return v.integer; }));
}

std::size_t LinearProgram::num_nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& c : constraints_) nnz += c.terms.size();
  return nnz;
}

void LinearProgram::validate() const {
  const int n = static_cast<int>(variables_.size());
  for (int j = 0; j < n; ++j) {
    const auto& v = variables_[j];
    if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInfinity ||
        v.upper == -kInfinity) {
      throw ValidationError(fmt::format("variable '{}' has invalid bounds", v.name));
    }
    if (v.lower > v.upper) {
      throw ValidationError(fmt::format("variable '{}' has crossed bounds [{}, {}]",
                                        v.name, v.lower, v.upper));
    }
    if (!std::isfinite(objective_[j])) {
      throw ValidationError(fmt::format("variable '{}' has a non-finite cost", v.name));
    }
  }
  for (const auto& c : constraints_) {
    if (!std::isfinite(c.rhs)) {
      throw ValidationError(fmt::format("constraint '{}' has a non-finite rhs", c.name));
    }
    for (const auto& t : c.terms) {
      if (t.var < 0 || t.var >= n) {
        throw ValidationError(fmt::format(
            "constraint '{}' references undeclared variable {}", c.name, t.var));
      }
      if (!std::isfinite(t.coef)) {
        throw ValidationError(
            fmt::format("constraint '{}' has a non-finite coefficient", c.name));
      }
    }
  }
  if (!std::isfinite(objective_offset_)) {
    throw ValidationError("objective offset is not finite");
  }
}

double LinearProgram::evaluate_objective(std::span<const double> x) const {
  double obj = objective_offset_;
  for (std::size_t j = 0; j < objective_.size(); ++j) obj += objective_[j] * x[j];
  return obj;
}

double LinearProgram::row_activity(std::size_t row, std::span<const double> x) const {
  double a = 0.0;
  for (const auto& t : constraints_[row].terms) a += t.coef * x[t.var];
  return a;
}

double LinearProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, variables_[j].lower - x[j]);
    worst = std::max(worst, x[j] - variables_[j].upper);
  }
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const double a = row_activity(i, x);
    const auto& c = constraints_[i];
    switch (c.sense) {
      case Sense::kLessEqual:
        worst = std::max(worst, a - c.rhs);
        break;
      case Sense::kGreaterEqual:
        worst = std::max(worst, c.rhs - a);
        break;
      case Sense::kEqual:
        worst = std::max(worst, std::abs(a - c.rhs));
        break;
    }
  }
  return worst;
}

LinearProgram LinearProgram::relaxation() const {
  LinearProgram out = *this;
  for (auto& v : out.variables_) v.integer = false;
  return out;
}

void LinearProgram::write_lp_format(std::ostream& out) const {
  std::vector<std::string> names(variables_.size());
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    names[j] = lp_name(variables_[j].name, "x", j);
  }
  auto write_terms = [&](auto&& terms) {
    std::size_t written = 0;
    for (const auto& [var, coef] : terms) {
      if (coef == 0.0) continue;
      out << (coef < 0 ? " - " : (written ? " + " : " ")) << num(std::abs(coef))
          << ' ' << names[var];
      if (++written % 8 == 0) out << "\n  ";
    }
    if (written == 0) out << " 0 " << (names.empty() ? "x0" : names.front());
  };

  out << "\\ objective offset " << num(objective_offset_) << "\n";
  out << "Minimize\n obj:";
  std::vector<std::pair<int, double>> obj_terms;
  for (std::size_t j = 0; j < objective_.size(); ++j) {
    obj_terms.emplace_back(static_cast<int>(j), objective_[j]);
  }
  write_terms(obj_terms);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const auto& c = constraints_[i];
    out << ' ' << lp_name(c.name, "c", i) << ':';
    std::vector<std::pair<int, double>> terms;
    for (const auto& t : c.terms) terms.emplace_back(t.var, t.coef);
    write_terms(terms);
    switch (c.sense) {
      case Sense::kLessEqual:
        out << " <= ";
        break;
      case Sense::kGreaterEqual:
        out << " >= ";
        break;
      case Sense::kEqual:
        out << " = ";
        break;
    }
    out << num(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    const auto& v = variables_[j];
    if (v.lower == -kInfinity && v.upper == kInfinity) {
      out << ' ' << names[j] << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << names[j] << " = " << num(v.lower) << '\n';
    } else {
      out << ' ' << (v.lower == -kInfinity ? std::string("-inf") : num(v.lower))
          << " <= " << names[j] << " <= "
          << (v.upper == kInfinity ? std::string("+inf") : num(v.upper)) << '\n';
    }
  }
  bool any_int = false;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    if (!variables_[j].integer) continue;
    if (!any_int) out << "General\n";
    any_int = true;
    out << ' ' << names[j] << '\n';
  }
  out << "End\n";
}

}  // namespace tariffsim::lp
