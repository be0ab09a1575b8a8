#include "simplex.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace tariffsim::lp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BoundedSimplex::BoundedSimplex(const LinearProgram& lp, double primal_tolerance)
    : primal_tol_(primal_tolerance) {
  m_ = static_cast<int>(lp.num_constraints());
  n_ = static_cast<int>(lp.num_variables());
  const int nt = n_ + m_;

  // Row-wise input to compressed columns, merging duplicate entries.
  std::vector<int> count(n_ + 1, 0);
  for (const auto& c : lp.constraints()) {
    for (const auto& t : c.terms) ++count[t.var + 1];
  }
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + count[j + 1];
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  std::vector<int> rows(col_start_.back());
  std::vector<double> vals(col_start_.back());
  for (int i = 0; i < m_; ++i) {
    for (const auto& t : lp.constraints()[i].terms) {
      rows[fill[t.var]] = i;
      vals[fill[t.var]] = t.coef;
      ++fill[t.var];
    }
  }
  row_idx_.reserve(rows.size());
  val_.reserve(vals.size());
  std::vector<int> merged_start(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) {
    std::vector<std::pair<int, double>> col;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) col.emplace_back(rows[k], vals[k]);
    std::sort(col.begin(), col.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < col.size(); ++k) {
      if (!row_idx_.empty() && static_cast<int>(row_idx_.size()) > merged_start[j] &&
          row_idx_.back() == col[k].first) {
        val_.back() += col[k].second;
      } else {
        row_idx_.push_back(col[k].first);
        val_.push_back(col[k].second);
      }
    }
    merged_start[j + 1] = static_cast<int>(row_idx_.size());
  }
  col_start_ = std::move(merged_start);

  col_weight_.assign(nt, 1.0);
  for (int j = 0; j < n_; ++j) {
    double s = 1.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += val_[k] * val_[k];
    col_weight_[j] = std::sqrt(s);
  }

  cost_.assign(nt, 0.0);
  lb_.assign(nt, 0.0);
  ub_.assign(nt, 0.0);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = lp.objective()[j];
    lb_[j] = lp.variables()[j].lower;
    ub_[j] = lp.variables()[j].upper;
  }
  for (int i = 0; i < m_; ++i) {
    const auto& c = lp.constraints()[i];
    switch (c.sense) {
      case Sense::kLessEqual:
        lb_[n_ + i] = -kInf;
        ub_[n_ + i] = c.rhs;
        break;
      case Sense::kGreaterEqual:
        lb_[n_ + i] = c.rhs;
        ub_[n_ + i] = kInf;
        break;
      case Sense::kEqual:
        lb_[n_ + i] = c.rhs;
        ub_[n_ + i] = c.rhs;
        break;
    }
  }
  offset_ = lp.objective_offset();

  x_.assign(nt, 0.0);
  head_.assign(m_, 0);
  pos_.assign(nt, -1);
  status_.assign(nt, VarStatus::kAtLower);
  iteration_limit_ = static_cast<std::size_t>(50) * static_cast<std::size_t>(nt) + 1000;
}

void BoundedSimplex::set_structural_bounds(std::span<const double> lower,
                                           std::span<const double> upper) {
  for (int j = 0; j < n_; ++j) {
    lb_[j] = lower[j];
    ub_[j] = upper[j];
  }
}

void BoundedSimplex::place_nonbasic(int j) {
  const double lo = lb_[j];
  const double hi = ub_[j];
  VarStatus want = status_[j];
  if (lo == hi) {
    want = VarStatus::kFixed;
  } else if (want == VarStatus::kAtUpper && hi == kInf) {
    want = lo > -kInf ? VarStatus::kAtLower : VarStatus::kFree;
  } else if ((want == VarStatus::kAtLower || want == VarStatus::kFixed) && lo == -kInf) {
    want = hi < kInf ? VarStatus::kAtUpper : VarStatus::kFree;
  } else if (want == VarStatus::kFree && (lo > -kInf || hi < kInf)) {
    want = lo > -kInf ? VarStatus::kAtLower : VarStatus::kAtUpper;
  } else if (want == VarStatus::kBasic || want == VarStatus::kFixed) {
    want = lo > -kInf ? VarStatus::kAtLower
                      : (hi < kInf ? VarStatus::kAtUpper : VarStatus::kFree);
  }
  status_[j] = want;
  switch (want) {
    case VarStatus::kFixed:
    case VarStatus::kAtLower:
      x_[j] = lo;
      break;
    case VarStatus::kAtUpper:
      x_[j] = hi;
      break;
    case VarStatus::kFree:
      x_[j] = 0.0;
      break;
    case VarStatus::kBasic:
      break;
  }
}

void BoundedSimplex::reset_to_slack_basis() {
  const int nt = n_ + m_;
  for (int j = 0; j < nt; ++j) {
    pos_[j] = -1;
    status_[j] = VarStatus::kAtLower;
  }
  for (int j = 0; j < n_; ++j) {
    // Start structurals at the finite bound nearest zero.
    if (lb_[j] > -kInf && ub_[j] < kInf && std::abs(ub_[j]) < std::abs(lb_[j])) {
      status_[j] = VarStatus::kAtUpper;
    }
    place_nonbasic(j);
  }
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    pos_[n_ + i] = i;
    status_[n_ + i] = VarStatus::kBasic;
  }
}

bool BoundedSimplex::install_basis(const Basis& warm) {
  const int nt = n_ + m_;
  if (static_cast<int>(warm.head.size()) != m_ ||
      static_cast<int>(warm.status.size()) != nt) {
    return false;
  }
  head_ = warm.head;
  status_ = warm.status;
  std::fill(pos_.begin(), pos_.end(), -1);
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (j < 0 || j >= nt || pos_[j] != -1) return false;
    pos_[j] = i;
    status_[j] = VarStatus::kBasic;
  }
  for (int j = 0; j < nt; ++j) {
    if (pos_[j] == -1) {
      if (status_[j] == VarStatus::kBasic) status_[j] = VarStatus::kAtLower;
      place_nonbasic(j);
    }
  }
  return refactor();
}

bool BoundedSimplex::refactor() {
  etas_.clear();
  factored_ = false;
  if (m_ == 0) {
    factored_ = true;
    return true;
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m_) * 3);
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        trip.emplace_back(row_idx_[k], i, val_[k]);
      }
    } else {
      trip.emplace_back(j - n_, i, -1.0);
    }
  }
  Eigen::SparseMatrix<double> basis(m_, m_);
  basis.setFromTriplets(trip.begin(), trip.end());
  basis.makeCompressed();
  lu_.analyzePattern(basis);
  lu_.factorize(basis);
  if (lu_.info() != Eigen::Success) return false;
  factored_ = true;
  return true;
}

void BoundedSimplex::load_column(int j, Eigen::VectorXd& v) const {
  v.setZero(m_);
  if (j < n_) {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) v[row_idx_[k]] = val_[k];
  } else {
    v[j - n_] = -1.0;
  }
}

double BoundedSimplex::column_dot(int j, const Eigen::VectorXd& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += val_[k] * y[row_idx_[k]];
  return s;
}

void BoundedSimplex::ftran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  Eigen::VectorXd w = lu_.solve(v);
  for (const auto& eta : etas_) {
    const double xr = w[eta.row] / eta.pivot;
    if (xr != 0.0) {
      for (const auto& [i, d] : eta.entries) w[i] -= d * xr;
    }
    w[eta.row] = xr;
  }
  v.swap(w);
}

void BoundedSimplex::btran(Eigen::VectorXd& v) const {
  if (m_ == 0) return;
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->row];
    for (const auto& [i, d] : it->entries) s -= d * v[i];
    v[it->row] = s / it->pivot;
  }
  Eigen::VectorXd w = lu_.transpose().solve(v);
  v.swap(w);
}

void BoundedSimplex::compute_basic_values() {
  if (m_ == 0) return;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < n_ + m_; ++j) {
    if (pos_[j] != -1 || x_[j] == 0.0) continue;
    if (j < n_) {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
        rhs[row_idx_[k]] -= val_[k] * x_[j];
      }
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  ftran(rhs);
  for (int i = 0; i < m_; ++i) x_[head_[i]] = rhs[i];
}

double BoundedSimplex::infeasibility_costs(Eigen::VectorXd& cb) const {
  cb.setZero(m_);
  double sum = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (x_[j] < lb_[j] - primal_tol_) {
      cb[i] = -1.0;
      sum += lb_[j] - x_[j];
    } else if (x_[j] > ub_[j] + primal_tol_) {
      cb[i] = 1.0;
      sum += x_[j] - ub_[j];
    }
  }
  return sum;
}

double BoundedSimplex::phase2_objective() const {
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  return obj;
}

SimplexResult BoundedSimplex::solve(const Basis* warm) {
  diagnostics_.clear();
  bool installed = false;
  if (warm != nullptr && !warm->empty()) installed = install_basis(*warm);
  if (!installed) {
    reset_to_slack_basis();
    if (!refactor()) {
      diagnostics_ = "slack basis factorization failed";
      return SimplexResult::kNumerical;
    }
  }
  compute_basic_values();
  return iterate();
}

SimplexResult BoundedSimplex::iterate() {
  const int nt = n_ + m_;
  const double harris = 0.5 * primal_tol_;
  Eigen::VectorXd cb(m_);
  Eigen::VectorXd y(m_);
  Eigen::VectorXd alpha(m_);

  bool bland = false;
  std::size_t stall = 0;
  double best_progress = kInf;
  bool last_phase1 = true;
  int numerical_retries = 0;
  std::size_t iter = 0;

  while (true) {
    if (iter >= iteration_limit_) {
      diagnostics_ = fmt::format("iteration limit {} reached", iteration_limit_);
      return SimplexResult::kIterationLimit;
    }
    if ((iter & 63) == 0 && std::chrono::steady_clock::now() > deadline_) {
      diagnostics_ = "time limit reached";
      return SimplexResult::kTimeLimit;
    }
    if (etas_.size() >= kRefactorInterval) {
      if (!refactor()) {
        diagnostics_ = "basis factorization failed during refactor";
        return SimplexResult::kNumerical;
      }
      compute_basic_values();
    }

    const double infeas = infeasibility_costs(cb);
    const bool phase1 = infeas > 0.0;
    if (phase1 != last_phase1) {
      best_progress = kInf;
      stall = 0;
      bland = false;
      last_phase1 = phase1;
    }
    if (!phase1) {
      for (int i = 0; i < m_; ++i) cb[i] = cost_[head_[i]];
    }
    const double progress = phase1 ? infeas : phase2_objective();
    if (progress < best_progress - 1e-11 * (1.0 + std::abs(progress))) {
      best_progress = progress;
      stall = 0;
      bland = false;
    } else if (++stall > kStallLimit) {
      bland = true;
    }

    y = cb;
    btran(y);

    // Pricing.
    int enter = -1;
    int dir = 0;
    double best_score = 0.0;
    double enter_d = 0.0;
    for (int j = 0; j < nt; ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::kBasic || st == VarStatus::kFixed) continue;
      const double cj = (phase1 || j >= n_) ? 0.0 : cost_[j];
      const double d = cj - column_dot(j, y);
      int jdir = 0;
      if (d < -dual_tol_ && (st == VarStatus::kAtLower || st == VarStatus::kFree)) {
        jdir = 1;
      } else if (d > dual_tol_ && (st == VarStatus::kAtUpper || st == VarStatus::kFree)) {
        jdir = -1;
      }
      if (jdir == 0) continue;
      if (bland) {
        enter = j;
        dir = jdir;
        enter_d = d;
        break;
      }
      const double score = std::abs(d) / col_weight_[j];
      if (score > best_score) {
        best_score = score;
        enter = j;
        dir = jdir;
        enter_d = d;
      }
    }

    if (enter < 0) {
      if (!etas_.empty()) {
        // Confirm on a fresh factorization before declaring termination.
        if (!refactor()) {
          diagnostics_ = "basis factorization failed at termination check";
          return SimplexResult::kNumerical;
        }
        compute_basic_values();
        continue;
      }
      if (phase1) {
        diagnostics_ = fmt::format("primal infeasible, residual {:.3e}", infeas);

        return SimplexResult::kInfeasible;
      }

      return SimplexResult::kOptimal;
    }
    (void)enter_d;

    load_column(enter, alpha);
    ftran(alpha);

    // Ratio test (Harris two-pass, or strict min-ratio in Bland mode).
    const double range = ub_[enter] - lb_[enter];
    double theta_max = range;  // may be +inf
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) < pivot_tol_) continue;
      const int j = head_[i];
      const double rate = -dir * a;
      double target;
      if (rate < 0.0) {
        if (x_[j] > ub_[j] + primal_tol_) {
          target = ub_[j];
        } else if (x_[j] < lb_[j] - primal_tol_ || lb_[j] == -kInf) {
          continue;
        } else {
          target = lb_[j];
        }
        const double tol = bland ? 0.0 : harris;
        theta_max = std::min(theta_max, (x_[j] - target + tol) / -rate);
      } else {
        if (x_[j] < lb_[j] - primal_tol_) {
          target = lb_[j];
        } else if (x_[j] > ub_[j] + primal_tol_ || ub_[j] == kInf) {
          continue;
        } else {
          target = ub_[j];
        }
        const double tol = bland ? 0.0 : harris;
        theta_max = std::min(theta_max, (target - x_[j] + tol) / rate);
      }
    }

    int leave_row = -1;
    double leave_target = 0.0;
    double theta = 0.0;
    if (theta_max == kInf) {
      if (!phase1) {
        diagnostics_ = fmt::format("unbounded ray along column {}", enter);

        return SimplexResult::kUnbounded;
      }
      if (++numerical_retries > 5) {
        diagnostics_ = "phase 1 found no blocking variable";

        return SimplexResult::kNumerical;
      }
      if (!refactor()) return SimplexResult::kNumerical;
      compute_basic_values();
      continue;
    }

    if (range <= theta_max && range < kInf) {
      theta = range;
    } else {
      double best_abs = 0.0;
      double best_ratio = kInf;
      int best_var = std::numeric_limits<int>::max();
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[i];
        if (std::abs(a) < pivot_tol_) continue;
        const int j = head_[i];
        const double rate = -dir * a;
        double target;
        double ratio;
        if (rate < 0.0) {
          if (x_[j] > ub_[j] + primal_tol_) {
            target = ub_[j];
          } else if (x_[j] < lb_[j] - primal_tol_ || lb_[j] == -kInf) {
            continue;
          } else {
            target = lb_[j];
          }
          ratio = (x_[j] - target) / -rate;
        } else {
          if (x_[j] < lb_[j] - primal_tol_) {
            target = lb_[j];
          } else if (x_[j] > ub_[j] + primal_tol_ || ub_[j] == kInf) {
            continue;
          } else {
            target = ub_[j];
          }
          ratio = (target - x_[j]) / rate;
        }
        if (ratio > theta_max) continue;
        if (bland) {
          if (ratio < best_ratio - 1e-12 ||
              (ratio <= best_ratio + 1e-12 && j < best_var)) {
            best_ratio = ratio;
            best_var = j;
            leave_row = i;
            leave_target = target;
          }
        } else if (std::abs(a) > best_abs) {
          best_abs = std::abs(a);
          best_ratio = ratio;
          leave_row = i;
          leave_target = target;
        }
      }
      if (leave_row < 0) {
        if (++numerical_retries > 5) {
          diagnostics_ = "ratio test found no leaving row";

          return SimplexResult::kNumerical;
        }
        if (!refactor()) return SimplexResult::kNumerical;
        compute_basic_values();
        continue;
      }
      theta = std::max(best_ratio, 0.0);
      if (std::abs(alpha[leave_row]) < 1e-7 && !etas_.empty()) {
        // Small pivot on an aged factorization: refresh and redo the step.
        if (!refactor()) return SimplexResult::kNumerical;
        compute_basic_values();
        continue;
      }
    }

    // Apply the step.
    x_[enter] += dir * theta;
    if (theta != 0.0) {
      for (int i = 0; i < m_; ++i) {
        if (alpha[i] != 0.0) x_[head_[i]] -= dir * theta * alpha[i];
      }
    }
    ++iter;
    ++total_iterations_;

    if (leave_row < 0) {
      // Bound flip of the entering column.
      status_[enter] = dir > 0 ? VarStatus::kAtUpper : VarStatus::kAtLower;
      x_[enter] = dir > 0 ? ub_[enter] : lb_[enter];
      continue;
    }

    const int leave = head_[leave_row];
    x_[leave] = leave_target;
    if (lb_[leave] == ub_[leave]) {
      status_[leave] = VarStatus::kFixed;
    } else {
      status_[leave] = leave_target == lb_[leave] ? VarStatus::kAtLower : VarStatus::kAtUpper;
    }
    pos_[leave] = -1;
    head_[leave_row] = enter;
    pos_[enter] = leave_row;
    status_[enter] = VarStatus::kBasic;

    Eta eta;
    eta.row = leave_row;
    eta.pivot = alpha[leave_row];
    for (int i = 0; i < m_; ++i) {
      if (i != leave_row && std::abs(alpha[i]) > 1e-14) eta.entries.emplace_back(i, alpha[i]);
    }
    etas_.push_back(std::move(eta));
  }
}

std::vector<double> BoundedSimplex::structural_values() const {
  return std::vector<double>(x_.begin(), x_.begin() + n_);
}

double BoundedSimplex::objective() const { return phase2_objective() + offset_; }

Basis BoundedSimplex::basis() const { return Basis{head_, status_}; }

}  // namespace tariffsim::lp::detail
