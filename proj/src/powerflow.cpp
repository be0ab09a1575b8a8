#include "tariffsim/powerflow.hpp"

#include <fmt/format.h>

#include <cmath>
#include <thread>

#include "tariffsim/error.hpp"

namespace tariffsim {

void PowerFlowOptions::validate() const {
  if (!(tolerance_pu > 0.0)) throw ValidationError("power-flow tolerance must be positive");
  if (max_iterations < 1) throw ValidationError("power-flow iteration limit must be >= 1");
  if (!(base_power_kva > 0.0)) throw ValidationError("base power must be positive");
  if (!(max_flagged_fraction >= 0.0 && max_flagged_fraction <= 1.0)) {
    throw ValidationError("flagged-step threshold must lie in [0, 1]");
  }
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
}

PowerFlowModel::PowerFlowModel(const Network& net, double base_power_kva)
    : net_(net), n_(net.buses.size()), base_kva_(base_power_kva) {
  validate_network(net);
  if (!(base_power_kva > 0.0)) throw ValidationError("base power must be positive");
  slack_ = net.slack_bus();
  base_v_ = net.buses[slack_].nominal_voltage_v;
  for (std::size_t i = 0; i < n_; ++i) {
    if (i != slack_) pq_.push_back(i);
  }
  const double pf = net.power_factor;
  tan_phi_ = std::sqrt(std::max(0.0, 1.0 - pf * pf)) / pf;

  const double z_base = base_v_ * base_v_ / (base_kva_ * 1000.0);
  ybus_ = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (const auto& l : net.lines) {
    const std::complex<double> z(l.resistance_ohm / z_base, l.reactance_ohm / z_base);
    const std::complex<double> y = 1.0 / z;
    line_y_.push_back(y);
    const auto f = static_cast<Eigen::Index>(l.from);
    const auto t = static_cast<Eigen::Index>(l.to);
    ybus_(f, f) += y;
    ybus_(t, t) += y;
    ybus_(f, t) -= y;
    ybus_(t, f) -= y;
  }
}

double PowerFlowModel::base_current_a() const {
  return base_kva_ * 1000.0 / (std::sqrt(3.0) * base_v_);
}

void PowerFlowModel::bus_power(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                               Eigen::VectorXd& p, Eigen::VectorXd& q) const {
  const auto n = static_cast<Eigen::Index>(n_);
  p.setZero(n);
  q.setZero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::complex<double> y = ybus_(i, k);
      if (y == 0.0) continue;
      const double d = va[i] - va[k];
      const double c = std::cos(d);
      const double s = std::sin(d);
      p[i] += vm[i] * vm[k] * (y.real() * c + y.imag() * s);
      q[i] += vm[i] * vm[k] * (y.real() * s - y.imag() * c);
    }
  }
}

Eigen::VectorXd PowerFlowModel::mismatch(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                                         const Eigen::VectorXd& p_spec,
                                         const Eigen::VectorXd& q_spec) const {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  bus_power(vm, va, p, q);
  const auto m = static_cast<Eigen::Index>(pq_.size());
  Eigen::VectorXd f(2 * m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto i = static_cast<Eigen::Index>(pq_[a]);
    f[a] = p[i] - p_spec[i];
    f[m + a] = q[i] - q_spec[i];
  }
  return f;
}

Eigen::MatrixXd PowerFlowModel::jacobian(const Eigen::VectorXd& vm,
                                         const Eigen::VectorXd& va) const {
  Eigen::VectorXd p;
  Eigen::VectorXd q;
  bus_power(vm, va, p, q);
  const auto m = static_cast<Eigen::Index>(pq_.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto i = static_cast<Eigen::Index>(pq_[a]);
    const double gii = ybus_(i, i).real();
    const double bii = ybus_(i, i).imag();
    for (Eigen::Index b = 0; b < m; ++b) {
      const auto k = static_cast<Eigen::Index>(pq_[b]);
      if (i == k) {
        J(a, b) = -q[i] - bii * vm[i] * vm[i];
        J(a, m + b) = p[i] / vm[i] + gii * vm[i];
        J(m + a, b) = p[i] - gii * vm[i] * vm[i];
        J(m + a, m + b) = q[i] / vm[i] - bii * vm[i];
        continue;
      }
      const std::complex<double> y = ybus_(i, k);
      if (y == 0.0) continue;
      const double d = va[i] - va[k];
      const double gc_bs = y.real() * std::cos(d) + y.imag() * std::sin(d);
      const double gs_bc = y.real() * std::sin(d) - y.imag() * std::cos(d);
      J(a, b) = vm[i] * vm[k] * gs_bc;
      J(a, m + b) = vm[i] * gc_bs;
      J(m + a, b) = -vm[i] * vm[k] * gc_bs;
      J(m + a, m + b) = vm[i] * gs_bc;
    }
  }
  return J;
}

void PowerFlowModel::specified_injections(const std::vector<double>& consumption_kw,
                                          Eigen::VectorXd& p_spec,
                                          Eigen::VectorXd& q_spec) const {
  if (consumption_kw.size() != n_) {
    throw ValidationError(
        fmt::format("{} bus injections given for {} buses", consumption_kw.size(), n_));
  }
  const auto n = static_cast<Eigen::Index>(n_);
  p_spec.setZero(n);
  q_spec.setZero(n);
  for (std::size_t i = 0; i < n_; ++i) {
    if (!std::isfinite(consumption_kw[i])) {
      throw ValidationError(fmt::format("non-finite injection at bus '{}'", net_.buses[i].id));
    }
    if (i == slack_) continue;
    const auto e = static_cast<Eigen::Index>(i);
    p_spec[e] = -consumption_kw[i] / base_kva_;
    q_spec[e] = p_spec[e] * tan_phi_;
  }
}

PowerFlowResult solve_step(const PowerFlowModel& model, const std::vector<double>& consumption_kw,
                           const PowerFlowOptions& opts, std::size_t step) {
  const auto n = static_cast<Eigen::Index>(model.n_);
  const auto m = static_cast<Eigen::Index>(model.pq_.size());
  Eigen::VectorXd p_spec;
  Eigen::VectorXd q_spec;
  model.specified_injections(consumption_kw, p_spec, q_spec);

  Eigen::VectorXd vm = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd va = Eigen::VectorXd::Zero(n);

  PowerFlowResult r;
  r.step = step;
  Eigen::VectorXd f = model.mismatch(vm, va, p_spec, q_spec);
  r.residual_pu = m > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
  auto newton_step = [&] {
    const Eigen::MatrixXd J = model.jacobian(vm, va);
    const Eigen::VectorXd dx = J.partialPivLu().solve(-f);
    if (!dx.allFinite()) return false;
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto i = static_cast<Eigen::Index>(model.pq_[a]);
      va[i] += dx[a];
      vm[i] += dx[m + a];
    }
    ++r.iterations;
    f = model.mismatch(vm, va, p_spec, q_spec);
    r.residual_pu = f.cwiseAbs().maxCoeff();
    return std::isfinite(r.residual_pu);
  };
  while (r.residual_pu > opts.tolerance_pu && r.iterations < opts.max_iterations) {
    if (!newton_step()) break;
  }
  r.converged = r.residual_pu <= opts.tolerance_pu;
  // One more step near the solution costs little and brings the mismatch to
  // rounding level, so the power balance closes well below the tolerance.
  if (r.converged && r.residual_pu > 1e-13) {
    const Eigen::VectorXd vm0 = vm;
    const Eigen::VectorXd va0 = va;
    const Eigen::VectorXd f0 = f;
    const double res0 = r.residual_pu;
    if (!newton_step() || r.residual_pu > res0) {
      vm = vm0;
      va = va0;
      f = f0;
      r.residual_pu = res0;
    }
  }

  r.bus_voltage_pu.assign(vm.data(), vm.data() + n);
  r.bus_angle_rad.assign(va.data(), va.data() + n);

  std::vector<std::complex<double>> v(model.n_);
  for (std::size_t i = 0; i < model.n_; ++i) v[i] = std::polar(vm[i], va[i]);
  const double i_base = model.base_current_a();
  const auto& lines = model.net_.lines;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const std::complex<double> i_pu = (v[lines[k].from] - v[lines[k].to]) * model.line_y_[k];
    r.line_current_a.push_back(std::abs(i_pu) * i_base);
    const double r_pu = (1.0 / model.line_y_[k]).real();
    r.losses_kw += std::norm(i_pu) * r_pu * model.base_kva_;
  }
  std::complex<double> i_slack = 0.0;
  const auto s = static_cast<Eigen::Index>(model.slack_);
  for (Eigen::Index k = 0; k < n; ++k) i_slack += model.ybus_(s, k) * v[k];
  const std::complex<double> s_slack = v[model.slack_] * std::conj(i_slack);
  r.slack_power_kw = s_slack.real() * model.base_kva_;
  r.slack_reactive_kvar = s_slack.imag() * model.base_kva_;
  return r;
}

std::vector<PowerFlowResult> solve_horizon(const Network& net,
                                           const std::vector<BuildingDesign>& designs,
                                           std::size_t steps, const PowerFlowOptions& opts) {
  opts.validate();
  const PowerFlowModel model(net, opts.base_power_kva);
  std::vector<PowerFlowResult> results(steps);
  auto work = [&](std::size_t first, std::size_t last) {
    for (std::size_t t = first; t < last; ++t) {
      results[t] = solve_step(model, injections_at_buses(designs, net, t), opts, t);
    }
  };
  const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(opts.jobs),
                                                 std::max<std::size_t>(steps, 1));
  if (jobs <= 1) {
    work(0, steps);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(jobs);
    for (std::size_t j = 0; j < jobs; ++j) {
      const std::size_t first = steps * j / jobs;
      const std::size_t last = steps * (j + 1) / jobs;
      pool.emplace_back([&, j, first, last] {
        try {
          work(first, last);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<std::size_t> flagged;
  for (const auto& r : results) {
    if (!r.converged) flagged.push_back(r.step);
  }
  if (steps > 0 &&
      static_cast<double>(flagged.size()) > opts.max_flagged_fraction * static_cast<double>(steps)) {
    std::string list;
    for (std::size_t k = 0; k < flagged.size() && k < 20; ++k) {
      list += fmt::format("{}{}", k ? ", " : "", flagged[k]);
    }
    if (flagged.size() > 20) list += ", ...";
    throw ConvergenceError(fmt::format("power flow failed to converge at {} of {} steps: {}",
                                       flagged.size(), steps, list));
  }
  return results;
}

}  // namespace tariffsim
