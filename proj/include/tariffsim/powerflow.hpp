#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "tariffsim/network.hpp"
#include "tariffsim/timeseries.hpp"

namespace tariffsim {

struct PowerFlowOptions {
  double tolerance_pu = 1e-8;  // max |P|, |Q| mismatch
  int max_iterations = 50;
  double base_power_kva = 100.0;
  // A horizon fails when more than this share of its steps did not converge.
  double max_flagged_fraction = 0.001;
  int jobs = 1;

  void validate() const;
};

struct PowerFlowResult {
  std::size_t step = 0;
  bool converged = false;
  int iterations = 0;
  double residual_pu = 0.0;
  std::vector<double> bus_voltage_pu;
  std::vector<double> bus_angle_rad;
  std::vector<double> line_current_a;
  double slack_power_kw = 0.0;  // > 0 when power flows from the upstream grid into the feeder
  double slack_reactive_kvar = 0.0;
  double losses_kw = 0.0;
};

// Per-unit admittance model of a network. Bus order follows net.buses.
class PowerFlowModel {
 public:
  PowerFlowModel(const Network& net, double base_power_kva);

  std::size_t bus_count() const { return n_; }
  std::size_t slack() const { return slack_; }
  // Unknown ordering: angles of non-slack buses, then their magnitudes.
  const std::vector<std::size_t>& pq_buses() const { return pq_; }
  const Eigen::MatrixXcd& admittance() const { return ybus_; }
  double base_power_kva() const { return base_kva_; }
  double base_voltage_v() const { return base_v_; }
  double base_current_a() const;

  // Calculated bus injections (generator convention) at a state.
  void bus_power(const Eigen::VectorXd& vm, const Eigen::VectorXd& va, Eigen::VectorXd& p,
                 Eigen::VectorXd& q) const;
  // Stacked [dP; dQ] of calculated minus specified injections on pq buses.
  Eigen::VectorXd mismatch(const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                           const Eigen::VectorXd& p_spec, const Eigen::VectorXd& q_spec) const;
  // d(mismatch)/d[va_pq; vm_pq].
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& vm, const Eigen::VectorXd& va) const;

  // Specified per-unit injections from bus consumption in kW at the network
  // power factor (consumption draws reactive power in proportion).
  void specified_injections(const std::vector<double>& consumption_kw, Eigen::VectorXd& p_spec,
                            Eigen::VectorXd& q_spec) const;

  const Network& network() const { return net_; }

 private:
  Network net_;
  std::size_t n_ = 0;
  std::size_t slack_ = 0;
  std::vector<std::size_t> pq_;
  double base_kva_;
  double base_v_;
  double tan_phi_;
  Eigen::MatrixXcd ybus_;
  std::vector<std::complex<double>> line_y_;  // series admittance per line, p.u.
  friend PowerFlowResult solve_step(const PowerFlowModel&, const std::vector<double>&,
                                    const PowerFlowOptions&, std::size_t);
};

// Newton-Raphson from a flat start. Non-convergence is reported through
// `converged` with the last residual, never thrown.
PowerFlowResult solve_step(const PowerFlowModel& model, const std::vector<double>& consumption_kw,
                           const PowerFlowOptions& opts = {}, std::size_t step = 0);

// One result per grid step, in step order. Throws ConvergenceError listing
// the failed steps when they exceed opts.max_flagged_fraction.
std::vector<PowerFlowResult> solve_horizon(const Network& net,
                                           const std::vector<BuildingDesign>& designs,
                                           std::size_t steps, const PowerFlowOptions& opts = {});

}  // namespace tariffsim
