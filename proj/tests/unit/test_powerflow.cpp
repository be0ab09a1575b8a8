#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tariffsim/error.hpp"
#include "tariffsim/powerflow.hpp"

using namespace tariffsim;

namespace {

Network two_bus(double r = 0.1, double x = 0.05, double v = 400.0) {
  Network n;
  n.buses = {{"S", v, BusKind::kSlack}, {"L", v, BusKind::kLoad}};
  n.lines = {{"l1", 0, 1, r, x, 200.0}};
  n.building_to_bus = {{"h1", 1}};
  return n;
}

Network five_bus() {
  return make_five_bus_feeder({"h1", "h2", "h3", "h4", "h5", "h6", "h7", "h8"});
}

void check_against_oracle(const Network& net, const std::vector<double>& load) {
  const PowerFlowModel model(net, 100.0);
  const PowerFlowResult r = solve_step(model, load);
  const auto o = oracle::gauss_seidel(net, load);
  REQUIRE(r.converged);
  REQUIRE(o.converged);
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    CHECK(std::abs(r.bus_voltage_pu[b] - std::abs(o.voltage_pu[b])) <= 1e-6);
    CHECK(std::abs(r.bus_angle_rad[b] - std::arg(o.voltage_pu[b])) <= 1e-6);
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    CHECK(std::abs(r.line_current_a[l] - o.line_current_a[l]) <= 1e-6 * std::max(1.0, o.line_current_a[l]));
  }
  CHECK(r.slack_power_kw == doctest::Approx(o.slack_power_kw).epsilon(1e-6));
}

BuildingDesign flat_dispatch(const std::string& id, std::size_t steps, double net_kw) {
  BuildingDesign d;
  d.building_id = id;
  d.imports.assign(steps, std::max(net_kw, 0.0));
  d.exports.assign(steps, std::max(-net_kw, 0.0));
  return d;
}

}  // namespace

TEST_CASE("no load gives nominal voltages and no flow") {
  const Network n = five_bus();
  const PowerFlowModel m(n, 100.0);
  const auto r = solve_step(m, std::vector<double>(5, 0.0));
  CHECK(r.converged);
  for (double v : r.bus_voltage_pu) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (double a : r.bus_angle_rad) CHECK(a == doctest::Approx(0.0));
  for (double i : r.line_current_a) CHECK(i == doctest::Approx(0.0));
  CHECK(r.slack_power_kw == doctest::Approx(0.0));
}

TEST_CASE("two-bus load matches the fixed-point oracle") {
  check_against_oracle(two_bus(), {0.0, 10.0});
}

TEST_CASE("two-bus injection raises the voltage and reverses slack power") {
  const Network n = two_bus();
  const auto r = solve_step(PowerFlowModel(n, 100.0), {0.0, -10.0});
  CHECK(r.converged);
  CHECK(r.bus_voltage_pu[1] > 1.0);
  CHECK(r.slack_power_kw < 0.0);
  check_against_oracle(n, {0.0, -10.0});
}

TEST_CASE("five-bus feeder matches the oracle on random loads") {
  const Network n = five_bus();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> load(5, 0.0);
    for (std::size_t b = 1; b < 5; ++b) load[b] = u(rng);
    check_against_oracle(n, load);
  }
}

TEST_CASE("lagging power factor matches the oracle") {
  Network n = five_bus();
  n.power_factor = 0.95;
  check_against_oracle(n, {0.0, 12.0, -8.0, 20.0, 5.0});
}

TEST_CASE("analytic Jacobian matches central differences") {
  const Network n = make_random_feeder({"a", "b", "c", "d", "e"}, 7, 11);
  const PowerFlowModel m(n, 100.0);
  const std::size_t nb = m.bus_count();
  const auto& pq = m.pq_buses();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> vm_d(0.9, 1.1);
  std::uniform_real_distribution<double> va_d(-0.1, 0.1);
  const Eigen::VectorXd p0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nb));
  const Eigen::VectorXd q0 = p0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd vm(nb);
    Eigen::VectorXd va(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      vm[b] = b == m.slack() ? 1.0 : vm_d(rng);
      va[b] = b == m.slack() ? 0.0 : va_d(rng);
    }
    const Eigen::MatrixXd j = m.jacobian(vm, va);
    const std::size_t np = pq.size();
    Eigen::MatrixXd fd(2 * np, 2 * np);
    const double h = 1e-6;
    for (std::size_t c = 0; c < 2 * np; ++c) {
      Eigen::VectorXd vp = vm, vn = vm, ap = va, an = va;
      const std::size_t bus = pq[c % np];
      if (c < np) {
        ap[bus] += h;
        an[bus] -= h;
      } else {
        vp[bus] += h;
        vn[bus] -= h;
      }
      fd.col(static_cast<Eigen::Index>(c)) = (m.mismatch(vp, ap, p0, q0) - m.mismatch(vn, an, p0, q0)) / (2 * h);
    }
    worst = std::max(worst, (j - fd).cwiseAbs().maxCoeff() / std::max(1.0, j.cwiseAbs().maxCoeff()));
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("slack power equals consumption plus losses over a day") {
  const Network n = five_bus();
  std::vector<BuildingDesign> ds;
  for (int i = 0; i < 8; ++i) {
    BuildingDesign d;
    d.building_id = "h" + std::to_string(i + 1);
    for (int t = 0; t < 96; ++t) {
      const double x = 3.0 * std::sin(0.07 * t + i) + (t > 40 && t < 60 ? -6.0 : 1.0);
      d.imports.push_back(std::max(x, 0.0));
      d.exports.push_back(std::max(-x, 0.0));
    }
    ds.push_back(d);
  }
  const auto results = solve_horizon(n, ds, 96);
  REQUIRE(results.size() == 96);
  const PowerFlowModel m(n, 100.0);
  for (std::size_t t = 0; t < 96; ++t) {
    CHECK(results[t].step == t);
    double consumption = 0.0;
    for (double v : injections_at_buses(ds, n, t)) consumption += v;
    CHECK(std::abs(results[t].slack_power_kw - consumption - results[t].losses_kw) <= 1e-6);
    // Every step also matches an independent solve.
    if (t % 12 == 0) check_against_oracle(n, injections_at_buses(ds, n, t));
  }
}

TEST_CASE("adding load at a leaf lowers its voltage") {
  const Network n = five_bus();
  const PowerFlowModel m(n, 100.0);
  std::vector<double> load{0.0, 5.0, -10.0, 3.0, 0.0};
  double prev = 2.0;
  for (double extra = -20.0; extra <= 40.0; extra += 5.0) {
    load[4] = extra;
    const auto r = solve_step(m, load);
    CHECK(r.bus_voltage_pu[4] <= prev + 1e-12);
    prev = r.bus_voltage_pu[4];
  }
}

TEST_CASE("per-unit results do not depend on the voltage level") {
  const std::vector<double> load{0.0, 15.0};
  const auto a = solve_step(PowerFlowModel(two_bus(0.1, 0.05, 400.0), 100.0), load);
  const double k = 2.5;
  const auto b = solve_step(PowerFlowModel(two_bus(0.1 * k * k, 0.05 * k * k, 400.0 * k), 100.0), load);
  CHECK(std::abs(a.bus_voltage_pu[1] - b.bus_voltage_pu[1]) <= 1e-9);
  CHECK(std::abs(a.bus_angle_rad[1] - b.bus_angle_rad[1]) <= 1e-9);
}

TEST_CASE("horizon: zero and constant dispatch") {
  const Network n = five_bus();
  std::vector<BuildingDesign> zero;
  std::vector<BuildingDesign> constant;
  for (int i = 1; i <= 8; ++i) {
    zero.push_back(flat_dispatch("h" + std::to_string(i), 4, 0.0));
    constant.push_back(flat_dispatch("h" + std::to_string(i), 4, i % 2 ? 3.0 : -2.0));
  }
  const auto rz = solve_horizon(n, zero, 4);
  REQUIRE(rz.size() == 4);
  for (const auto& r : rz) {
    for (double v : r.bus_voltage_pu) CHECK(v == doctest::Approx(1.0));
    CHECK(r.slack_power_kw == doctest::Approx(0.0));
  }
  PowerFlowOptions opts;
  opts.jobs = 3;
  const auto rc = solve_horizon(n, constant, 4, opts);
  for (const auto& r : rc) {
    CHECK(r.bus_voltage_pu == rc[0].bus_voltage_pu);
    CHECK(r.line_current_a == rc[0].line_current_a);
    CHECK(r.slack_power_kw == rc[0].slack_power_kw);
  }
}

TEST_CASE("horizon is independent of the worker count") {
  const Network n = five_bus();
  std::vector<BuildingDesign> ds;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 1; i <= 8; ++i) {
    BuildingDesign d = flat_dispatch("h" + std::to_string(i), 30, 0.0);
    for (std::size_t t = 0; t < 30; ++t) {
      const double x = u(rng);
      d.imports[t] = std::max(x, 0.0);
      d.exports[t] = std::max(-x, 0.0);
    }
    ds.push_back(d);
  }
  PowerFlowOptions one;
  PowerFlowOptions four;
  four.jobs = 4;
  const auto a = solve_horizon(n, ds, 30, one);
  const auto b = solve_horizon(n, ds, 30, four);
  for (std::size_t t = 0; t < 30; ++t) {
    CHECK(a[t].bus_voltage_pu == b[t].bus_voltage_pu);
    CHECK(a[t].line_current_a == b[t].line_current_a);
  }
}

TEST_CASE("non-convergence is flagged and fails the horizon above the threshold") {
  const Network n = two_bus();
  const auto r = solve_step(PowerFlowModel(n, 100.0), {0.0, 5000.0});
  CHECK_FALSE(r.converged);
  CHECK(r.residual_pu > 1e-8);
  std::vector<BuildingDesign> ds{flat_dispatch("h1", 3, 5000.0)};
  CHECK_THROWS_AS(solve_horizon(n, ds, 3), ConvergenceError);
  PowerFlowOptions lenient;
  lenient.max_flagged_fraction = 1.0;
  const auto rs = solve_horizon(n, ds, 3, lenient);
  CHECK(rs.size() == 3);
  CHECK_FALSE(rs[0].converged);
}
