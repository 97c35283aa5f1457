#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cimforge/charge.hpp"
#include "oracles.hpp"

namespace cf = cimforge;

namespace {

const cf::SupplyVoltage kVdd1{1.0};

std::array<cf::Voltage, 16> uniform_cbl(double volts) {
  std::array<cf::Voltage, 16> v;
  v.fill(cf::Voltage{volts});
  return v;
}

}  // namespace

TEST_CASE("share_charges averages equal capacitors") {
  const std::vector<cf::ChargeNode> nodes{{1.0, cf::Voltage{1.0}},
                                          {1.0, cf::Voltage{0.0}}};
  CHECK(cf::share_charges(nodes).volts == 0.5);
}

TEST_CASE("share_charges weights by capacitance") {
  const std::vector<cf::ChargeNode> nodes{{3.0, cf::Voltage{1.0}},
                                          {1.0, cf::Voltage{0.0}}};
  CHECK(cf::share_charges(nodes).volts == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("share_charges single node is a no-op") {
  const std::vector<cf::ChargeNode> nodes{{2.5, cf::Voltage{0.8}}};
  CHECK(cf::share_charges(nodes).volts == 0.8);
}

TEST_CASE("share_charges conserves total charge on random node sets") {
  auto gen = oracles::make_gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = oracles::uniform_int(gen, 1, 24);
    std::vector<cf::ChargeNode> nodes;
    std::vector<oracles::Cap> caps;
    for (int i = 0; i < n; ++i) {
      const double c = oracles::uniform_real(gen, 0.01, 10.0);
      const double v = oracles::uniform_real(gen, 0.0, 1.2);
      nodes.push_back({c, cf::Voltage{v}});
      caps.push_back({c, v});
    }
    const double got = cf::share_charges(nodes).volts;
    const double want = oracles::shared_voltage(caps);
    CHECK(oracles::close_rel(got, want, 1e-12));

    // Charge before == charge after redistribution.
    long double q_before = 0.0L;
    long double c_total = 0.0L;
    for (const auto& node : nodes) {
      q_before += static_cast<long double>(node.capacitance) * node.voltage.volts;
      c_total += node.capacitance;
    }
    const long double q_after = c_total * static_cast<long double>(got);
    CHECK(static_cast<double>(std::abs(q_after - q_before)) <=
          1e-12 * static_cast<double>(q_before + 1.0L));
  }
}

TEST_CASE("share_charges rejects empty and non-positive inputs") {
  CHECK_THROWS_AS(cf::share_charges({}), std::invalid_argument);
  const std::vector<cf::ChargeNode> bad{{0.0, cf::Voltage{1.0}}};
  CHECK_THROWS_AS(cf::share_charges(bad), std::invalid_argument);
  const std::vector<cf::ChargeNode> neg{{-1.0, cf::Voltage{1.0}}};
  CHECK_THROWS_AS(cf::share_charges(neg), std::invalid_argument);
}

TEST_CASE("dac_convert spot values") {
  CHECK(cf::dac_convert(cf::InputActivation{8}, kVdd1).volts == 0.5);
  CHECK(cf::dac_convert(cf::InputActivation{0}, kVdd1).volts == 1.0);
  CHECK(cf::dac_convert(cf::InputActivation{15}, kVdd1).volts == 0.0625);
  const cf::SupplyVoltage low{0.6};
  CHECK(cf::dac_convert(cf::InputActivation{8}, low).volts == 0.3);
}

TEST_CASE("dac_convert equals the 16-capacitor discharge oracle exactly") {
  for (double vdd : {0.6, 0.7, 0.9, 1.0, 1.1, 1.2}) {
    const cf::SupplyVoltage supply{vdd};
    for (int x = 0; x <= 15; ++x) {
      const double got = cf::dac_convert(cf::InputActivation{x}, supply).volts;
      CHECK(got == oracles::dac_voltage(x, vdd));
    }
  }
}

TEST_CASE("dac_convert is strictly decreasing in the code") {
  for (double vdd : {0.6, 1.0, 1.2}) {
    const cf::SupplyVoltage supply{vdd};
    double prev = cf::dac_convert(cf::InputActivation{0}, supply).volts;
    for (int x = 1; x <= 15; ++x) {
      const double v = cf::dac_convert(cf::InputActivation{x}, supply).volts;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("multiply keeps the voltage for weight 1, restores VDD for 0") {
  const cf::Voltage v{0.5};
  CHECK(cf::multiply(v, cf::WeightBit{1}, kVdd1).volts == 0.5);
  CHECK(cf::multiply(v, cf::WeightBit{0}, kVdd1).volts == 1.0);
  const cf::SupplyVoltage low{0.6};
  CHECK(cf::multiply(cf::Voltage{0.15}, cf::WeightBit{0}, low).volts == 0.6);
}

TEST_CASE("multiply is idempotent") {
  for (int w = 0; w <= 1; ++w) {
    for (int x = 0; x <= 15; ++x) {
      const cf::Voltage v = cf::dac_convert(cf::InputActivation{x}, kVdd1);
      const cf::Voltage once = cf::multiply(v, cf::WeightBit{w}, kVdd1);
      const cf::Voltage twice = cf::multiply(once, cf::WeightBit{w}, kVdd1);
      CHECK(once.volts == twice.volts);
    }
  }
}

TEST_CASE("accumulate matches the 17-capacitor oracle") {
  auto gen = oracles::make_gen(202);
  for (int trial = 0; trial < 100; ++trial) {
    const double rho = oracles::uniform_real(gen, 0.0, 3.0);
    std::array<cf::Voltage, 16> v;
    std::vector<double> raw(16);
    for (int i = 0; i < 16; ++i) {
      raw[static_cast<std::size_t>(i)] = oracles::uniform_real(gen, 0.0, 1.0);
      v[static_cast<std::size_t>(i)] =
          cf::Voltage{raw[static_cast<std::size_t>(i)]};
    }
    const double got = cf::accumulate(v, rho, kVdd1).volts;
    const double want = oracles::abl_voltage(raw, rho, 1.0);
    CHECK(oracles::close_rel(got, want, 1e-12));
  }
}

TEST_CASE("accumulate of uniform columns lands on the matching pMAC level") {
  // Sixteen columns at VDD/2: per-column product 8, partial MAC 128.
  const auto half = uniform_cbl(0.5);
  CHECK(cf::accumulate(half, 0.0, kVdd1).volts == 0.5);
  CHECK(cf::accumulate(half, 0.0, kVdd1).volts ==
        cf::pmac_voltage(128, 0.0, kVdd1).volts);
  // Sixteen columns at 3/4 VDD: per-column product 4, partial MAC 64.
  const auto three_q = uniform_cbl(0.75);
  CHECK(cf::accumulate(three_q, 0.0, kVdd1).volts == 0.75);
  CHECK(cf::accumulate(three_q, 0.0, kVdd1).volts ==
        cf::pmac_voltage(64, 0.0, kVdd1).volts);
}

TEST_CASE("accumulate requires exactly 16 voltages and non-negative ratio") {
  std::vector<cf::Voltage> v(15, cf::Voltage{1.0});
  CHECK_THROWS_AS(cf::accumulate(v, 1.0, kVdd1), std::invalid_argument);
  v.resize(17, cf::Voltage{1.0});
  CHECK_THROWS_AS(cf::accumulate(v, 1.0, kVdd1), std::invalid_argument);
  v.resize(16, cf::Voltage{1.0});
  CHECK_THROWS_AS(cf::accumulate(v, -0.1, kVdd1), std::invalid_argument);
}

TEST_CASE("pmac_voltage closed form") {
  // ((256 - p) / 16 + rho) * VDD / (16 + rho)
  CHECK(cf::pmac_voltage(0, 0.0, kVdd1).volts == 1.0);
  CHECK(cf::pmac_voltage(240, 0.0, kVdd1).volts == 0.0625);
  CHECK(cf::pmac_voltage(64, 0.0, kVdd1).volts == 0.75);
  CHECK(cf::pmac_voltage(64, 1.0, kVdd1).volts == doctest::Approx(13.0 / 17.0).epsilon(1e-15));
  const cf::SupplyVoltage low{0.6};
  CHECK(cf::pmac_voltage(64, 0.0, low).volts == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("pmac_voltage levels are distinct and strictly decreasing") {
  for (double rho : {0.0, 0.5, 1.0, 2.0}) {
    double prev = cf::pmac_voltage(0, rho, kVdd1).volts;
    for (int p = 1; p <= 240; ++p) {
      const double v = cf::pmac_voltage(p, rho, kVdd1).volts;
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("pmac_voltage equals accumulate over integer decompositions") {
  // Decompose p into 16 per-column counts 0..15; the closed form and the
  // explicit share must agree bitwise at VDD = 1 with dyadic ratios.
  auto gen = oracles::make_gen(303);
  for (double rho : {0.0, 0.5, 1.0, 2.0}) {
    for (int trial = 0; trial < 50; ++trial) {
      std::array<int, 16> counts{};
      int p = 0;
      for (int i = 0; i < 16; ++i) {
        counts[static_cast<std::size_t>(i)] = oracles::uniform_int(gen, 0, 15);
        p += counts[static_cast<std::size_t>(i)];
      }
      std::array<cf::Voltage, 16> v;
      for (int i = 0; i < 16; ++i) {
        v[static_cast<std::size_t>(i)] = cf::dac_convert(
            cf::InputActivation{counts[static_cast<std::size_t>(i)]}, kVdd1);
      }
      CHECK(cf::accumulate(v, rho, kVdd1).volts ==
            cf::pmac_voltage(p, rho, kVdd1).volts);
    }
  }
}

TEST_CASE("idle columns look exactly like zero-activation columns") {
  // An idle row's line stays at VDD, which is the x = 0 DAC level; mixing
  // the two changes nothing.
  std::array<cf::Voltage, 16> v = uniform_cbl(1.0);
  v[3] = cf::dac_convert(cf::InputActivation{0}, kVdd1);
  CHECK(cf::accumulate(v, 1.0, kVdd1).volts ==
        cf::pmac_voltage(0, 1.0, kVdd1).volts);
}

TEST_CASE("value type validation") {
  CHECK_THROWS_AS(cf::SupplyVoltage{0.59}, std::invalid_argument);
  CHECK_THROWS_AS(cf::SupplyVoltage{1.21}, std::invalid_argument);
  CHECK_NOTHROW(cf::SupplyVoltage{0.6});
  CHECK_NOTHROW(cf::SupplyVoltage{1.2});
  CHECK_THROWS_AS(cf::InputActivation{-1}, std::invalid_argument);
  CHECK_THROWS_AS(cf::InputActivation{16}, std::invalid_argument);
  CHECK(cf::InputActivation{}.code == 0);
  CHECK_THROWS_AS(cf::WeightBit{2}, std::invalid_argument);
  CHECK_THROWS_AS(cf::WeightBit{-1}, std::invalid_argument);
}
