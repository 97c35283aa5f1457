#include "cimforge/charge.hpp"

namespace cimforge {

Voltage share_charges(std::span<const ChargeNode> nodes) {
  if (nodes.empty()) {
    throw std::invalid_argument("share_charges: empty node list");
  }
  double charge = 0.0;
  double cap = 0.0;
  for (const ChargeNode& node : nodes) {
    if (!(node.capacitance > 0.0)) {
      throw std::invalid_argument("share_charges: capacitance must be positive");
    }
    charge += node.capacitance * node.voltage.volts;
    cap += node.capacitance;
  }
  return Voltage{charge / cap};
}

Voltage dac_convert(InputActivation x, SupplyVoltage vdd) {
  return Voltage{(16.0 - static_cast<double>(x.code)) * vdd.volts / 16.0};
}

Voltage multiply(Voltage v_cbl, WeightBit w, SupplyVoltage vdd) {
  return w.bit != 0 ? v_cbl : Voltage{vdd.volts};
}

Voltage accumulate(std::span<const Voltage> cbl_voltages, double cap_ratio,
                   SupplyVoltage vdd) {
  if (cbl_voltages.size() != static_cast<std::size_t>(kCblPerAbl)) {
    throw std::invalid_argument("accumulate: expected exactly 16 CBL voltages");
  }
  if (!(cap_ratio >= 0.0)) {
    throw std::invalid_argument("accumulate: cap_ratio must be >= 0");
  }
  double sum = 0.0;
  for (const Voltage& v : cbl_voltages) {
    sum += v.volts;
  }
  return Voltage{(sum + cap_ratio * vdd.volts) / (16.0 + cap_ratio)};
}

Voltage pmac_voltage(double pmac, double cap_ratio, SupplyVoltage vdd) {
  // Keep the operation order in sync with accumulate(): at VDD = 1.0 and a
  // dyadic cap_ratio both routes produce bit-identical doubles.
  const double sum = (256.0 - pmac) / 16.0 * vdd.volts;
  return Voltage{(sum + cap_ratio * vdd.volts) / (16.0 + cap_ratio)};
}

}  // namespace cimforge
