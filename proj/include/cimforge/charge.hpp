#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace cimforge {

// Supported operating range of the supply.
inline constexpr double kMinSupplyVolts = 0.6;
inline constexpr double kMaxSupplyVolts = 1.2;

// 16 CBL capacitances share charge in every DAC group and on every ABL.
inline constexpr int kCblPerAbl = 16;

// Partial MAC range with 16 activated rows: 0..240.
inline constexpr int kPmacLevels = 241;

struct SupplyVoltage {
  double volts;

  explicit SupplyVoltage(double v) : volts(v) {
    if (!(v >= kMinSupplyVolts && v <= kMaxSupplyVolts)) {
      throw std::invalid_argument("supply voltage outside the 0.6-1.2 V operating range");
    }
  }
};

// Absolute volts. With the default 1.0 V supply this coincides with the
// VDD-normalized unit used throughout the closed forms.
struct Voltage {
  double volts = 0.0;
};

// A capacitor in relative units (C_CBL = 1.0) holding a voltage.
struct ChargeNode {
  double capacitance = 1.0;
  Voltage voltage;
};

// 4-bit input activation code, 0..15. Default is the zero code, whose cycle
// voltage equals an idle row's: both leave the line at VDD.
struct InputActivation {
  std::uint8_t code = 0;

  InputActivation() = default;
  explicit InputActivation(int x) : code(static_cast<std::uint8_t>(x)) {
    if (x < 0 || x > 15) {
      throw std::invalid_argument("input activation outside 0..15");
    }
  }
};

struct WeightBit {
  std::uint8_t bit = 0;

  WeightBit() = default;
  explicit WeightBit(int w) : bit(static_cast<std::uint8_t>(w)) {
    if (w != 0 && w != 1) {
      throw std::invalid_argument("weight bit must be 0 or 1");
    }
  }
};

// Charge sharing across a set of capacitors: V = sum(C_i * V_i) / sum(C_i).
// Total charge is conserved exactly up to rounding.
Voltage share_charges(std::span<const ChargeNode> nodes);

// In-memory DAC transfer: V = (16 - x) * VDD / 16. Equals share_charges()
// over 16 unit capacitors with the binary-weighted groups for the set input
// bits discharged and one capacitor always kept precharged.
Voltage dac_convert(InputActivation x, SupplyVoltage vdd);

// Bit-cell multiplication: weight 1 preserves the CBL voltage, weight 0
// pulls the CBL back to VDD (the zero-product voltage).
Voltage multiply(Voltage v_cbl, WeightBit w, SupplyVoltage vdd);

// Column accumulation over the 16 CBLs on one ABL, plus the ABL capacitance
// (cap_ratio = C_ABL / C_CBL) precharged to VDD:
//   V_ABL = (sum(V_j) + cap_ratio * VDD) / (16 + cap_ratio)
Voltage accumulate(std::span<const Voltage> cbl_voltages, double cap_ratio,
                   SupplyVoltage vdd);

// Closed-form ABL voltage for a (possibly fractional) partial-MAC value:
//   V(p) = ((256 - p) / 16 + cap_ratio) * VDD / (16 + cap_ratio)
// Arranged to follow the same arithmetic as accumulate() so that integer
// decision points compare as exact ties at dyadic supplies.
Voltage pmac_voltage(double pmac, double cap_ratio, SupplyVoltage vdd);

}  // namespace cimforge
