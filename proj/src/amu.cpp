#include "cimforge/amu.hpp"

#include <stdexcept>
#include <string>

#include "cimforge/errors.hpp"

namespace cimforge {
namespace {

void require_phase(const AmuState& amu, AmuPhase expected, const char* op) {
  if (amu.phase != expected) {
    throw StateError(std::string(op) + " called out of phase order");
  }
}

}  // namespace

DacGroupMap DacGroupMap::contiguous() {
  DacGroupMap map;
  for (int i = 0; i < kLocalArraysPerAmu; ++i) {
    if (i < 8) {
      map.group_of[i] = 0;
    } else if (i < 12) {
      map.group_of[i] = 1;
    } else if (i < 14) {
      map.group_of[i] = 2;
    } else if (i < 15) {
      map.group_of[i] = 3;
    } else {
      map.group_of[i] = 4;
    }
  }
  return map;
}

void DacGroupMap::validate() const {
  std::array<int, 5> counts{};
  for (std::uint8_t g : group_of) {
    if (g > 4) {
      throw std::invalid_argument("DAC group index must be 0..4");
    }
    ++counts[g];
  }
  const std::array<int, 5> expected{8, 4, 2, 1, 1};
  if (counts != expected) {
    throw std::invalid_argument("DAC group sizes must be {8, 4, 2, 1, 1}");
  }
}

AmuState AmuState::with_weights(const AmuCellMatrix& cells, DacGroupMap map) {
  map.validate();
  AmuState amu;
  amu.group_map = map;
  for (int i = 0; i < kLocalArraysPerAmu; ++i) {
    amu.local_arrays[i].cells = cells[i];
    // A Type B peripheral adds the pass switch that isolates a new discharge
    // group from its neighbor; behavior is identical, the tag is bookkeeping.
    const bool starts_group = i > 0 && map.group_of[i] != map.group_of[i - 1];
    amu.local_arrays[i].peripheral =
        starts_group ? PeripheralType::TypeB : PeripheralType::TypeA;
    amu.local_arrays[i].cbl = ChargeNode{1.0, Voltage{0.0}};
  }
  amu.phase = AmuPhase::Idle;
  return amu;
}

AmuState precharge(const AmuState& amu, SupplyVoltage vdd) {
  require_phase(amu, AmuPhase::Idle, "precharge");
  AmuState next = amu;
  for (auto& la : next.local_arrays) {
    la.cbl = ChargeNode{1.0, Voltage{vdd.volts}};
  }
  next.phase = AmuPhase::Precharged;
  return next;
}

AmuState dac_phase(const AmuState& amu, InputActivation x, SupplyVoltage vdd) {
  require_phase(amu, AmuPhase::Precharged, "dac_phase");
  AmuState next = amu;
  int live = 0;
  for (int i = 0; i < kLocalArraysPerAmu; ++i) {
    const std::uint8_t g = next.group_map.group_of[i];
    // Group k holds 2^(3-k) capacitors and discharges when input bit 3-k is
    // set; group 4 never discharges, which shifts the transfer onto
    // (16 - x) / 16 instead of (15 - x) / 15.
    const bool discharged = g < 4 && ((x.code >> (3 - g)) & 1u) != 0;
    live += discharged ? 0 : 1;
  }
  // Every live CBL sits at the precharged supply, so the 16-way share
  // collapses to one rounding and lands bit-exactly on dac_convert's value.
  const Voltage shared{static_cast<double>(live) * vdd.volts / 16.0};
  for (auto& la : next.local_arrays) {
    la.cbl = ChargeNode{1.0, shared};
  }
  next.phase = AmuPhase::Converted;
  return next;
}

AmuState mult_phase(const AmuState& amu, int row, SupplyVoltage vdd) {
  require_phase(amu, AmuPhase::Converted, "mult_phase");
  if (row < 0 || row >= kCellsPerLocalArray) {
    throw std::invalid_argument("word row must be 0..15");
  }
  AmuState next = amu;
  for (auto& la : next.local_arrays) {
    la.cbl.voltage = multiply(la.cbl.voltage, la.cells[row], vdd);
  }
  next.phase = AmuPhase::Multiplied;
  return next;
}

AmuState end_cycle(const AmuState& amu) {
  require_phase(amu, AmuPhase::Multiplied, "end_cycle");
  AmuState next = amu;
  next.phase = AmuPhase::Idle;
  return next;
}

std::array<Voltage, kLocalArraysPerAmu> amu_products(
    InputActivation x, const std::array<WeightBit, kLocalArraysPerAmu>& row_weights,
    SupplyVoltage vdd) {
  std::array<Voltage, kLocalArraysPerAmu> out;
  const Voltage dac = dac_convert(x, vdd);
  for (int c = 0; c < kLocalArraysPerAmu; ++c) {
    out[c] = multiply(dac, row_weights[c], vdd);
  }
  return out;
}

Voltage ref_column_voltage(RefPattern pattern, double cap_ratio, SupplyVoltage vdd) {
  if (cap_ratio < 0.0) {
    throw std::invalid_argument("cap_ratio must be non-negative");
  }
  const double n = static_cast<double>(pattern.n_ones);
  // N cells see the half-VDD reference input, the rest restore to VDD.
  // Keep the (sum + ratio * VDD) / (16 + ratio) arrangement in sync with
  // accumulate() so both sides of a comparator agree bit-for-bit at VDD = 1.
  const double cbl_sum = (n / 2.0 + (16.0 - n)) * vdd.volts;
  return Voltage{(cbl_sum + cap_ratio * vdd.volts) / (16.0 + cap_ratio)};
}

}  // namespace cimforge
