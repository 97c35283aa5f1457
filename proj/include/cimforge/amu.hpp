#pragma once

#include <array>
#include <cstdint>

#include "cimforge/charge.hpp"

namespace cimforge {

inline constexpr int kLocalArraysPerAmu = 16;
inline constexpr int kCellsPerLocalArray = 16;

// Type B local peripherals carry the pass switch that separates the
// binary-weighted discharge groups until the DAC charge-sharing step.
enum class PeripheralType { TypeA, TypeB };

enum class AmuPhase { Idle, Precharged, Converted, Multiplied };

// Assignment of the 16 CBL indices to discharge groups. Groups 0..3 have
// sizes 8, 4, 2, 1 and belong to input bits 3..0; group 4 is the single
// always-precharged capacitor. Only the group sizes matter for behavior,
// so the physical ordering is configurable.
struct DacGroupMap {
  std::array<std::uint8_t, kLocalArraysPerAmu> group_of{};

  // Contiguous MSB-first layout: {0-7}, {8-11}, {12,13}, {14}, {15}.
  static DacGroupMap contiguous();

  // Throws if the group sizes are not exactly {8, 4, 2, 1, 1}.
  void validate() const;
};

struct LocalArray {
  std::array<WeightBit, kCellsPerLocalArray> cells;
  PeripheralType peripheral = PeripheralType::TypeA;
  ChargeNode cbl{1.0, Voltage{0.0}};
};

using AmuCellMatrix =
    std::array<std::array<WeightBit, kCellsPerLocalArray>, kLocalArraysPerAmu>;

// One analog multiplication unit: 16 local arrays of 16 bit-cells each.
// AmuState is a value; the phase operations return updated copies.
struct AmuState {
  std::array<LocalArray, kLocalArraysPerAmu> local_arrays;
  DacGroupMap group_map;
  AmuPhase phase = AmuPhase::Idle;

  static AmuState with_weights(const AmuCellMatrix& cells,
                               DacGroupMap map = DacGroupMap::contiguous());
};

// Phase 1: every CBL precharged to VDD. Requires phase Idle.
AmuState precharge(const AmuState& amu, SupplyVoltage vdd);

// Phase 2: binary-weighted groups discharge for the set input bits, then all
// 16 CBLs share charge; every CBL ends at dac_convert(x). Requires Precharged.
AmuState dac_phase(const AmuState& amu, InputActivation x, SupplyVoltage vdd);

// Phase 3: with the iBL disconnected, each local array multiplies its CBL by
// the weight bit stored in the selected word row. Requires Converted.
AmuState mult_phase(const AmuState& amu, int row, SupplyVoltage vdd);

// Returns to Idle so another cycle can start. Requires Multiplied.
AmuState end_cycle(const AmuState& amu);

// Closed form of a full precharge/convert/multiply cycle: column c carries
// VDD * (16 - x * w_c) / 16.
std::array<Voltage, kLocalArraysPerAmu> amu_products(
    InputActivation x, const std::array<WeightBit, kLocalArraysPerAmu>& row_weights,
    SupplyVoltage vdd);

// Stored-'1' count in the selected row of a reference column.
struct RefPattern {
  int n_ones;

  explicit RefPattern(int n) : n_ones(n) {
    if (n < 0 || n > 16) {
      throw std::invalid_argument("reference pattern requires 0..16 stored ones");
    }
  }
};

// Reference level generated by an AMU_REF column driven with the half-VDD
// input pattern: N cells keep VDD/2, the other 16-N pull to VDD, and the ABL
// capacitance joins the share. At cap_ratio = 0 this is
// (N/2 + (16 - N)) * VDD / 16, which sits at partial-MAC decision level 8N.
Voltage ref_column_voltage(RefPattern pattern, double cap_ratio, SupplyVoltage vdd);

}  // namespace cimforge
