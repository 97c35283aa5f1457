#pragma once

#include <span>

#include "cimforge/macro.hpp"

namespace cimforge {

// Measured silicon shares used by the energy/latency split.
inline constexpr double kAmuEnergyFraction = 0.114;   // AMUs; rest is periphery+ADC
inline constexpr double kAdcDelayFraction = 0.318;    // ADC share of the MAC cycle
inline constexpr double kMacroAreaMm2 = 0.0324;

// Per-conversion ADC energy in units of the 4-bit resistor-ladder full
// flash. Half of that unit is the 15 comparators, half the static ladder;
// the coarse-fine design fires 8 comparators and swaps the ladder for
// in-SRAM reference columns, whose relative cost is calibrated so the
// overall ratio lands at the measured 0.561.
inline constexpr double kComparatorEnergyShare = 0.5;
inline constexpr double kCoarseFineEnergyRatio = 0.561;
inline constexpr double kInSramReferenceScale =
    (kCoarseFineEnergyRatio - kComparatorEnergyShare * (8.0 / 15.0)) /
    (1.0 - kComparatorEnergyShare);

struct CostAnchor {
  double vdd = 0.0;
  double value = 0.0;
};

// Piecewise interpolation that is linear in vdd and logarithmic in the
// value (energy and speed move exponentially over this supply range).
// Exact at the anchors; the end segments extend beyond them.
double log_linear_interp(std::span<const CostAnchor> anchors, double vdd);

double efficiency_tops_per_watt(double vdd);
double clock_mhz(double vdd);

// Peak 8-bit-weight throughput normalized to 2 KB of array, scaled by the
// fraction of rows a cycle activates.
double throughput_gops_per_2kb(double vdd, int rows);

// Relative per-conversion energy of an ADC configuration (1.0 = 4-bit
// resistor-ladder full flash).
double adc_energy_units(const AdcConfig& cfg);

struct AdcEnergyComparison {
  int full_flash_comparators = 0;
  int coarse_fine_comparators = 0;
  double full_flash_units = 0.0;
  double coarse_fine_units = 0.0;
  double saving_fraction = 0.0;            // 1 - coarse_fine/full_flash
  double comparator_only_saving = 0.0;     // limit with free references: 1 - 8/15
};

// Head-to-head of the two 4-bit read-out schemes.
AdcEnergyComparison adc_energy_comparison();

struct CostReport {
  double vdd = 0.0;
  int rows = 0;
  double efficiency_tops_w = 0.0;
  double clock_mhz = 0.0;
  double frequency_hz = 0.0;
  double mac_cycle_ns = 0.0;
  double throughput_gops_per_2kb = 0.0;
  int ops_per_cycle = 0;  // 2 * rows * 8 multiply-accumulates issued per cycle
  double energy_per_cycle_j = 0.0;  // ops_per_cycle / (TOPS/W * 1e12)
  double adc_delay_fraction = 0.0;
  double amu_energy_fraction = 0.0;
  double periphery_adc_energy_fraction = 0.0;
  double adc_energy_units = 0.0;
  int comparators_per_conversion = 0;
  double area_mm2 = 0.0;
};

CostReport cost_report(const MacroConfig& cfg);

}  // namespace cimforge
