#include "cimforge/costmodel.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "cimforge/errors.hpp"

namespace cimforge {
namespace {

// Silicon calibration points. Throughput was characterized at the upper two
// supplies only, so below 0.9 V it extrapolates along that segment.
constexpr std::array<CostAnchor, 3> kEfficiencyAnchors{
    CostAnchor{0.6, 50.07}, CostAnchor{0.9, 22.19}, CostAnchor{1.2, 9.77}};
constexpr std::array<CostAnchor, 3> kClockAnchors{
    CostAnchor{0.6, 76.9}, CostAnchor{0.9, 1e3 / 4.4}, CostAnchor{1.2, 435.0}};
constexpr std::array<CostAnchor, 2> kThroughputAnchors{
    CostAnchor{0.9, 45.54}, CostAnchor{1.2, 89.04}};

}  // namespace

double log_linear_interp(std::span<const CostAnchor> anchors, double vdd) {
  if (anchors.size() < 2) {
    throw std::invalid_argument("interpolation needs at least two anchors");
  }
  for (const CostAnchor& a : anchors) {
    if (vdd == a.vdd) {
      return a.value;
    }
  }
  std::size_t hi = 1;
  while (hi + 1 < anchors.size() && vdd > anchors[hi].vdd) {
    ++hi;
  }
  const CostAnchor& a = anchors[hi - 1];
  const CostAnchor& b = anchors[hi];
  const double t = (vdd - a.vdd) / (b.vdd - a.vdd);
  return a.value * std::exp(t * std::log(b.value / a.value));
}

double efficiency_tops_per_watt(double vdd) {
  return log_linear_interp(kEfficiencyAnchors, SupplyVoltage{vdd}.volts);
}

double clock_mhz(double vdd) {
  return log_linear_interp(kClockAnchors, SupplyVoltage{vdd}.volts);
}

double throughput_gops_per_2kb(double vdd, int rows) {
  if (rows != 4 && rows != 8 && rows != 16) {
    throw ConfigError("activated rows must be 4, 8, or 16");
  }
  const double full = log_linear_interp(kThroughputAnchors, SupplyVoltage{vdd}.volts);
  return full * (static_cast<double>(rows) / 16.0);
}

double adc_energy_units(const AdcConfig& cfg) {
  if (cfg.scheme == AdcScheme::CoarseFine) {
    return kComparatorEnergyShare * (8.0 / 15.0) +
           (1.0 - kComparatorEnergyShare) * kInSramReferenceScale;
  }
  // A resistor-ladder flash shrinks comparators and taps together.
  return static_cast<double>((1 << cfg.bits) - 1) / 15.0;
}

AdcEnergyComparison adc_energy_comparison() {
  AdcConfig full_flash;
  full_flash.scheme = AdcScheme::FullFlash;
  full_flash.ref_mode = ReferenceMode::Ideal;
  AdcConfig coarse_fine;  // defaults: 4-bit coarse-fine

  AdcEnergyComparison cmp;
  cmp.full_flash_comparators = comparator_count(full_flash);
  cmp.coarse_fine_comparators = comparator_count(coarse_fine);
  cmp.full_flash_units = adc_energy_units(full_flash);
  cmp.coarse_fine_units = adc_energy_units(coarse_fine);
  cmp.saving_fraction = 1.0 - cmp.coarse_fine_units / cmp.full_flash_units;
  cmp.comparator_only_saving =
      1.0 - static_cast<double>(cmp.coarse_fine_comparators) /
                static_cast<double>(cmp.full_flash_comparators);
  return cmp;
}

CostReport cost_report(const MacroConfig& cfg) {
  cfg.validate();
  CostReport r;
  r.vdd = cfg.vdd;
  r.rows = cfg.activated_rows;
  r.efficiency_tops_w = efficiency_tops_per_watt(cfg.vdd);
  r.clock_mhz = clock_mhz(cfg.vdd);
  r.frequency_hz = r.clock_mhz * 1e6;
  r.mac_cycle_ns = 1e3 / r.clock_mhz;
  r.throughput_gops_per_2kb = throughput_gops_per_2kb(cfg.vdd, cfg.activated_rows);
  r.ops_per_cycle = 2 * cfg.activated_rows * kTileOutputs;
  r.energy_per_cycle_j = r.ops_per_cycle / (r.efficiency_tops_w * 1e12);
  r.adc_delay_fraction = kAdcDelayFraction;
  r.amu_energy_fraction = kAmuEnergyFraction;
  r.periphery_adc_energy_fraction = 1.0 - kAmuEnergyFraction;
  r.adc_energy_units = adc_energy_units(cfg.adc);
  r.comparators_per_conversion = comparator_count(cfg.adc);
  r.area_mm2 = kMacroAreaMm2;
  return r;
}

}  // namespace cimforge
