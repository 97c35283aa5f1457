#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cimforge/charge.hpp"
#include "cimforge/parallel.hpp"
#include "cimforge/rng.hpp"

namespace cimforge {

// Standard deviation of the shared-CBL voltage after the DAC step, anchored
// per supply point for the mid code and interpolated linearly in between.
// Mismatch bites hardest at low supply; the code dependence is a shallow
// parabola (full-scale and zero-scale codes leave fewer cells fighting the
// share, so they spread slightly less).
struct DacSigmaTable {
  std::array<double, 3> vdd_anchors{0.6, 0.9, 1.2};
  std::array<double, 3> sigma_mv{1.8, 1.2, 0.9};

  double sigma_volts(SupplyVoltage vdd, int code) const;
};

struct NoiseModel {
  bool enabled = false;
  DacSigmaTable dac_table{};
  double abl_sigma_mv = 2.0;
  double cmp_sigma_mv = 2.0;

  // Every draw is addressed, never streamed: the same (scope, index) pair
  // yields the same value whatever order the simulator visits it in.

  // One draw per AMU per cycle; the AMU's 16 columns share its DAC level, so
  // they share its noise too. Zero when disabled.
  double dac_noise_volts(const CounterRng& cycle_rng, int amu_row, int amu_col,
                         SupplyVoltage vdd, int code) const;

  // Accumulation-line noise, one draw per macro column per cycle.
  double abl_noise_volts(const CounterRng& cycle_rng, int column) const;

  // Static comparator input offsets, fixed per macro instance.
  std::vector<double> comparator_offsets(const CounterRng& macro_rng,
                                         int count) const;
};

struct MonteCarloResult {
  int code = 0;
  std::int64_t samples = 0;
  double mean_volts = 0.0;
  double std_mv = 0.0;
  double min_volts = 0.0;
  double max_volts = 0.0;
};

// Draws `samples` noisy DAC conversions of `x` and reduces them with a serial
// two-pass mean / sample standard deviation, so the parallel and serial
// policies return bit-identical statistics. A disabled model collapses to
// the noiseless value (zero spread).
MonteCarloResult run_montecarlo_dac(SupplyVoltage vdd, InputActivation x,
                                    std::int64_t samples,
                                    const NoiseModel& model,
                                    std::uint64_t seed, ExecPolicy policy);

}  // namespace cimforge
