#include "cimforge/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cimforge {
namespace {

// Domain words keep the dac / abl / comparator counter spaces disjoint even
// though they hang off the same derived key.
constexpr std::uint64_t kDacTag = 0x64616321;  // "dac!"
constexpr std::uint64_t kAblTag = 0x61626c21;  // "abl!"
constexpr std::uint64_t kCmpTag = 0x636d7021;  // "cmp!"

}  // namespace

double DacSigmaTable::sigma_volts(SupplyVoltage vdd, int code) const {
  if (code < 0 || code > 15) {
    throw std::invalid_argument("DAC code must be 0..15");
  }
  const double v = vdd.volts;
  double base_mv = sigma_mv.back();
  if (v <= vdd_anchors.front()) {
    base_mv = sigma_mv.front();
  } else {
    for (std::size_t i = 1; i < vdd_anchors.size(); ++i) {
      if (v <= vdd_anchors[i]) {
        const double t = (v - vdd_anchors[i - 1]) /
                         (vdd_anchors[i] - vdd_anchors[i - 1]);
        base_mv = sigma_mv[i - 1] + t * (sigma_mv[i] - sigma_mv[i - 1]);
        break;
      }
    }
  }
  const double centered = (static_cast<double>(code) - 8.0) / 8.0;
  const double shape = 1.0 - 0.3 * centered * centered;
  return base_mv * shape * 1e-3;
}

double NoiseModel::dac_noise_volts(const CounterRng& cycle_rng, int amu_row,
                                   int amu_col, SupplyVoltage vdd,
                                   int code) const {
  if (!enabled) {
    return 0.0;
  }
  const auto index = static_cast<std::uint64_t>(amu_row) * 16u +
                     static_cast<std::uint64_t>(amu_col);
  const double g = cycle_rng.derive(kDacTag).gaussian(index);
  return g * dac_table.sigma_volts(vdd, code);
}

double NoiseModel::abl_noise_volts(const CounterRng& cycle_rng,
                                   int column) const {
  if (!enabled) {
    return 0.0;
  }
  const double g =
      cycle_rng.derive(kAblTag).gaussian(static_cast<std::uint64_t>(column));
  return g * abl_sigma_mv * 1e-3;
}

std::vector<double> NoiseModel::comparator_offsets(const CounterRng& macro_rng,
                                                   int count) const {
  std::vector<double> offsets(static_cast<std::size_t>(count), 0.0);
  if (!enabled) {
    return offsets;
  }
  const CounterRng rng = macro_rng.derive(kCmpTag);
  for (int i = 0; i < count; ++i) {
    offsets[static_cast<std::size_t>(i)] =
        rng.gaussian(static_cast<std::uint64_t>(i)) * cmp_sigma_mv * 1e-3;
  }
  return offsets;
}

MonteCarloResult run_montecarlo_dac(SupplyVoltage vdd, InputActivation x,
                                    std::int64_t samples,
                                    const NoiseModel& model,
                                    std::uint64_t seed, ExecPolicy policy) {
  if (samples < 2) {
    throw std::invalid_argument("monte-carlo needs at least 2 samples");
  }
  const double nominal = dac_convert(x, vdd).volts;
  const double sigma =
      model.enabled ? model.dac_table.sigma_volts(vdd, x.code) : 0.0;
  const CounterRng rng = CounterRng(seed).derive(kDacTag).derive(x.code);

  std::vector<double> values(static_cast<std::size_t>(samples));
  for_each_index(samples, policy, [&](std::int64_t i) {
    values[static_cast<std::size_t>(i)] =
        nominal + sigma * rng.gaussian(static_cast<std::uint64_t>(i));
  });

  // Serial two-pass reduction: the statistics must not depend on how the
  // samples were scheduled above.
  double sum = 0.0;
  double lo = values.front();
  double hi = values.front();
  for (double v : values) {
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double mean = sum / static_cast<double>(samples);
  double sq = 0.0;
  for (double v : values) {
    const double d = v - mean;
    sq += d * d;
  }
  const double var = sq / static_cast<double>(samples - 1);

  MonteCarloResult result;
  result.code = x.code;
  result.samples = samples;
  result.mean_volts = mean;
  result.std_mv = std::sqrt(var) * 1e3;
  result.min_volts = lo;
  result.max_volts = hi;
  return result;
}

}  // namespace cimforge
