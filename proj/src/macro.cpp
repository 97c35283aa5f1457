#include "cimforge/macro.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "cimforge/errors.hpp"

namespace cimforge {
namespace {

// Scope word separating per-cycle noise keys from everything else derived
// from the root seed (e.g. the static comparator offsets).
constexpr std::uint64_t kCycleTag = 0x6379636cULL;

SupplyVoltage checked_supply(const MacroConfig& cfg) {
  cfg.validate();
  return cfg.supply();
}

void check_activation_matrix(const Matrix<std::uint8_t>& x) {
  for (std::int64_t i = 0; i < x.size(); ++i) {
    if (x.data()[i] > 15) {
      throw std::invalid_argument("activation codes must be 0..15");
    }
  }
}

}  // namespace

int max_pmac(int rows) {
  if (rows != 4 && rows != 8 && rows != 16) {
    throw ConfigError("activated rows must be 4, 8, or 16");
  }
  return 15 * rows;
}

void MacroConfig::validate() const {
  if (!(vdd >= kMinSupplyVolts && vdd <= kMaxSupplyVolts)) {
    throw ConfigError("vdd must lie in [0.6, 1.2] V");
  }
  // 8 and 16 are the hardware's row counts; 4 exists for analysis sweeps.
  if (activated_rows != 4 && activated_rows != 8 && activated_rows != 16) {
    throw ConfigError("activated_rows must be 4, 8, or 16");
  }
  if (!(cap_ratio >= 0.0)) {
    throw ConfigError("cap_ratio must be non-negative");
  }
  if (!(noise.abl_sigma_mv >= 0.0) || !(noise.cmp_sigma_mv >= 0.0)) {
    throw ConfigError("noise sigmas must be non-negative");
  }
  adc.validate(activated_rows);
}

BitTile bit_slice(const WeightTile& tile) {
  BitTile out;
  for (int k = 0; k < kTileRows; ++k) {
    for (int n = 0; n < kTileOutputs; ++n) {
      const auto u = static_cast<std::uint8_t>(tile.at(k, n));
      for (int b = 0; b < kWeightBits; ++b) {
        out.at(k, n * kWeightBits + b) = WeightBit{(u >> b) & 1};
      }
    }
  }
  return out;
}

WeightTile bit_unslice(const BitTile& tile) {
  WeightTile out;
  for (int k = 0; k < kTileRows; ++k) {
    for (int n = 0; n < kTileOutputs; ++n) {
      std::uint8_t u = 0;
      for (int b = 0; b < kWeightBits; ++b) {
        u = static_cast<std::uint8_t>(
            u | (tile.at(k, n * kWeightBits + b).bit << b));
      }
      out.at(k, n) = static_cast<std::int8_t>(u);
    }
  }
  return out;
}

void PmacHistogram::add(int pmac) {
  if (pmac < 0 || pmac >= kPmacLevels) {
    throw std::invalid_argument("partial-MAC count outside 0..240");
  }
  ++counts[static_cast<std::size_t>(pmac)];
}

void PmacHistogram::merge(const PmacHistogram& other) {
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] += other.counts[i];
  }
}

std::int64_t PmacHistogram::total() const {
  std::int64_t sum = 0;
  for (std::int64_t c : counts) {
    sum += c;
  }
  return sum;
}

std::vector<AdcTransferPoint> adc_transfer(const MacroConfig& cfg) {
  cfg.validate();
  const SupplyVoltage vdd = cfg.supply();
  const int threshold = cfg.threshold();
  const auto ladder =
      build_reference_ladder(cfg.adc, cfg.activated_rows, cfg.cap_ratio, vdd);
  std::vector<AdcTransferPoint> points;
  points.reserve(static_cast<std::size_t>(max_pmac(cfg.activated_rows)) + 1);
  for (int p = 0; p <= max_pmac(cfg.activated_rows); ++p) {
    const Voltage v = pmac_voltage(static_cast<double>(p), cfg.cap_ratio, vdd);
    const DigitizeResult d = digitize(cfg.adc, v, ladder, {});
    points.push_back(
        {p, v.volts, d.code, dequantize(d.code, threshold, cfg.adc.bits)});
  }
  return points;
}

MacroEngine::MacroEngine(const MacroConfig& cfg)
    : cfg_(cfg),
      vdd_(checked_supply(cfg)),
      threshold_(cfg.threshold()),
      ladder_(build_reference_ladder(cfg.adc, cfg.activated_rows, cfg.cap_ratio,
                                     vdd_)),
      offsets_(cfg.noise.comparator_offsets(CounterRng(cfg.seed),
                                            comparator_count(cfg.adc))),
      base_rng_(cfg.seed) {}

CounterRng MacroEngine::cycle_rng(std::int64_t m, std::int64_t ktile,
                                  std::int64_t ntile) const {
  return base_rng_.derive(kCycleTag)
      .derive(static_cast<std::uint64_t>(m))
      .derive(static_cast<std::uint64_t>(ktile))
      .derive(static_cast<std::uint64_t>(ntile));
}

ColumnResult MacroEngine::convert_column(std::span<const InputActivation> x,
                                         const BitTile& tile, int column,
                                         const CounterRng& cycle_rng) const {
  if (x.size() != static_cast<std::size_t>(kTileRows)) {
    throw std::invalid_argument("convert_column expects 16 activations");
  }
  if (column < 0 || column >= kDataColumns) {
    throw std::invalid_argument("column index outside 0..63");
  }
  const int amu_col = column / kAmuColumnSpan;
  std::array<Voltage, kCblPerAbl> v;
  int pmac = 0;
  for (int r = 0; r < kTileRows; ++r) {
    const WeightBit wbit = tile.at(r, column);
    const double v_dac = dac_convert(x[static_cast<std::size_t>(r)], vdd_).volts +
                         cfg_.noise.dac_noise_volts(
                             cycle_rng, r, amu_col, vdd_,
                             x[static_cast<std::size_t>(r)].code);
    v[static_cast<std::size_t>(r)] = multiply(Voltage{v_dac}, wbit, vdd_);
    pmac += x[static_cast<std::size_t>(r)].code * wbit.bit;
  }
  const double v_abl = accumulate(v, cfg_.cap_ratio, vdd_).volts +
                       cfg_.noise.abl_noise_volts(cycle_rng, column);
  const DigitizeResult d = digitize(cfg_.adc, Voltage{v_abl}, ladder_, offsets_);
  return {pmac, v_abl, d.code};
}

std::array<std::int64_t, kTileOutputs> MacroEngine::mac_cycle(
    std::span<const InputActivation> x, const BitTile& tile,
    const CounterRng& cycle_rng, PmacHistogram* hist, int live_outputs) const {
  if (live_outputs < 0 || live_outputs > kTileOutputs) {
    throw std::invalid_argument("live_outputs must be 0..8");
  }
  std::array<std::int64_t, kTileOutputs> out{};
  for (int n = 0; n < kTileOutputs; ++n) {
    for (int b = 0; b < kWeightBits; ++b) {
      const ColumnResult col =
          convert_column(x, tile, n * kWeightBits + b, cycle_rng);
      const auto deq = static_cast<std::int64_t>(
          dequantize(col.code, threshold_, cfg_.adc.bits));
      // Bit 7 is the two's-complement sign plane.
      out[static_cast<std::size_t>(n)] +=
          b == kWeightBits - 1 ? -(deq << 7) : deq << b;
      if (hist != nullptr && n < live_outputs) {
        hist->add(col.pmac);
      }
    }
  }
  return out;
}

Matrix<std::int64_t> MacroEngine::matmul(const Matrix<std::uint8_t>& x,
                                         const Matrix<std::int8_t>& w,
                                         ConversionCounters* counters,
                                         PmacHistogram* hist) const {
  if (x.cols() != w.rows()) {
    throw std::invalid_argument("matmul inner dimensions disagree");
  }
  if (x.rows() < 1 || x.cols() < 1 || w.cols() < 1) {
    throw std::invalid_argument("matmul dimensions must be non-empty");
  }
  check_activation_matrix(x);
  const std::int64_t m_count = x.rows();
  const std::int64_t k_count = x.cols();
  const std::int64_t n_count = w.cols();
  const int rows = cfg_.activated_rows;
  const std::int64_t ktiles = (k_count + rows - 1) / rows;
  const std::int64_t ntiles = (n_count + kTileOutputs - 1) / kTileOutputs;

  // Slice every weight tile once; zero rows and columns pad the edges. A zero
  // weight bit and a zero activation both leave the line at VDD, so padding
  // is indistinguishable from idle hardware.
  std::vector<BitTile> tiles(static_cast<std::size_t>(ktiles * ntiles));
  for (std::int64_t kt = 0; kt < ktiles; ++kt) {
    for (std::int64_t nt = 0; nt < ntiles; ++nt) {
      WeightTile tile;
      for (int r = 0; r < rows; ++r) {
        const std::int64_t k = kt * rows + r;
        if (k >= k_count) {
          break;
        }
        for (int n = 0; n < kTileOutputs; ++n) {
          const std::int64_t col = nt * kTileOutputs + n;
          tile.at(r, n) = col < n_count ? w(k, col) : std::int8_t{0};
        }
      }
      tiles[static_cast<std::size_t>(kt * ntiles + nt)] = bit_slice(tile);
    }
  }

  Matrix<std::int64_t> y(m_count, n_count);
  std::vector<PmacHistogram> partial_hists(
      hist != nullptr ? static_cast<std::size_t>(m_count) : 0u);
  for_each_index(m_count, cfg_.execution, [&](std::int64_t m) {
    PmacHistogram* row_hist =
        hist != nullptr ? &partial_hists[static_cast<std::size_t>(m)] : nullptr;
    for (std::int64_t kt = 0; kt < ktiles; ++kt) {
      std::array<InputActivation, kTileRows> xt{};
      for (int r = 0; r < rows; ++r) {
        const std::int64_t k = kt * rows + r;
        if (k < k_count) {
          xt[static_cast<std::size_t>(r)] = InputActivation{x(m, k)};
        }
      }
      for (std::int64_t nt = 0; nt < ntiles; ++nt) {
        const int live = static_cast<int>(
            std::min<std::int64_t>(kTileOutputs, n_count - nt * kTileOutputs));
        const auto out =
            mac_cycle(xt, tiles[static_cast<std::size_t>(kt * ntiles + nt)],
                      cycle_rng(m, kt, nt), row_hist, live);
        for (int j = 0; j < live; ++j) {
          y(m, nt * kTileOutputs + j) += out[static_cast<std::size_t>(j)];
        }
      }
    }
  });

  if (hist != nullptr) {
    for (const PmacHistogram& h : partial_hists) {
      hist->merge(h);
    }
  }
  if (counters != nullptr) {
    ConversionCounters c;
    c.mac_cycles = m_count * ktiles * ntiles;
    c.conversions = c.mac_cycles * kDataColumns;
    c.comparator_evals = c.conversions * comparator_count(cfg_.adc);
    counters->merge(c);
  }
  return y;
}

Matrix<std::int64_t> matmul_reference(const MacroConfig& cfg,
                                      const Matrix<std::uint8_t>& x,
                                      const Matrix<std::int8_t>& w) {
  cfg.validate();
  if (x.cols() != w.rows()) {
    throw std::invalid_argument("matmul inner dimensions disagree");
  }
  if (x.rows() < 1 || x.cols() < 1 || w.cols() < 1) {
    throw std::invalid_argument("matmul dimensions must be non-empty");
  }
  check_activation_matrix(x);
  const SupplyVoltage vdd = cfg.supply();
  const int threshold = cfg.threshold();
  const auto ladder =
      build_reference_ladder(cfg.adc, cfg.activated_rows, cfg.cap_ratio, vdd);
  const CounterRng root(cfg.seed);
  const auto offsets =
      cfg.noise.comparator_offsets(root, comparator_count(cfg.adc));

  const std::int64_t m_count = x.rows();
  const std::int64_t k_count = x.cols();
  const std::int64_t n_count = w.cols();
  const int rows = cfg.activated_rows;
  const std::int64_t ktiles = (k_count + rows - 1) / rows;
  const std::int64_t ntiles = (n_count + kTileOutputs - 1) / kTileOutputs;

  Matrix<std::int64_t> y(m_count, n_count);
  for (std::int64_t m = 0; m < m_count; ++m) {
    for (std::int64_t kt = 0; kt < ktiles; ++kt) {
      for (std::int64_t nt = 0; nt < ntiles; ++nt) {
        const CounterRng rng = root.derive(kCycleTag)
                                   .derive(static_cast<std::uint64_t>(m))
                                   .derive(static_cast<std::uint64_t>(kt))
                                   .derive(static_cast<std::uint64_t>(nt));
        for (int n = 0; n < kTileOutputs; ++n) {
          const std::int64_t col = nt * kTileOutputs + n;
          if (col >= n_count) {
            break;
          }
          for (int b = 0; b < kWeightBits; ++b) {
            const int c = n * kWeightBits + b;
            std::array<Voltage, kCblPerAbl> v;
            for (int r = 0; r < kCblPerAbl; ++r) {
              const std::int64_t k = kt * rows + r;
              const bool active = r < rows && k < k_count;
              const int code = active ? x(m, k) : 0;
              const int wbit =
                  active ? (static_cast<std::uint8_t>(w(k, col)) >> b) & 1 : 0;
              const double v_dac =
                  dac_convert(InputActivation{code}, vdd).volts +
                  cfg.noise.dac_noise_volts(rng, r, c / kAmuColumnSpan, vdd,
                                            code);
              v[static_cast<std::size_t>(r)] =
                  multiply(Voltage{v_dac}, WeightBit{wbit}, vdd);
            }
            const double v_abl = accumulate(v, cfg.cap_ratio, vdd).volts +
                                 cfg.noise.abl_noise_volts(rng, c);
            const DigitizeResult d =
                digitize(cfg.adc, Voltage{v_abl}, ladder, offsets);
            const auto deq = static_cast<std::int64_t>(
                dequantize(d.code, threshold, cfg.adc.bits));
            y(m, col) += b == kWeightBits - 1 ? -(deq << 7) : deq << b;
          }
        }
      }
    }
  }
  return y;
}

}  // namespace cimforge
