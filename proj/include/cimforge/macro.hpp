#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cimforge/adc.hpp"
#include "cimforge/charge.hpp"
#include "cimforge/noise.hpp"
#include "cimforge/parallel.hpp"
#include "cimforge/rng.hpp"
#include "cimforge/tensor.hpp"

namespace cimforge {

inline constexpr int kTileRows = 16;     // word rows engaged per analog cycle
inline constexpr int kTileOutputs = 8;   // signed 8-bit outputs per tile
inline constexpr int kWeightBits = 8;
inline constexpr int kDataColumns = kTileOutputs * kWeightBits;  // 64
inline constexpr int kAmuColumnSpan = 16;  // macro columns fed by one AMU's DAC

inline constexpr std::uint64_t kDefaultSeed = 1234;

// Highest partial-MAC count a cycle can produce: 15 * activated rows.
int max_pmac(int rows);

struct MacroConfig {
  double vdd = 1.0;
  int activated_rows = 16;
  double cap_ratio = 1.0;
  AdcConfig adc{};
  NoiseModel noise{};
  std::uint64_t seed = kDefaultSeed;
  ExecPolicy execution = ExecPolicy::Parallel;

  void validate() const;  // throws ConfigError
  SupplyVoltage supply() const { return SupplyVoltage{vdd}; }
  int threshold() const { return cutoff_threshold(adc.cutoff, activated_rows); }
};

// Signed weights for one stored tile: 16 word rows by 8 output columns.
struct WeightTile {
  std::array<std::int8_t, kTileRows * kTileOutputs> w{};

  std::int8_t& at(int k, int n) {
    return w[static_cast<std::size_t>(k * kTileOutputs + n)];
  }
  std::int8_t at(int k, int n) const {
    return w[static_cast<std::size_t>(k * kTileOutputs + n)];
  }
};

// The same tile after bit slicing: column c = n * 8 + b stores bit b of the
// two's-complement weight for output n.
struct BitTile {
  std::array<WeightBit, kTileRows * kDataColumns> bits{};

  WeightBit& at(int k, int c) {
    return bits[static_cast<std::size_t>(k * kDataColumns + c)];
  }
  WeightBit at(int k, int c) const {
    return bits[static_cast<std::size_t>(k * kDataColumns + c)];
  }
};

BitTile bit_slice(const WeightTile& tile);
WeightTile bit_unslice(const BitTile& tile);

// Analytic activity counts for the energy proxies: the macro converts all 64
// data columns every cycle, whether or not a tile uses them all.
struct ConversionCounters {
  std::int64_t mac_cycles = 0;
  std::int64_t conversions = 0;
  std::int64_t comparator_evals = 0;

  void merge(const ConversionCounters& other) {
    mac_cycles += other.mac_cycles;
    conversions += other.conversions;
    comparator_evals += other.comparator_evals;
  }
};

// Distribution of digital partial-MAC counts over the columns that carry real
// outputs (zero-padded tile columns are excluded).
struct PmacHistogram {
  std::array<std::int64_t, kPmacLevels> counts{};

  void add(int pmac);
  void merge(const PmacHistogram& other);
  std::int64_t total() const;
};

struct ColumnResult {
  int pmac = 0;        // digital value of the column's partial MAC
  double v_abl = 0.0;  // accumulation-line voltage handed to the ADC, volts
  int code = 0;
};

struct AdcTransferPoint {
  int pmac = 0;
  double v_abl = 0.0;
  int code = 0;
  int dequantized = 0;
};

// Noise-free ADC staircase over the full partial-MAC range 0 .. 15 * rows.
std::vector<AdcTransferPoint> adc_transfer(const MacroConfig& cfg);

// One macro instance: fixed reference ladder and comparator offsets, shared
// by every cycle. Voltages follow the analog route (DAC, per-bit multiply,
// charge-shared accumulation) rather than digital shortcuts, so clipping and
// quantization emerge from comparator decisions.
class MacroEngine {
 public:
  explicit MacroEngine(const MacroConfig& cfg);

  const MacroConfig& config() const { return cfg_; }
  const std::vector<Voltage>& ladder() const { return ladder_; }
  const std::vector<double>& comparator_offsets() const { return offsets_; }
  int threshold() const { return threshold_; }

  // RNG scoped to one analog cycle. Keys depend only on the indices, never
  // on evaluation order, so serial and parallel schedules draw identically.
  CounterRng cycle_rng(std::int64_t m, std::int64_t ktile,
                       std::int64_t ntile) const;

  // Converts one column: 16 DAC/multiply products, charge-shared with the
  // accumulation-line capacitance, then digitized. Activations beyond
  // activated_rows must be zero (an idle row's line stays at VDD, which is
  // exactly the x = 0 voltage).
  ColumnResult convert_column(std::span<const InputActivation> x,
                              const BitTile& tile, int column,
                              const CounterRng& cycle_rng) const;

  // One tile cycle: 64 conversions recombined into 8 signed outputs in
  // partial-MAC units (bit b carries weight 2^b, bit 7 carries -2^7).
  std::array<std::int64_t, kTileOutputs> mac_cycle(
      std::span<const InputActivation> x, const BitTile& tile,
      const CounterRng& cycle_rng, PmacHistogram* hist = nullptr,
      int live_outputs = kTileOutputs) const;

  // X is M x K activation codes 0..15, W is K x N signed weights; the result
  // is the exact integer product under an ideal read-out and a quantized
  // approximation otherwise. K splits into activated_rows-sized chunks, N
  // into 8-output tiles; digital accumulation across chunks is full precision.
  Matrix<std::int64_t> matmul(const Matrix<std::uint8_t>& x,
                              const Matrix<std::int8_t>& w,
                              ConversionCounters* counters = nullptr,
                              PmacHistogram* hist = nullptr) const;

 private:
  MacroConfig cfg_;
  SupplyVoltage vdd_;
  int threshold_;
  std::vector<Voltage> ladder_;
  std::vector<double> offsets_;
  CounterRng base_rng_;
};

// Plain nested-loop implementation of the same contract, kept as the witness
// for the tiled/parallel engine: results must match it bit for bit.
Matrix<std::int64_t> matmul_reference(const MacroConfig& cfg,
                                      const Matrix<std::uint8_t>& x,
                                      const Matrix<std::int8_t>& w);

}  // namespace cimforge
