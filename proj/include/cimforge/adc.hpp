#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cimforge/charge.hpp"

namespace cimforge {

// Comparator decisions must not flip on the last-ulp difference between a
// voltage reached through the 16-term charge summation and the same level
// produced by a reference column's closed form. One picovolt-ish slack is
// orders of magnitude below both the LSB (~10 mV) and any modeled noise.
inline constexpr double kTieEpsilonVolts = 1e-12;

enum class ReferenceMode { InSram, Ideal };
enum class AdcScheme { CoarseFine, FullFlash };

// Number of bits needed to count every partial-MAC level 0 .. 15 * rows.
int quantizer_bits(int rows);

// Quantized range retained after discarding the top `cutoff` fraction of the
// full-scale count: round-half-up((1 - cutoff) * 2^quantizer_bits). Codes
// saturate at pMAC >= threshold.
int cutoff_threshold(double cutoff, int rows);

struct AdcConfig {
  int bits = 4;
  double cutoff = 0.5;
  ReferenceMode ref_mode = ReferenceMode::InSram;
  AdcScheme scheme = AdcScheme::CoarseFine;

  // Throws ConfigError when the combination cannot be built: non-integer
  // dequantization step, in-SRAM references outside the 4-bit/128 regime, or
  // a coarse-fine bank at a width other than 4 bits.
  void validate(int rows) const;
};

// Reference voltages for decision levels k * step, k = 1 .. 2^bits - 1,
// descending (higher code boundaries sit at lower ABL voltages). In-SRAM
// references come from AMU_REF columns driven with the half-VDD pattern;
// ideal references are the exact decision-level voltages.
std::vector<Voltage> build_reference_ladder(const AdcConfig& cfg, int rows,
                                            double cap_ratio, SupplyVoltage vdd);

// Single comparator: fires when the signal has dropped to or below the
// reference (plus a static input offset).
bool compare(Voltage signal, Voltage reference, double offset_volts);

struct DigitizeResult {
  int code = 0;
  int comparisons = 0;
};

// All 2^bits - 1 comparators evaluate at once; the code is the thermometer
// weight, which tolerates bubbles from comparator offsets. `offsets` is one
// entry per ladder rung, or empty for ideal comparators.
DigitizeResult full_flash_digitize(Voltage signal, std::span<const Voltage> ladder,
                                   std::span<const double> offsets);

// Two-step 4-bit conversion with 8 comparators: offsets[0] resolves the MSB
// against the mid ladder rung, then the 7-comparator fine bank (offsets[1..7])
// is reused on whichever half was selected.
DigitizeResult coarse_fine_digitize(Voltage signal, std::span<const Voltage> ladder,
                                    std::span<const double> offsets);

DigitizeResult digitize(const AdcConfig& cfg, Voltage signal,
                        std::span<const Voltage> ladder,
                        std::span<const double> offsets);

// Comparators a scheme evaluates per conversion: 2^bits - 1 for full flash,
// 8 for the coarse-fine bank.
int comparator_count(const AdcConfig& cfg);

// Maps a code back to partial-MAC counts: code * threshold / 2^bits. The step
// must be an integer (enforced by AdcConfig::validate as well).
int dequantize(int code, int threshold, int bits);

// Thermometer word for a code: `code` ones followed by zeros.
std::vector<std::uint8_t> thermometer_encode(int code, int rungs);

}  // namespace cimforge
