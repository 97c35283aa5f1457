#include "cimforge/adc.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cimforge/amu.hpp"
#include "cimforge/errors.hpp"

namespace cimforge {

int quantizer_bits(int rows) {
  if (rows != 4 && rows != 8 && rows != 16) {
    throw ConfigError("activated rows must be 4, 8, or 16");
  }
  return std::bit_width(static_cast<unsigned>(15 * rows));
}

int cutoff_threshold(double cutoff, int rows) {
  if (!(cutoff >= 0.0 && cutoff < 1.0)) {
    throw ConfigError("cutoff must lie in [0, 1)");
  }
  const int q = quantizer_bits(rows);
  const double full_scale = static_cast<double>(1 << q);
  return static_cast<int>(std::llround((1.0 - cutoff) * full_scale));
}

void AdcConfig::validate(int rows) const {
  if (bits < 1 || bits > 12) {
    throw ConfigError("adc bits must be 1..12");
  }
  if (!(cutoff >= 0.0 && cutoff < 1.0)) {
    throw ConfigError("adc cutoff must lie in [0, 1)");
  }
  const int threshold = cutoff_threshold(cutoff, rows);
  if (threshold < 1) {
    throw ConfigError("cutoff leaves no quantizable range");
  }
  if (threshold % (1 << bits) != 0) {
    throw ConfigError("cutoff threshold " + std::to_string(threshold) +
                      " is not divisible by 2^" + std::to_string(bits) +
                      "; dequantization step would not be an integer");
  }
  if (ref_mode == ReferenceMode::InSram && !(bits == 4 && threshold == 128)) {
    throw ConfigError(
        "in-SRAM references provide the 15 half-VDD levels of the 4-bit/"
        "128-count regime; this configuration needs ideal references");
  }
  if (scheme == AdcScheme::CoarseFine && bits != 4) {
    throw ConfigError("the coarse-fine comparator bank is a 4-bit design");
  }
}

std::vector<Voltage> build_reference_ladder(const AdcConfig& cfg, int rows,
                                            double cap_ratio, SupplyVoltage vdd) {
  cfg.validate(rows);
  const int threshold = cutoff_threshold(cfg.cutoff, rows);
  const int step = threshold / (1 << cfg.bits);
  const int rungs = (1 << cfg.bits) - 1;
  std::vector<Voltage> ladder;
  ladder.reserve(static_cast<std::size_t>(rungs));
  for (int k = 1; k <= rungs; ++k) {
    if (cfg.ref_mode == ReferenceMode::InSram) {
      // Rung k is the AMU_REF column storing k ones; its level equals the
      // decision voltage at pMAC = 8k for any ABL capacitance ratio.
      ladder.push_back(ref_column_voltage(RefPattern{k}, cap_ratio, vdd));
    } else {
      ladder.push_back(
          pmac_voltage(static_cast<double>(k * step), cap_ratio, vdd));
    }
  }
  return ladder;
}

bool compare(Voltage signal, Voltage reference, double offset_volts) {
  return signal.volts <= reference.volts + offset_volts + kTieEpsilonVolts;
}

DigitizeResult full_flash_digitize(Voltage signal, std::span<const Voltage> ladder,
                                   std::span<const double> offsets) {
  if (!offsets.empty() && offsets.size() != ladder.size()) {
    throw std::invalid_argument("need one comparator offset per ladder rung");
  }
  DigitizeResult result;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    const double offset = offsets.empty() ? 0.0 : offsets[k];
    if (compare(signal, ladder[k], offset)) {
      ++result.code;
    }
  }
  result.comparisons = static_cast<int>(ladder.size());
  return result;
}

DigitizeResult coarse_fine_digitize(Voltage signal, std::span<const Voltage> ladder,
                                    std::span<const double> offsets) {
  if (ladder.size() != 15) {
    throw std::invalid_argument("coarse-fine conversion needs a 15-rung ladder");
  }
  if (!offsets.empty() && offsets.size() != 8) {
    throw std::invalid_argument("coarse-fine bank has 8 comparator offsets");
  }
  const auto offset_at = [&](int i) { return offsets.empty() ? 0.0 : offsets[i]; };
  // Step 1: one comparator against the mid rung decides the MSB.
  const bool upper = compare(signal, ladder[7], offset_at(0));
  // Step 2: the same 7 fine comparators bite on the selected half's rungs.
  const int base = upper ? 8 : 0;
  DigitizeResult result;
  result.code = base;
  for (int j = 1; j <= 7; ++j) {
    const int rung = upper ? 7 + j : j - 1;
    if (compare(signal, ladder[static_cast<std::size_t>(rung)], offset_at(j))) {
      ++result.code;
    }
  }
  result.comparisons = 8;
  return result;
}

DigitizeResult digitize(const AdcConfig& cfg, Voltage signal,
                        std::span<const Voltage> ladder,
                        std::span<const double> offsets) {
  return cfg.scheme == AdcScheme::CoarseFine
             ? coarse_fine_digitize(signal, ladder, offsets)
             : full_flash_digitize(signal, ladder, offsets);
}

int comparator_count(const AdcConfig& cfg) {
  return cfg.scheme == AdcScheme::CoarseFine ? 8 : (1 << cfg.bits) - 1;
}

int dequantize(int code, int threshold, int bits) {
  if (bits < 1 || code < 0 || code >= (1 << bits)) {
    throw std::invalid_argument("code out of range for the given bit width");
  }
  if (threshold % (1 << bits) != 0) {
    throw ConfigError("dequantization step is not an integer");
  }
  return code * (threshold / (1 << bits));
}

std::vector<std::uint8_t> thermometer_encode(int code, int rungs) {
  if (code < 0 || code > rungs) {
    throw std::invalid_argument("thermometer code exceeds rung count");
  }
  std::vector<std::uint8_t> word(static_cast<std::size_t>(rungs), 0);
  for (int i = 0; i < code; ++i) {
    word[static_cast<std::size_t>(i)] = 1;
  }
  return word;
}

}  // namespace cimforge
