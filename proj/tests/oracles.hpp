#pragma once

// Test-side reference implementations. Everything here is written from the
// physical description (explicit capacitor lists, plain nested loops, long
// double accumulation) rather than from the library's closed forms, so the
// two sides can genuinely disagree.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cimforge/tensor.hpp"

namespace oracles {

struct Cap {
  double c = 1.0;
  double v = 0.0;
};

// Charge conservation over an explicit node list. Long double keeps the
// oracle's rounding independent of (and tighter than) the library's.
inline double shared_voltage(const std::vector<Cap>& caps) {
  long double charge = 0.0L;
  long double total = 0.0L;
  for (const Cap& n : caps) {
    charge += static_cast<long double>(n.c) * static_cast<long double>(n.v);
    total += static_cast<long double>(n.c);
  }
  return static_cast<double>(charge / total);
}

// Brute-force in-memory DAC: 16 unit capacitors precharged to vdd; the
// binary-weighted groups (sizes 8, 4, 2, 1 for input bits 3..0) discharge
// when their bit is set; the 16th capacitor always keeps its precharge.
inline double dac_voltage(int x, double vdd) {
  std::vector<Cap> caps(16, Cap{1.0, vdd});
  const int group_size[4] = {8, 4, 2, 1};
  int idx = 0;
  for (int g = 0; g < 4; ++g) {
    const bool discharged = ((x >> (3 - g)) & 1) != 0;
    for (int i = 0; i < group_size[g]; ++i, ++idx) {
      if (discharged) {
        caps[static_cast<std::size_t>(idx)].v = 0.0;
      }
    }
  }
  return shared_voltage(caps);
}

// Accumulation line: 16 unit CBL capacitors at the given voltages share with
// the ABL capacitance (cap_ratio units) precharged to vdd.
inline double abl_voltage(const std::vector<double>& cbl, double cap_ratio,
                          double vdd) {
  std::vector<Cap> caps;
  caps.reserve(cbl.size() + 1);
  for (double v : cbl) {
    caps.push_back(Cap{1.0, v});
  }
  caps.push_back(Cap{cap_ratio, vdd});
  return shared_voltage(caps);
}

// Ideal quantizer staircase: codes climb one step per `threshold / 2^bits`
// partial-MAC counts and saturate at the top code.
inline int staircase_code(int pmac, int threshold, int bits) {
  const int step = threshold / (1 << bits);
  return std::min(pmac / step, (1 << bits) - 1);
}

// Exact integer product of 4-bit activation codes and signed 8-bit weights.
inline cimforge::Matrix<std::int64_t> exact_matmul(
    const cimforge::Matrix<std::uint8_t>& x,
    const cimforge::Matrix<std::int8_t>& w) {
  cimforge::Matrix<std::int64_t> out(x.rows(), w.cols());
  for (std::int64_t m = 0; m < x.rows(); ++m) {
    for (std::int64_t n = 0; n < w.cols(); ++n) {
      std::int64_t acc = 0;
      for (std::int64_t k = 0; k < x.cols(); ++k) {
        acc += static_cast<std::int64_t>(x(m, k)) *
               static_cast<std::int64_t>(w(k, n));
      }
      out(m, n) = acc;
    }
  }
  return out;
}

// Two's-complement weight bit, LSB first: bit 7 is the sign.
inline int weight_bit(std::int8_t w, int b) {
  return (static_cast<std::uint8_t>(w) >> b) & 1;
}

// Recombination of 8 per-bit partial sums back into a signed value:
// bits 0..6 carry +2^b, bit 7 carries -2^7.
inline std::int64_t recombine_bits(const std::int64_t bit_sums[8]) {
  std::int64_t out = 0;
  for (int b = 0; b < 7; ++b) {
    out += bit_sums[b] << b;
  }
  out -= bit_sums[7] << 7;
  return out;
}

// Noise-free macro product with per-tile, per-bit-column clipping and
// quantization, mirroring what a perfect ADC of the given width does to each
// analog column before digital recombination.
inline cimforge::Matrix<std::int64_t> quantized_matmul(
    const cimforge::Matrix<std::uint8_t>& x,
    const cimforge::Matrix<std::int8_t>& w, int rows, int threshold,
    int bits) {
  const int step = threshold / (1 << bits);
  const int top_code = (1 << bits) - 1;
  cimforge::Matrix<std::int64_t> out(x.rows(), w.cols());
  const std::int64_t ktiles = (x.cols() + rows - 1) / rows;
  for (std::int64_t m = 0; m < x.rows(); ++m) {
    for (std::int64_t n = 0; n < w.cols(); ++n) {
      std::int64_t acc = 0;
      for (std::int64_t t = 0; t < ktiles; ++t) {
        std::int64_t bit_sums[8] = {};
        for (int b = 0; b < 8; ++b) {
          std::int64_t pmac = 0;
          for (std::int64_t r = 0; r < rows; ++r) {
            const std::int64_t k = t * rows + r;
            if (k < x.cols()) {
              pmac += static_cast<std::int64_t>(x(m, k)) *
                      weight_bit(w(k, n), b);
            }
          }
          const int code =
              std::min(static_cast<int>(pmac) / step, top_code);
          bit_sums[b] = static_cast<std::int64_t>(code) * step;
        }
        acc += recombine_bits(bit_sums);
      }
      out(m, n) = acc;
    }
  }
  return out;
}

// Direct stride-1 valid convolution. Input rows are [c * h * w] feature
// maps, weights are [out_c, in_c * k * k], output rows are [out_c * oh * ow].
inline cimforge::Matrix<double> direct_conv2d(
    const cimforge::Matrix<double>& input,
    const cimforge::Matrix<double>& weights, int in_c, int h, int w, int out_c,
    int k) {
  const int oh = h - k + 1;
  const int ow = w - k + 1;
  cimforge::Matrix<double> out(input.rows(),
                               static_cast<std::int64_t>(out_c) * oh * ow);
  for (std::int64_t m = 0; m < input.rows(); ++m) {
    for (int oc = 0; oc < out_c; ++oc) {
      for (int y = 0; y < oh; ++y) {
        for (int x0 = 0; x0 < ow; ++x0) {
          double acc = 0.0;
          for (int ic = 0; ic < in_c; ++ic) {
            for (int ky = 0; ky < k; ++ky) {
              for (int kx = 0; kx < k; ++kx) {
                const std::int64_t in_col =
                    (static_cast<std::int64_t>(ic) * h + (y + ky)) * w +
                    (x0 + kx);
                const std::int64_t w_col =
                    (static_cast<std::int64_t>(ic) * k + ky) * k + kx;
                acc += input(m, in_col) * weights(oc, w_col);
              }
            }
          }
          out(m, (static_cast<std::int64_t>(oc) * oh + y) * ow + x0) = acc;
        }
      }
    }
  }
  return out;
}

struct Stats {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Two-pass sample statistics (n - 1 divisor), independent of the library's
// reduction.
inline Stats sample_stats(const std::vector<double>& v) {
  Stats s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  long double sum = 0.0L;
  for (double x : v) {
    sum += x;
  }
  s.mean = static_cast<double>(sum / static_cast<long double>(v.size()));
  long double sq = 0.0L;
  for (double x : v) {
    const long double d = x - s.mean;
    sq += d * d;
  }
  s.stddev = static_cast<double>(
      std::sqrt(sq / static_cast<long double>(v.size() - 1)));
  return s;
}

// Deterministic generators for property-style tests.
inline std::mt19937_64 make_gen(std::uint64_t seed) {
  return std::mt19937_64{seed};
}

inline int uniform_int(std::mt19937_64& gen, int lo, int hi) {
  return std::uniform_int_distribution<int>{lo, hi}(gen);
}

inline double uniform_real(std::mt19937_64& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>{lo, hi}(gen);
}

inline cimforge::Matrix<std::uint8_t> random_activations(std::mt19937_64& gen,
                                                         std::int64_t m,
                                                         std::int64_t k) {
  cimforge::Matrix<std::uint8_t> x(m, k);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    x.data()[i] = static_cast<std::uint8_t>(uniform_int(gen, 0, 15));
  }
  return x;
}

inline cimforge::Matrix<std::int8_t> random_weights(std::mt19937_64& gen,
                                                    std::int64_t k,
                                                    std::int64_t n) {
  cimforge::Matrix<std::int8_t> w(k, n);
  for (std::int64_t i = 0; i < w.size(); ++i) {
    w.data()[i] = static_cast<std::int8_t>(uniform_int(gen, -128, 127));
  }
  return w;
}

inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace oracles
