#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cimforge/macro.hpp"

namespace cimforge {

enum class LayerKind { Dense, Conv2d };

// One quantized layer. Weights are stored as signed 8-bit integers with a
// per-tensor scale (real weight = q * w_scale); the layer's inputs are
// quantized to 4-bit codes with act_scale (code = clamp(round(x / s), 0, 15)).
// Dense weights are [out_features, in_features]; conv weights are
// [out_channels, in_channels * kernel * kernel] and convolve stride-1, valid.
struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int in_features = 0;
  int out_features = 0;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int in_height = 0;
  int in_width = 0;
  bool relu = false;
  double w_scale = 1.0;
  double act_scale = 1.0;
  Matrix<std::int8_t> weights;
};

// Features produced by the layer (dense: out_features; conv: channels times
// the valid output positions).
int layer_output_features(const LayerSpec& layer);

struct Workload {
  std::string name;
  std::vector<LayerSpec> layers;
  Matrix<double> eval_inputs;      // [samples, features]
  std::vector<int> eval_labels;    // argmax targets, one per sample
};

// Shape-consistency check across the layer chain and the eval set.
void validate_workload(const Workload& w);

// Directory layout: manifest.json plus one CSV per weight tensor and the
// eval inputs/labels.
Workload load_workload(const std::filesystem::path& dir);
void save_workload(const std::filesystem::path& dir, const Workload& w);

// Symmetric 4-bit activation quantization, round-to-nearest-even.
Matrix<std::uint8_t> quantize_activations(const Matrix<double>& x, double scale);

// Weights dequantized back to real units, [out, in].
Matrix<double> dequantized_weights(const LayerSpec& layer);

// Activation matrix ready for the layer's matmul: dense input passes through
// as [M, in]; conv input [M, c*h*w] lowers to [M * positions, c*k*k] patches.
Matrix<double> lower_layer(const LayerSpec& layer, const Matrix<double>& input);

// Inverse of the conv lowering on the output side: [M * positions, out_c]
// back to [M, out_c * oh * ow] feature rows.
Matrix<double> regroup_conv_output(const LayerSpec& layer,
                                   const Matrix<double>& flat, std::int64_t m);

// Full-precision forward pass over dequantized weights. If layer_outs is
// given it receives each layer's pre-activation output in real units.
Matrix<double> float_forward(const Workload& w, const Matrix<double>& inputs,
                             std::vector<Matrix<double>>* layer_outs = nullptr);

// Digital fixed-point forward: 4-bit activation codes times 8-bit weights
// with exact 64-bit accumulation, rescaled to real units between layers.
// This is the ceiling an ideal read-out must reproduce bit for bit.
Matrix<double> quantized_forward(const Workload& w, const Matrix<double>& inputs,
                                 std::vector<Matrix<double>>* layer_outs = nullptr);

// Same dataflow, but every matmul runs through the macro engine.
Matrix<double> macro_forward(const Workload& w, const Matrix<double>& inputs,
                             const MacroEngine& engine,
                             ConversionCounters* counters = nullptr,
                             PmacHistogram* hist = nullptr,
                             std::vector<Matrix<double>>* layer_outs = nullptr);

// Fraction of rows whose argmax (ties to the lowest index) hits the label.
double accuracy_from_outputs(const Matrix<double>& outputs,
                             std::span<const int> labels);

struct ErrorMetrics {
  double mse = 0.0;
  double max_abs = 0.0;
  double sqnr_db = 0.0;      // clamped to [-300, 300] so exact matches stay finite
  double exact_match = 0.0;  // fraction of entries equal bit for bit
};

ErrorMetrics error_metrics(const Matrix<double>& reference,
                           const Matrix<double>& actual);

// One spot in the design space. Reference mode and comparator scheme follow
// from it: in-SRAM references exist only for the 4-bit/128-count regime, and
// the coarse-fine bank only at 4 bits.
struct DesignPoint {
  int rows = 16;
  int adc_bits = 4;
  double cutoff = 0.5;
  bool hw_errors = false;
  std::uint64_t seed = kDefaultSeed;
};

// Applies a design point on top of a base configuration.
MacroConfig apply_design_point(const MacroConfig& base, const DesignPoint& p);

struct EvalResult {
  DesignPoint point;
  int threshold = 0;
  double accuracy = 0.0;
  double float_baseline_acc = 0.0;
  double quant_baseline_acc = 0.0;
  double acc_drop_pp = 0.0;  // percentage points below the float baseline
  double efficiency_tops_w = 0.0;
  std::int64_t conversions = 0;
  std::int64_t adc_energy_proxy = 0;  // comparator evaluations
  std::int64_t dac_energy_proxy = 0;  // cycles * activated rows * 4 groups
  std::vector<ErrorMetrics> layer_metrics;  // macro vs float, pre-activation
  bool hist_collected = false;
  PmacHistogram hist;
};

EvalResult evaluate_point(const DesignPoint& p, const Workload& w,
                          const MacroConfig& base, bool collect_hist = false);

struct SweepGrid {
  std::vector<int> rows_values{16};
  std::vector<int> bits_values{4};
  std::vector<double> cutoff_values{0.5};
  std::vector<int> hw_errors_values{0};
  std::vector<std::uint64_t> seeds{kDefaultSeed};
};

// Validates every grid point up front (a bad combination aborts the sweep
// before any evaluation), then walks the grid in (rows, bits, cutoff,
// hw_errors, seed) order.
std::vector<EvalResult> run_sweep(const SweepGrid& grid, const Workload& w,
                                  const MacroConfig& base,
                                  bool collect_hist = false);

void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const EvalResult> results, int layer_count);
void write_pmac_hist_csv(const std::filesystem::path& path,
                         std::span<const EvalResult> results);

// Bundled synthetic classification workload: random class prototypes, a
// hidden layer keyed to them, and jittered prototype samples for evaluation.
// Fully deterministic in the seed. The defaults keep the hidden width a
// multiple of the class count so every class gets the same number of votes,
// and give the logits enough margin that read-out noise rarely flips them.
struct SmallFcParams {
  int classes = 10;
  int features = 96;
  int hidden = 40;
  int eval_per_class = 36;
  double jitter = 0.08;
  std::uint64_t seed = 7;
};

Workload make_small_fc_workload(const SmallFcParams& params = {});

}  // namespace cimforge
