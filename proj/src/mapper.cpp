#include "cimforge/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

#include "cimforge/costmodel.hpp"
#include "cimforge/errors.hpp"

namespace cimforge {
namespace {

using nlohmann::json;

int layer_input_features(const LayerSpec& layer) {
  return layer.kind == LayerKind::Dense
             ? layer.in_features
             : layer.in_channels * layer.in_height * layer.in_width;
}

void check_layer(const LayerSpec& layer, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + ": ";
  if (!(layer.w_scale > 0.0) || !(layer.act_scale > 0.0)) {
    throw IoError(where + "quantization scales must be positive");
  }
  if (layer.kind == LayerKind::Dense) {
    if (layer.in_features < 1 || layer.out_features < 1) {
      throw IoError(where + "dense shape must be positive");
    }
    if (layer.weights.rows() != layer.out_features ||
        layer.weights.cols() != layer.in_features) {
      throw IoError(where + "dense weights must be [out_features, in_features]");
    }
  } else {
    if (layer.in_channels < 1 || layer.out_channels < 1 || layer.kernel < 1) {
      throw IoError(where + "conv shape must be positive");
    }
    if (layer.in_height < layer.kernel || layer.in_width < layer.kernel) {
      throw IoError(where + "conv input smaller than the kernel");
    }
    if (layer.weights.rows() != layer.out_channels ||
        layer.weights.cols() !=
            layer.in_channels * layer.kernel * layer.kernel) {
      throw IoError(where + "conv weights must be [out_channels, in_c*k*k]");
    }
  }
}

// Scale shared by every read-out path so that equal integer accumulations
// rescale to bit-identical reals.
Matrix<double> rescale(const Matrix<std::int64_t>& y, double scale) {
  Matrix<double> out(y.rows(), y.cols());
  for (std::int64_t i = 0; i < y.size(); ++i) {
    out.data()[i] = static_cast<double>(y.data()[i]) * scale;
  }
  return out;
}

Matrix<std::int8_t> transposed_weights(const LayerSpec& layer) {
  const Matrix<std::int8_t>& w = layer.weights;
  Matrix<std::int8_t> t(w.cols(), w.rows());
  for (std::int64_t r = 0; r < w.rows(); ++r) {
    for (std::int64_t c = 0; c < w.cols(); ++c) {
      t(c, r) = w(r, c);
    }
  }
  return t;
}

// Layer-by-layer driver shared by all three read-out paths. `mm` maps the
// lowered activation matrix to pre-activation outputs in real units.
template <typename LayerMatmul>
Matrix<double> forward_impl(const Workload& w, const Matrix<double>& inputs,
                            LayerMatmul&& mm,
                            std::vector<Matrix<double>>* layer_outs) {
  validate_workload(w);
  if (inputs.cols() != layer_input_features(w.layers.front())) {
    throw std::invalid_argument("input width does not match the first layer");
  }
  Matrix<double> act = inputs;
  for (const LayerSpec& layer : w.layers) {
    const Matrix<double> lowered = lower_layer(layer, act);
    Matrix<double> flat = mm(layer, lowered);
    Matrix<double> pre = layer.kind == LayerKind::Conv2d
                             ? regroup_conv_output(layer, flat, inputs.rows())
                             : std::move(flat);
    if (layer_outs != nullptr) {
      layer_outs->push_back(pre);
    }
    if (layer.relu) {
      for (std::int64_t i = 0; i < pre.size(); ++i) {
        pre.data()[i] = std::max(0.0, pre.data()[i]);
      }
    }
    act = std::move(pre);
  }
  return act;
}

}  // namespace

int layer_output_features(const LayerSpec& layer) {
  if (layer.kind == LayerKind::Dense) {
    return layer.out_features;
  }
  const int oh = layer.in_height - layer.kernel + 1;
  const int ow = layer.in_width - layer.kernel + 1;
  return layer.out_channels * oh * ow;
}

void validate_workload(const Workload& w) {
  if (w.layers.empty()) {
    throw IoError("workload has no layers");
  }
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    check_layer(w.layers[i], i);
    if (i > 0 && layer_input_features(w.layers[i]) !=
                     layer_output_features(w.layers[i - 1])) {
      throw IoError("layer " + std::to_string(i) +
                    " input width does not match the previous layer");
    }
  }
  if (w.eval_inputs.cols() != layer_input_features(w.layers.front())) {
    throw IoError("eval inputs do not match the first layer width");
  }
  if (static_cast<std::int64_t>(w.eval_labels.size()) != w.eval_inputs.rows()) {
    throw IoError("one label per eval row required");
  }
  const int classes = layer_output_features(w.layers.back());
  for (int label : w.eval_labels) {
    if (label < 0 || label >= classes) {
      throw IoError("eval label outside the output range");
    }
  }
}

Matrix<std::uint8_t> quantize_activations(const Matrix<double>& x,
                                          double scale) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("activation scale must be positive");
  }
  Matrix<std::uint8_t> q(x.rows(), x.cols());
  for (std::int64_t i = 0; i < x.size(); ++i) {
    const double v = std::nearbyint(x.data()[i] / scale);
    q.data()[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 15.0));
  }
  return q;
}

Matrix<double> dequantized_weights(const LayerSpec& layer) {
  Matrix<double> w(layer.weights.rows(), layer.weights.cols());
  for (std::int64_t i = 0; i < w.size(); ++i) {
    w.data()[i] = static_cast<double>(layer.weights.data()[i]) * layer.w_scale;
  }
  return w;
}

Matrix<double> lower_layer(const LayerSpec& layer, const Matrix<double>& input) {
  if (input.cols() != layer_input_features(layer)) {
    throw std::invalid_argument("activation width does not match the layer");
  }
  if (layer.kind == LayerKind::Dense) {
    return input;
  }
  const int k = layer.kernel;
  const int oh = layer.in_height - k + 1;
  const int ow = layer.in_width - k + 1;
  Matrix<double> out(input.rows() * oh * ow,
                     static_cast<std::int64_t>(layer.in_channels) * k * k);
  for (std::int64_t m = 0; m < input.rows(); ++m) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        const std::int64_t row = (m * oh + y) * ow + x;
        for (int ch = 0; ch < layer.in_channels; ++ch) {
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
              out(row, (static_cast<std::int64_t>(ch) * k + ky) * k + kx) =
                  input(m, (static_cast<std::int64_t>(ch) * layer.in_height +
                            (y + ky)) *
                                   layer.in_width +
                               (x + kx));
            }
          }
        }
      }
    }
  }
  return out;
}

Matrix<double> regroup_conv_output(const LayerSpec& layer,
                                   const Matrix<double>& flat, std::int64_t m) {
  const int oh = layer.in_height - layer.kernel + 1;
  const int ow = layer.in_width - layer.kernel + 1;
  if (flat.rows() != m * oh * ow || flat.cols() != layer.out_channels) {
    throw std::invalid_argument("unexpected lowered conv output shape");
  }
  Matrix<double> out(m, static_cast<std::int64_t>(layer.out_channels) * oh * ow);
  for (std::int64_t i = 0; i < m; ++i) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        for (int oc = 0; oc < layer.out_channels; ++oc) {
          out(i, (static_cast<std::int64_t>(oc) * oh + y) * ow + x) =
              flat((i * oh + y) * ow + x, oc);
        }
      }
    }
  }
  return out;
}

Matrix<double> float_forward(const Workload& w, const Matrix<double>& inputs,
                             std::vector<Matrix<double>>* layer_outs) {
  return forward_impl(
      w, inputs,
      [](const LayerSpec& layer, const Matrix<double>& a) {
        const Matrix<double> wd = dequantized_weights(layer);
        Matrix<double> y(a.rows(), wd.rows());
        for (std::int64_t r = 0; r < a.rows(); ++r) {
          for (std::int64_t o = 0; o < wd.rows(); ++o) {
            double acc = 0.0;
            for (std::int64_t k = 0; k < a.cols(); ++k) {
              acc += a(r, k) * wd(o, k);
            }
            y(r, o) = acc;
          }
        }
        return y;
      },
      layer_outs);
}

Matrix<double> quantized_forward(const Workload& w, const Matrix<double>& inputs,
                                 std::vector<Matrix<double>>* layer_outs) {
  return forward_impl(
      w, inputs,
      [](const LayerSpec& layer, const Matrix<double>& a) {
        const Matrix<std::uint8_t> q = quantize_activations(a, layer.act_scale);
        Matrix<std::int64_t> y(q.rows(), layer.weights.rows());
        for (std::int64_t r = 0; r < q.rows(); ++r) {
          for (std::int64_t o = 0; o < layer.weights.rows(); ++o) {
            std::int64_t acc = 0;
            for (std::int64_t k = 0; k < q.cols(); ++k) {
              acc += static_cast<std::int64_t>(q(r, k)) *
                     static_cast<std::int64_t>(layer.weights(o, k));
            }
            y(r, o) = acc;
          }
        }
        return rescale(y, layer.act_scale * layer.w_scale);
      },
      layer_outs);
}

Matrix<double> macro_forward(const Workload& w, const Matrix<double>& inputs,
                             const MacroEngine& engine,
                             ConversionCounters* counters, PmacHistogram* hist,
                             std::vector<Matrix<double>>* layer_outs) {
  return forward_impl(
      w, inputs,
      [&](const LayerSpec& layer, const Matrix<double>& a) {
        const Matrix<std::uint8_t> q = quantize_activations(a, layer.act_scale);
        const Matrix<std::int64_t> y =
            engine.matmul(q, transposed_weights(layer), counters, hist);
        return rescale(y, layer.act_scale * layer.w_scale);
      },
      layer_outs);
}

double accuracy_from_outputs(const Matrix<double>& outputs,
                             std::span<const int> labels) {
  if (outputs.rows() != static_cast<std::int64_t>(labels.size()) ||
      outputs.rows() == 0) {
    throw std::invalid_argument("one label per output row required");
  }
  std::int64_t correct = 0;
  for (std::int64_t r = 0; r < outputs.rows(); ++r) {
    std::int64_t best = 0;
    for (std::int64_t c = 1; c < outputs.cols(); ++c) {
      if (outputs(r, c) > outputs(r, best)) {
        best = c;
      }
    }
    if (best == labels[static_cast<std::size_t>(r)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(outputs.rows());
}

ErrorMetrics error_metrics(const Matrix<double>& reference,
                           const Matrix<double>& actual) {
  if (reference.rows() != actual.rows() || reference.cols() != actual.cols() ||
      reference.size() == 0) {
    throw std::invalid_argument("error metrics need matching non-empty shapes");
  }
  double signal = 0.0;
  double noise = 0.0;
  double max_abs = 0.0;
  std::int64_t matches = 0;
  for (std::int64_t i = 0; i < reference.size(); ++i) {
    const double r = reference.data()[i];
    const double d = r - actual.data()[i];
    signal += r * r;
    noise += d * d;
    max_abs = std::max(max_abs, std::abs(d));
    if (r == actual.data()[i]) {
      ++matches;
    }
  }
  ErrorMetrics m;
  m.mse = noise / static_cast<double>(reference.size());
  m.max_abs = max_abs;
  m.exact_match =
      static_cast<double>(matches) / static_cast<double>(reference.size());
  if (noise == 0.0) {
    m.sqnr_db = 300.0;
  } else if (signal == 0.0) {
    m.sqnr_db = -300.0;
  } else {
    m.sqnr_db = std::clamp(10.0 * std::log10(signal / noise), -300.0, 300.0);
  }
  return m;
}

MacroConfig apply_design_point(const MacroConfig& base, const DesignPoint& p) {
  MacroConfig cfg = base;
  cfg.activated_rows = p.rows;
  cfg.adc.bits = p.adc_bits;
  cfg.adc.cutoff = p.cutoff;
  // Rejects unsupported rows and out-of-range cutoffs before anything runs.
  const int threshold = cutoff_threshold(p.cutoff, p.rows);
  cfg.adc.ref_mode = (p.adc_bits == 4 && threshold == 128)
                         ? ReferenceMode::InSram
                         : ReferenceMode::Ideal;
  cfg.adc.scheme =
      p.adc_bits == 4 ? AdcScheme::CoarseFine : AdcScheme::FullFlash;
  cfg.noise.enabled = p.hw_errors;
  cfg.seed = p.seed;
  cfg.validate();
  return cfg;
}

EvalResult evaluate_point(const DesignPoint& p, const Workload& w,
                          const MacroConfig& base, bool collect_hist) {
  const MacroConfig cfg = apply_design_point(base, p);
  const MacroEngine engine(cfg);

  std::vector<Matrix<double>> float_outs;
  std::vector<Matrix<double>> macro_outs;
  const Matrix<double> float_logits =
      float_forward(w, w.eval_inputs, &float_outs);
  const Matrix<double> quant_logits = quantized_forward(w, w.eval_inputs);
  ConversionCounters counters;
  EvalResult r;
  const Matrix<double> macro_logits =
      macro_forward(w, w.eval_inputs, engine, &counters,
                    collect_hist ? &r.hist : nullptr, &macro_outs);

  r.point = p;
  r.threshold = cfg.threshold();
  r.accuracy = accuracy_from_outputs(macro_logits, w.eval_labels);
  r.float_baseline_acc = accuracy_from_outputs(float_logits, w.eval_labels);
  r.quant_baseline_acc = accuracy_from_outputs(quant_logits, w.eval_labels);
  r.acc_drop_pp = (r.float_baseline_acc - r.accuracy) * 100.0;
  r.efficiency_tops_w = efficiency_tops_per_watt(cfg.vdd);
  r.conversions = counters.conversions;
  r.adc_energy_proxy = counters.comparator_evals;
  r.dac_energy_proxy = counters.mac_cycles * cfg.activated_rows * 4;
  r.layer_metrics.reserve(w.layers.size());
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    r.layer_metrics.push_back(error_metrics(float_outs[i], macro_outs[i]));
  }
  r.hist_collected = collect_hist;
  return r;
}

std::vector<EvalResult> run_sweep(const SweepGrid& grid, const Workload& w,
                                  const MacroConfig& base, bool collect_hist) {
  validate_workload(w);
  if (grid.rows_values.empty() || grid.bits_values.empty() ||
      grid.cutoff_values.empty() || grid.hw_errors_values.empty() ||
      grid.seeds.empty()) {
    throw ConfigError("every sweep grid dimension needs at least one value");
  }
  const auto each_point = [&](auto&& fn) {
    for (int rows : grid.rows_values) {
      for (int bits : grid.bits_values) {
        for (double cutoff : grid.cutoff_values) {
          for (int hw : grid.hw_errors_values) {
            for (std::uint64_t seed : grid.seeds) {
              fn(DesignPoint{rows, bits, cutoff, hw != 0, seed});
            }
          }
        }
      }
    }
  };
  // Refuse the whole sweep before evaluating anything if any point is
  // unbuildable, so a failed run never leaves a partial result set.
  each_point([&](const DesignPoint& p) {
    try {
      apply_design_point(base, p);
    } catch (const ConfigError& e) {
      throw ConfigError("sweep point rows=" + std::to_string(p.rows) +
                        " adc_bits=" + std::to_string(p.adc_bits) +
                        " cutoff=" + format_sig(p.cutoff) + ": " + e.what());
    }
  });
  std::vector<EvalResult> results;
  each_point([&](const DesignPoint& p) {
    results.push_back(evaluate_point(p, w, base, collect_hist));
  });
  return results;
}

void write_sweep_csv(const std::filesystem::path& path,
                     std::span<const EvalResult> results, int layer_count) {
  std::string out =
      "rows,adc_bits,cutoff,hw_errors,seed,threshold,accuracy,"
      "float_baseline_acc,quant_baseline_acc,acc_drop_pp,efficiency_tops_w,"
      "adc_energy_proxy,dac_energy_proxy,conversions";
  for (int i = 0; i < layer_count; ++i) {
    const std::string tag = "l" + std::to_string(i);
    out += ',' + tag + "_mse," + tag + "_max_abs," + tag + "_sqnr_db";
  }
  out.push_back('\n');
  for (const EvalResult& r : results) {
    if (static_cast<int>(r.layer_metrics.size()) != layer_count) {
      throw std::invalid_argument("layer_count does not match the results");
    }
    out += std::to_string(r.point.rows);
    out += ',' + std::to_string(r.point.adc_bits);
    out += ',' + format_sig(r.point.cutoff);
    out += ',' + std::to_string(r.point.hw_errors ? 1 : 0);
    out += ',' + std::to_string(r.point.seed);
    out += ',' + std::to_string(r.threshold);
    out += ',' + format_sig(r.accuracy);
    out += ',' + format_sig(r.float_baseline_acc);
    out += ',' + format_sig(r.quant_baseline_acc);
    out += ',' + format_sig(r.acc_drop_pp);
    out += ',' + format_sig(r.efficiency_tops_w);
    out += ',' + std::to_string(r.adc_energy_proxy);
    out += ',' + std::to_string(r.dac_energy_proxy);
    out += ',' + std::to_string(r.conversions);
    for (const ErrorMetrics& m : r.layer_metrics) {
      out += ',' + format_sig(m.mse);
      out += ',' + format_sig(m.max_abs);
      out += ',' + format_sig(m.sqnr_db);
    }
    out.push_back('\n');
  }
  write_text_file(path, out);
}

void write_pmac_hist_csv(const std::filesystem::path& path,
                         std::span<const EvalResult> results) {
  std::string out = "rows,adc_bits,cutoff,hw_errors,seed,pmac,count\n";
  for (const EvalResult& r : results) {
    if (!r.hist_collected) {
      throw std::invalid_argument(
          "histogram output requested for a sweep run without collection");
    }
    for (int p = 0; p < kPmacLevels; ++p) {
      const std::int64_t count = r.hist.counts[static_cast<std::size_t>(p)];
      if (count == 0) {
        continue;
      }
      out += std::to_string(r.point.rows);
      out += ',' + std::to_string(r.point.adc_bits);
      out += ',' + format_sig(r.point.cutoff);
      out += ',' + std::to_string(r.point.hw_errors ? 1 : 0);
      out += ',' + std::to_string(r.point.seed);
      out += ',' + std::to_string(p);
      out += ',' + std::to_string(count);
      out.push_back('\n');
    }
  }
  write_text_file(path, out);
}

Workload load_workload(const std::filesystem::path& dir) {
  const std::filesystem::path manifest = dir / "manifest.json";
  json j;
  try {
    j = json::parse(read_text_file(manifest));
  } catch (const json::exception& e) {
    throw IoError(manifest.string() + ": " + e.what());
  }
  Workload w;
  try {
    w.name = j.at("name").get<std::string>();
    for (const json& jl : j.at("layers")) {
      LayerSpec layer;
      const auto kind = jl.at("kind").get<std::string>();
      if (kind == "dense") {
        layer.kind = LayerKind::Dense;
        layer.in_features = jl.at("in_features").get<int>();
        layer.out_features = jl.at("out_features").get<int>();
      } else if (kind == "conv2d") {
        layer.kind = LayerKind::Conv2d;
        layer.in_channels = jl.at("in_channels").get<int>();
        layer.out_channels = jl.at("out_channels").get<int>();
        layer.kernel = jl.at("kernel").get<int>();
        layer.in_height = jl.at("in_height").get<int>();
        layer.in_width = jl.at("in_width").get<int>();
      } else {
        throw IoError(manifest.string() + ": unknown layer kind '" + kind + "'");
      }
      layer.relu = jl.at("relu").get<bool>();
      layer.w_scale = jl.at("w_scale").get<double>();
      layer.act_scale = jl.at("act_scale").get<double>();
      layer.weights =
          read_csv_matrix<std::int8_t>(dir / jl.at("weights").get<std::string>());
      w.layers.push_back(std::move(layer));
    }
    w.eval_inputs =
        read_csv_matrix<double>(dir / j.at("eval_inputs").get<std::string>());
    const Matrix<std::int32_t> labels =
        read_csv_matrix<std::int32_t>(dir / j.at("eval_labels").get<std::string>());
    if (labels.cols() != 1) {
      throw IoError("eval labels must be a single column");
    }
    for (std::int64_t r = 0; r < labels.rows(); ++r) {
      w.eval_labels.push_back(labels(r, 0));
    }
  } catch (const json::exception& e) {
    throw IoError(manifest.string() + ": " + e.what());
  }
  validate_workload(w);
  return w;
}

void save_workload(const std::filesystem::path& dir, const Workload& w) {
  validate_workload(w);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError("cannot create directory " + dir.string());
  }
  json j;
  j["name"] = w.name;
  j["eval_inputs"] = "eval_x.csv";
  j["eval_labels"] = "eval_y.csv";
  j["layers"] = json::array();
  for (std::size_t i = 0; i < w.layers.size(); ++i) {
    const LayerSpec& layer = w.layers[i];
    const std::string wfile = "w" + std::to_string(i) + ".csv";
    json jl;
    if (layer.kind == LayerKind::Dense) {
      jl["kind"] = "dense";
      jl["in_features"] = layer.in_features;
      jl["out_features"] = layer.out_features;
    } else {
      jl["kind"] = "conv2d";
      jl["in_channels"] = layer.in_channels;
      jl["out_channels"] = layer.out_channels;
      jl["kernel"] = layer.kernel;
      jl["in_height"] = layer.in_height;
      jl["in_width"] = layer.in_width;
    }
    jl["relu"] = layer.relu;
    jl["w_scale"] = layer.w_scale;
    jl["act_scale"] = layer.act_scale;
    jl["weights"] = wfile;
    j["layers"].push_back(jl);
    write_csv_matrix(dir / wfile, layer.weights);
  }
  write_csv_matrix(dir / "eval_x.csv", w.eval_inputs);
  Matrix<std::int32_t> labels(static_cast<std::int64_t>(w.eval_labels.size()), 1);
  for (std::size_t i = 0; i < w.eval_labels.size(); ++i) {
    labels(static_cast<std::int64_t>(i), 0) = w.eval_labels[i];
  }
  write_csv_matrix(dir / "eval_y.csv", labels);
  write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

Workload make_small_fc_workload(const SmallFcParams& params) {
  if (params.classes < 2 || params.features < 1 || params.hidden < params.classes ||
      params.eval_per_class < 1 || !(params.jitter >= 0.0)) {
    throw std::invalid_argument("bad synthetic workload parameters");
  }
  const CounterRng root(params.seed);
  const CounterRng proto_rng = root.derive(1);
  const CounterRng weight_rng = root.derive(2);
  const CounterRng sample_rng = root.derive(3);

  // Class prototypes in [0, 1]^features.
  Matrix<double> prototypes(params.classes, params.features);
  for (int c = 0; c < params.classes; ++c) {
    for (int f = 0; f < params.features; ++f) {
      prototypes(c, f) =
          proto_rng.derive(static_cast<std::uint64_t>(c)).uniform(
              static_cast<std::uint64_t>(f));
    }
  }

  // Hidden layer: each unit is a centered template of one class, lightly
  // perturbed so units keyed to the same class are not identical.
  Matrix<double> w1(params.hidden, params.features);
  for (int h = 0; h < params.hidden; ++h) {
    const CounterRng unit = weight_rng.derive(static_cast<std::uint64_t>(h));
    for (int f = 0; f < params.features; ++f) {
      w1(h, f) = prototypes(h % params.classes, f) - 0.5 +
                 0.05 * unit.gaussian(static_cast<std::uint64_t>(f));
    }
  }
  // Output layer votes for the matching class and mildly against the rest.
  Matrix<double> w2(params.classes, params.hidden);
  for (int c = 0; c < params.classes; ++c) {
    for (int h = 0; h < params.hidden; ++h) {
      w2(c, h) = h % params.classes == c ? 1.0 : -0.1;
    }
  }

  const auto quantize_weights = [](const Matrix<double>& wf, LayerSpec& layer) {
    double max_abs = 0.0;
    for (std::int64_t i = 0; i < wf.size(); ++i) {
      max_abs = std::max(max_abs, std::abs(wf.data()[i]));
    }
    layer.w_scale = max_abs > 0.0 ? max_abs / 127.0 : 1.0;
    layer.weights = Matrix<std::int8_t>(wf.rows(), wf.cols());
    for (std::int64_t i = 0; i < wf.size(); ++i) {
      const double q = std::nearbyint(wf.data()[i] / layer.w_scale);
      layer.weights.data()[i] =
          static_cast<std::int8_t>(std::clamp(q, -127.0, 127.0));
    }
  };

  Workload w;
  w.name = "small-fc";
  LayerSpec l0;
  l0.kind = LayerKind::Dense;
  l0.in_features = params.features;
  l0.out_features = params.hidden;
  l0.relu = true;
  l0.act_scale = 1.0 / 15.0;  // inputs live in [0, 1]
  quantize_weights(w1, l0);
  LayerSpec l1;
  l1.kind = LayerKind::Dense;
  l1.in_features = params.hidden;
  l1.out_features = params.classes;
  l1.relu = false;
  quantize_weights(w2, l1);

  // Eval set: jittered prototypes, clipped to [0, 1] and rounded to 4
  // decimals so the CSV round trip is the identity.
  const std::int64_t samples =
      static_cast<std::int64_t>(params.classes) * params.eval_per_class;
  w.eval_inputs = Matrix<double>(samples, params.features);
  for (int c = 0; c < params.classes; ++c) {
    const CounterRng class_rng = sample_rng.derive(static_cast<std::uint64_t>(c));
    for (int i = 0; i < params.eval_per_class; ++i) {
      const CounterRng draw = class_rng.derive(static_cast<std::uint64_t>(i));
      const std::int64_t row =
          static_cast<std::int64_t>(c) * params.eval_per_class + i;
      for (int f = 0; f < params.features; ++f) {
        const double v =
            prototypes(c, f) +
            params.jitter * draw.gaussian(static_cast<std::uint64_t>(f));
        w.eval_inputs(row, f) =
            std::nearbyint(std::clamp(v, 0.0, 1.0) * 1e4) / 1e4;
      }
      w.eval_labels.push_back(c);
    }
  }

  // Calibrate the hidden activation scale on the float pass.
  w.layers.push_back(l0);
  const Matrix<double> wd = dequantized_weights(l0);
  double max_hidden = 0.0;
  for (std::int64_t r = 0; r < w.eval_inputs.rows(); ++r) {
    for (int h = 0; h < params.hidden; ++h) {
      double acc = 0.0;
      for (int f = 0; f < params.features; ++f) {
        acc += w.eval_inputs(r, f) * wd(h, f);
      }
      max_hidden = std::max(max_hidden, acc);
    }
  }
  l1.act_scale = max_hidden > 0.0 ? max_hidden / 15.0 : 1.0;
  w.layers.push_back(l1);

  validate_workload(w);
  return w;
}

}  // namespace cimforge
