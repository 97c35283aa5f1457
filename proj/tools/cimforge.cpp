// cimforge: command-line front end for the charge-domain compute-in-memory
// macro simulator. Every subcommand computes its full result before writing
// anything, so a failing run never leaves a partial output file behind.

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cimforge/adc.hpp"
#include "cimforge/amu.hpp"
#include "cimforge/charge.hpp"
#include "cimforge/config.hpp"
#include "cimforge/costmodel.hpp"
#include "cimforge/errors.hpp"
#include "cimforge/macro.hpp"
#include "cimforge/mapper.hpp"
#include "cimforge/noise.hpp"
#include "cimforge/tensor.hpp"

namespace cf = cimforge;

namespace {

// Options shared by every subcommand. Flags beat the config file, the config
// file beats the CIM_FORGE_SEED environment variable, which beats defaults.
struct CommonOpts {
  std::string config_path;
  double vdd = 0.0;
  int rows = 0;
  double cap_ratio = 0.0;
  int adc_bits = 0;
  double cutoff = 0.0;
  std::string ref_mode;
  std::string scheme;
  bool noise_on = false;
  bool noise_off = false;
  bool serial = false;
  std::uint64_t seed = 0;

  CLI::Option* o_vdd = nullptr;
  CLI::Option* o_rows = nullptr;
  CLI::Option* o_cap = nullptr;
  CLI::Option* o_bits = nullptr;
  CLI::Option* o_cutoff = nullptr;
  CLI::Option* o_ref = nullptr;
  CLI::Option* o_scheme = nullptr;
  CLI::Option* o_seed = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON configuration file");
  o.o_vdd = cmd->add_option("--vdd", o.vdd,
                            "Supply voltage in volts, 0.6-1.2 (default 1.0)");
  o.o_rows = cmd->add_option(
      "--rows", o.rows, "Activated rows per cycle: 4, 8, or 16 (default 16)");
  o.o_cap = cmd->add_option(
      "--cap-ratio", o.cap_ratio,
      "Accumulation-line capacitance over one CBL (default 1.0)");
  o.o_bits = cmd->add_option("--adc-bits", o.adc_bits,
                             "ADC output bits (default 4)");
  o.o_cutoff = cmd->add_option(
      "--cutoff", o.cutoff,
      "Top fraction of the count range the ADC gives up (default 0.5)");
  o.o_ref = cmd->add_option(
      "--ref-mode", o.ref_mode,
      "Reference source: in_sram | ideal (default in_sram)");
  o.o_scheme = cmd->add_option(
      "--scheme", o.scheme,
      "Comparator scheme: coarse_fine | full_flash (default coarse_fine)");
  cmd->add_flag("--noise", o.noise_on,
                "Enable variation injection (default off)");
  cmd->add_flag("--no-noise", o.noise_off, "Disable variation injection");
  cmd->add_flag("--serial", o.serial, "Force the serial execution policy");
  o.o_seed = cmd->add_option("--seed", o.seed, "Root RNG seed (default 1234)");
}

// Primary output file: the --out flag wins, then the config's "out" key.
std::string resolve_out(const CommonOpts& o, const std::string& flag_value) {
  if (!flag_value.empty()) {
    return flag_value;
  }
  if (!o.config_path.empty()) {
    const std::string from_config =
        cf::parse_config_out(cf::read_text_file(o.config_path));
    if (!from_config.empty()) {
      return from_config;
    }
  }
  throw cf::ConfigError(
      "no output path: pass --out or set \"out\" in the config file");
}

cf::MacroConfig build_config(const CommonOpts& o) {
  cf::MacroConfig base;
  if (const char* env = std::getenv("CIM_FORGE_SEED")) {
    const std::string text(env);
    std::uint64_t value = 0;
    const auto [ptr, ec] =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
      throw cf::ConfigError("CIM_FORGE_SEED must be an unsigned integer");
    }
    base.seed = value;
  }
  cf::MacroConfig cfg = o.config_path.empty()
                            ? base
                            : cf::load_macro_config(o.config_path, base);
  if (o.o_vdd->count() > 0) {
    cfg.vdd = o.vdd;
  }
  if (o.o_rows->count() > 0) {
    cfg.activated_rows = o.rows;
  }
  if (o.o_cap->count() > 0) {
    cfg.cap_ratio = o.cap_ratio;
  }
  if (o.o_bits->count() > 0) {
    cfg.adc.bits = o.adc_bits;
  }
  if (o.o_cutoff->count() > 0) {
    cfg.adc.cutoff = o.cutoff;
  }
  if (o.o_ref->count() > 0) {
    cfg.adc.ref_mode = cf::parse_ref_mode(o.ref_mode);
  }
  if (o.o_scheme->count() > 0) {
    cfg.adc.scheme = cf::parse_scheme(o.scheme);
  }
  if (o.noise_on && o.noise_off) {
    throw cf::ConfigError("--noise and --no-noise are mutually exclusive");
  }
  if (o.noise_on) {
    cfg.noise.enabled = true;
  }
  if (o.noise_off) {
    cfg.noise.enabled = false;
  }
  if (o.serial) {
    cfg.execution = cf::ExecPolicy::Serial;
  }
  if (o.o_seed->count() > 0) {
    cfg.seed = o.seed;
  }
  cfg.validate();
  return cfg;
}

void do_dac_transfer(const CommonOpts& o, const std::string& out_flag,
                     std::int64_t mc_samples) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  const cf::SupplyVoltage vdd = cfg.supply();
  std::string csv =
      mc_samples > 0 ? "code,v_dac,mc_mean_V,mc_std_mV\n" : "code,v_dac\n";
  for (int x = 0; x <= 15; ++x) {
    const cf::Voltage v = cf::dac_convert(cf::InputActivation{x}, vdd);
    csv += std::to_string(x) + ',' + cf::format_sig(v.volts);
    if (mc_samples > 0) {
      // The spread study is the whole point of --mc, so the sigma table is
      // applied even when the run config leaves macro noise off.
      cf::NoiseModel probe = cfg.noise;
      probe.enabled = true;
      const cf::MonteCarloResult r = cf::run_montecarlo_dac(
          vdd, cf::InputActivation{x}, mc_samples, probe, cfg.seed,
          cfg.execution);
      csv += ',' + cf::format_sig(r.mean_volts) + ',' + cf::format_sig(r.std_mv);
    }
    csv.push_back('\n');
  }
  cf::write_text_file(out, csv);
}

void do_adc_transfer(const CommonOpts& o, const std::string& out_flag) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  std::string csv = "pmac,v_abl,code,dequantized\n";
  for (const cf::AdcTransferPoint& p : cf::adc_transfer(cfg)) {
    csv += std::to_string(p.pmac) + ',' + cf::format_sig(p.v_abl) + ',' +
           std::to_string(p.code) + ',' + std::to_string(p.dequantized) + '\n';
  }
  cf::write_text_file(out, csv);
}

void do_refgen(const CommonOpts& o, const std::string& out_flag) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  const cf::SupplyVoltage vdd = cfg.supply();
  std::string csv = "n_ones,v_ref\n";
  for (int n = 0; n <= 15; ++n) {
    const cf::Voltage v =
        cf::ref_column_voltage(cf::RefPattern{n}, cfg.cap_ratio, vdd);
    csv += std::to_string(n) + ',' + cf::format_sig(v.volts) + '\n';
  }
  cf::write_text_file(out, csv);
}

void do_mac(const CommonOpts& o, const std::string& x_path,
            const std::string& w_path, const std::string& out_flag) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  const auto x = cf::read_matrix_auto<std::uint8_t>(x_path);
  const auto w = cf::read_matrix_auto<std::int8_t>(w_path);
  if (x.rows() != 1) {
    throw cf::ConfigError("mac expects a single activation row");
  }
  if (x.cols() > cfg.activated_rows) {
    throw cf::ConfigError("mac handles at most activated_rows inputs per cycle");
  }
  if (w.cols() > cf::kTileOutputs) {
    throw cf::ConfigError("mac drives at most 8 outputs per cycle");
  }
  const cf::MacroEngine engine(cfg);
  const auto y = engine.matmul(x, w);
  cf::write_matrix_auto(out, y);
}

void do_matmul(const CommonOpts& o, const std::string& x_path,
               const std::string& w_path, const std::string& out_flag,
               const std::string& metrics_out) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  const auto x = cf::read_matrix_auto<std::uint8_t>(x_path);
  const auto w = cf::read_matrix_auto<std::int8_t>(w_path);
  const cf::MacroEngine engine(cfg);
  const auto y = engine.matmul(x, w);

  // Error report against the exact integer product.
  cf::Matrix<double> exact(y.rows(), y.cols());
  for (std::int64_t r = 0; r < x.rows(); ++r) {
    for (std::int64_t c = 0; c < w.cols(); ++c) {
      std::int64_t acc = 0;
      for (std::int64_t k = 0; k < x.cols(); ++k) {
        acc += static_cast<std::int64_t>(x(r, k)) *
               static_cast<std::int64_t>(w(k, c));
      }
      exact(r, c) = static_cast<double>(acc);
    }
  }
  cf::Matrix<double> approx(y.rows(), y.cols());
  for (std::int64_t i = 0; i < y.size(); ++i) {
    approx.data()[i] = static_cast<double>(y.data()[i]);
  }
  const cf::ErrorMetrics m = cf::error_metrics(exact, approx);
  nlohmann::json j;
  j["mse"] = m.mse;
  j["max_abs"] = m.max_abs;
  j["sqnr_db"] = m.sqnr_db;
  j["exact_match"] = m.exact_match;
  const std::string text = j.dump(2) + "\n";

  cf::write_matrix_auto(out, y);
  if (!metrics_out.empty()) {
    cf::write_text_file(metrics_out, text);
  }
  std::cout << text;
}

void do_montecarlo(const CommonOpts& o, const std::string& out_flag,
                   std::int64_t samples, int code, bool code_set) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  const cf::SupplyVoltage vdd = cfg.supply();
  std::string csv = "vdd,code,n,mean_V,std_mV\n";
  const int lo = code_set ? code : 0;
  const int hi = code_set ? code : 15;
  cf::NoiseModel probe = cfg.noise;
  probe.enabled = true;
  for (int x = lo; x <= hi; ++x) {
    const cf::MonteCarloResult r = cf::run_montecarlo_dac(
        vdd, cf::InputActivation{x}, samples, probe, cfg.seed, cfg.execution);
    csv += cf::format_sig(cfg.vdd) + ',' + std::to_string(x) + ',' +
           std::to_string(r.samples) + ',' + cf::format_sig(r.mean_volts) +
           ',' + cf::format_sig(r.std_mv) + '\n';
  }
  cf::write_text_file(out, csv);
}

void do_energy(const CommonOpts& o, const std::string& out_flag) {
  const cf::MacroConfig cfg = build_config(o);
  std::string out = out_flag;
  if (out.empty() && !o.config_path.empty()) {
    out = cf::parse_config_out(cf::read_text_file(o.config_path));
  }
  const cf::CostReport r = cf::cost_report(cfg);
  const cf::AdcEnergyComparison c = cf::adc_energy_comparison();
  nlohmann::json j;
  j["vdd"] = r.vdd;
  j["rows"] = r.rows;
  j["efficiency_tops_w"] = r.efficiency_tops_w;
  j["clock_mhz"] = r.clock_mhz;
  j["frequency_hz"] = r.frequency_hz;
  j["mac_cycle_ns"] = r.mac_cycle_ns;
  j["throughput_gops_per_2kb"] = r.throughput_gops_per_2kb;
  j["ops_per_cycle"] = r.ops_per_cycle;
  j["energy_per_cycle_j"] = r.energy_per_cycle_j;
  j["adc_delay_fraction"] = r.adc_delay_fraction;
  j["amu_energy_fraction"] = r.amu_energy_fraction;
  j["periphery_adc_energy_fraction"] = r.periphery_adc_energy_fraction;
  j["adc_energy_units"] = r.adc_energy_units;
  j["comparators_per_conversion"] = r.comparators_per_conversion;
  j["area_mm2"] = r.area_mm2;
  j["adc_comparison"] = {
      {"full_flash_comparators", c.full_flash_comparators},
      {"coarse_fine_comparators", c.coarse_fine_comparators},
      {"full_flash_units", c.full_flash_units},
      {"coarse_fine_units", c.coarse_fine_units},
      {"saving_fraction", c.saving_fraction},
      {"comparator_only_saving", c.comparator_only_saving}};
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    cf::write_text_file(out, text);
  }
}

void do_sweep(const CommonOpts& o, const std::string& workload_dir,
              const std::string& out_flag, const std::string& hist_out,
              cf::SweepGrid grid, bool seeds_set) {
  const cf::MacroConfig cfg = build_config(o);
  const std::string out = resolve_out(o, out_flag);
  const cf::Workload w = cf::load_workload(workload_dir);
  if (!seeds_set) {
    grid.seeds = {cfg.seed};
  }
  const bool collect_hist = !hist_out.empty();
  const auto results = cf::run_sweep(grid, w, cfg, collect_hist);
  cf::write_sweep_csv(out, results, static_cast<int>(w.layers.size()));
  if (collect_hist) {
    cf::write_pmac_hist_csv(hist_out, results);
  }
}

void do_gen_workload(const cf::SmallFcParams& params, const std::string& out) {
  cf::save_workload(out, cf::make_small_fc_workload(params));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Charge-domain SRAM compute-in-memory macro simulator"};
  app.require_subcommand(1);

  // dac-transfer
  CommonOpts dac_o;
  std::string dac_out;
  std::int64_t dac_mc = 0;
  auto* dac_cmd = app.add_subcommand(
      "dac-transfer", "In-memory DAC transfer curve over codes 0..15");
  add_common(dac_cmd, dac_o);
  dac_cmd->add_option("--out", dac_out, "Output CSV (or config key \"out\")");
  dac_cmd->add_option("--mc", dac_mc,
                      "Also run a per-code Monte-Carlo with this many samples");

  // adc-transfer
  CommonOpts adc_o;
  std::string adc_out;
  auto* adc_cmd = app.add_subcommand(
      "adc-transfer", "ADC staircase over the partial-MAC range");
  add_common(adc_cmd, adc_o);
  adc_cmd->add_option("--out", adc_out, "Output CSV (or config key \"out\")");

  // refgen
  CommonOpts ref_o;
  std::string ref_out;
  auto* ref_cmd = app.add_subcommand(
      "refgen", "Reference-column voltages for stored-ones counts 0..15");
  add_common(ref_cmd, ref_o);
  ref_cmd->add_option("--out", ref_out, "Output CSV (or config key \"out\")");

  // mac
  CommonOpts mac_o;
  std::string mac_x, mac_w, mac_out;
  auto* mac_cmd =
      app.add_subcommand("mac", "Single analog MAC cycle on one stored tile");
  add_common(mac_cmd, mac_o);
  mac_cmd->add_option("--x", mac_x, "Activation row (1 x K, codes 0..15)")
      ->required();
  mac_cmd->add_option("--w", mac_w, "Weight matrix (K x N, signed 8-bit)")
      ->required();
  mac_cmd->add_option("--out", mac_out,
                      "Output matrix, csv or binary (or config key \"out\")");

  // matmul
  CommonOpts mm_o;
  std::string mm_x, mm_w, mm_out, mm_metrics;
  auto* mm_cmd = app.add_subcommand(
      "matmul", "Tiled matrix multiply through the macro");
  add_common(mm_cmd, mm_o);
  mm_cmd->add_option("--x", mm_x, "Activation matrix (M x K, codes 0..15)")
      ->required();
  mm_cmd->add_option("--w", mm_w, "Weight matrix (K x N, signed 8-bit)")
      ->required();
  mm_cmd->add_option("--out", mm_out,
                     "Output matrix, csv or binary (or config key \"out\")");
  mm_cmd->add_option("--metrics", mm_metrics,
                     "Also write the error report (vs the exact integer "
                     "product) to this JSON file");

  // montecarlo
  CommonOpts mc_o;
  std::string mc_out;
  std::int64_t mc_samples = 10000;
  int mc_code = 8;
  auto* mc_cmd = app.add_subcommand(
      "montecarlo", "Monte-Carlo spread of the DAC level under variation");
  add_common(mc_cmd, mc_o);
  mc_cmd->add_option("--out", mc_out, "Output CSV (or config key \"out\")");
  mc_cmd->add_option("--samples", mc_samples, "Samples per code")
      ->capture_default_str();
  auto* mc_code_opt =
      mc_cmd->add_option("--code", mc_code, "Restrict to one DAC code");

  // energy
  CommonOpts en_o;
  std::string en_out;
  auto* en_cmd = app.add_subcommand(
      "energy", "Calibrated efficiency/latency/energy report as JSON");
  add_common(en_cmd, en_o);
  en_cmd->add_option("--out", en_out, "Output file (default: stdout)");

  // sweep
  CommonOpts sw_o;
  std::string sw_workload, sw_out, sw_hist;
  cf::SweepGrid sw_grid;
  auto* sw_cmd = app.add_subcommand(
      "sweep", "Design-space sweep over a quantized workload");
  add_common(sw_cmd, sw_o);
  sw_cmd->add_option("--workload", sw_workload, "Workload directory")->required();
  sw_cmd->add_option("--out", sw_out,
                     "Sweep results CSV (or config key \"out\")");
  sw_cmd->add_option("--hist", sw_hist,
                     "Also write the partial-MAC histogram CSV here");
  sw_cmd->add_option("--rows-list", sw_grid.rows_values, "Activated-rows values")
      ->delimiter(',');
  sw_cmd->add_option("--bits-list", sw_grid.bits_values, "ADC bit widths")
      ->delimiter(',');
  sw_cmd->add_option("--cutoff-list", sw_grid.cutoff_values, "Cutoff fractions")
      ->delimiter(',');
  sw_cmd->add_option("--hw-list", sw_grid.hw_errors_values,
                     "Variation injection on/off values (0 or 1)")
      ->delimiter(',');
  auto* sw_seeds_opt =
      sw_cmd->add_option("--seeds", sw_grid.seeds, "Seed repeats")
          ->delimiter(',');

  // gen-workload
  cf::SmallFcParams gw_params;
  std::string gw_out;
  auto* gw_cmd = app.add_subcommand(
      "gen-workload", "Generate the bundled synthetic classification workload");
  gw_cmd->add_option("--out", gw_out, "Workload directory to create")->required();
  gw_cmd->add_option("--classes", gw_params.classes, "Number of classes")
      ->capture_default_str();
  gw_cmd->add_option("--features", gw_params.features, "Input features")
      ->capture_default_str();
  gw_cmd->add_option("--hidden", gw_params.hidden, "Hidden units")
      ->capture_default_str();
  gw_cmd->add_option("--eval-per-class", gw_params.eval_per_class,
                     "Evaluation samples per class")
      ->capture_default_str();
  gw_cmd->add_option("--jitter", gw_params.jitter,
                     "Gaussian jitter around the class prototypes")
      ->capture_default_str();
  gw_cmd->add_option("--gen-seed", gw_params.seed, "Generator seed")
      ->capture_default_str();

  dac_cmd->callback([&] { do_dac_transfer(dac_o, dac_out, dac_mc); });
  adc_cmd->callback([&] { do_adc_transfer(adc_o, adc_out); });
  ref_cmd->callback([&] { do_refgen(ref_o, ref_out); });
  mac_cmd->callback([&] { do_mac(mac_o, mac_x, mac_w, mac_out); });
  mm_cmd->callback([&] { do_matmul(mm_o, mm_x, mm_w, mm_out, mm_metrics); });
  mc_cmd->callback([&] {
    do_montecarlo(mc_o, mc_out, mc_samples, mc_code, mc_code_opt->count() > 0);
  });
  en_cmd->callback([&] { do_energy(en_o, en_out); });
  sw_cmd->callback([&] {
    do_sweep(sw_o, sw_workload, sw_out, sw_hist, sw_grid,
             sw_seeds_opt->count() > 0);
  });
  gw_cmd->callback([&] { do_gen_workload(gw_params, gw_out); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const cf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const cf::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
