// Timing harness for the two hot kernels, serial vs the OpenMP policy.
// Not registered with ctest; run it by hand. Exits non-zero if the two
// policies ever disagree, since bit-identical results across schedules is a
// core contract of the engine.

#include <chrono>
#include <cstdint>
#include <cstdio>

#include "cimforge/macro.hpp"
#include "cimforge/mapper.hpp"
#include "cimforge/noise.hpp"
#include "cimforge/parallel.hpp"

namespace cf = cimforge;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

cf::Matrix<std::uint8_t> random_activations(std::int64_t m, std::int64_t k,
                                            std::uint64_t seed) {
  const cf::CounterRng rng(seed);
  cf::Matrix<std::uint8_t> x(m, k);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    x.data()[i] = static_cast<std::uint8_t>(
        rng.word(static_cast<std::uint64_t>(i)) % 16u);
  }
  return x;
}

cf::Matrix<std::int8_t> random_weights(std::int64_t k, std::int64_t n,
                                       std::uint64_t seed) {
  const cf::CounterRng rng(seed);
  cf::Matrix<std::int8_t> w(k, n);
  for (std::int64_t i = 0; i < w.size(); ++i) {
    w.data()[i] = static_cast<std::int8_t>(
        static_cast<int>(rng.word(static_cast<std::uint64_t>(i)) % 255u) - 127);
  }
  return w;
}

}  // namespace

int main() {
  int failures = 0;

  {
    cf::MacroConfig cfg;
    cfg.noise.enabled = true;
    const auto x = random_activations(256, 256, 11);
    const auto w = random_weights(256, 64, 22);

    cfg.execution = cf::ExecPolicy::Serial;
    const cf::MacroEngine serial(cfg);
    auto t0 = std::chrono::steady_clock::now();
    const auto y_serial = serial.matmul(x, w);
    const double t_serial = seconds_since(t0);

    cfg.execution = cf::ExecPolicy::Parallel;
    const cf::MacroEngine parallel(cfg);
    t0 = std::chrono::steady_clock::now();
    const auto y_parallel = parallel.matmul(x, w);
    const double t_parallel = seconds_since(t0);

    const bool equal = y_serial == y_parallel;
    std::printf("matmul 256x256x64 (noise on): serial %.3fs, parallel %.3fs "
                "(%.2fx), workers %d, results %s\n",
                t_serial, t_parallel, t_serial / t_parallel,
                cf::worker_count(cf::ExecPolicy::Parallel),
                equal ? "identical" : "DIFFER");
    failures += equal ? 0 : 1;
  }

  {
    const cf::SupplyVoltage vdd{0.6};
    const cf::InputActivation code{8};
    cf::NoiseModel model;
    model.enabled = true;
    constexpr std::int64_t kSamples = 4'000'000;

    auto t0 = std::chrono::steady_clock::now();
    const auto serial = cf::run_montecarlo_dac(vdd, code, kSamples, model, 99,
                                               cf::ExecPolicy::Serial);
    const double t_serial = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const auto parallel = cf::run_montecarlo_dac(vdd, code, kSamples, model, 99,
                                                 cf::ExecPolicy::Parallel);
    const double t_parallel = seconds_since(t0);

    const bool equal = serial.mean_volts == parallel.mean_volts &&
                       serial.std_mv == parallel.std_mv;
    std::printf("montecarlo 4M draws: serial %.3fs, parallel %.3fs (%.2fx), "
                "statistics %s\n",
                t_serial, t_parallel, t_serial / t_parallel,
                equal ? "identical" : "DIFFER");
    failures += equal ? 0 : 1;
  }

  return failures == 0 ? 0 : 1;
}
