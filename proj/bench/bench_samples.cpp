// Times the serial and OpenMP sample maps on the sphere integration-by-parts
// kernel and checks that both produce the same samples.
//
//   bench_samples [paths=4000] [steps=256] [workers=omp_get_max_threads()]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "ljw/harness.hpp"
#include "ljw/parallel.hpp"
#include "ljw/scenarios.hpp"

using namespace ljw;

namespace {

template <class Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t paths = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 4000;
  const int steps = argc > 2 ? std::atoi(argv[2]) : 256;
  const int workers = argc > 3 ? std::atoi(argv[3]) : omp_get_max_threads();

  const Scenario& s = find_scenario("sphere2-gradient");
  McConfig cfg;
  cfg.grid = TimeGrid{1.0, steps};
  cfg.paths = paths;
  const CameronMartinPath k = CameronMartinPath::linear(cfg.grid, s.k_direction);
  const CylindricalFunctional& f = s.functionals.front();
  auto kernel = [&](std::size_t i) { return eq4_sample(*s.system, s.start, f, k, cfg, i); };

  std::vector<SamplePair> serial, parallel;
  const double ts = time_ms([&] { serial = map_samples_serial<SamplePair>(paths, kernel); });
  const double tp = time_ms([&] { parallel = map_samples_parallel<SamplePair>(paths, workers, kernel); });

  bool same = serial.size() == parallel.size();
  for (std::size_t i = 0; same && i < serial.size(); ++i) {
    same = serial[i].lhs == parallel[i].lhs && serial[i].rhs == parallel[i].rhs;
  }
  std::printf("paths %zu  steps %d  workers %d\n", paths, steps, workers);
  std::printf("serial    %10.1f ms  (%.3f ms/path)\n", ts, ts / paths);
  std::printf("parallel  %10.1f ms  (%.3f ms/path)\n", tp, tp / paths);
  std::printf("speedup   %10.2f\n", ts / tp);
  std::printf("samples identical: %s\n", same ? "yes" : "no");
  return same ? 0 : 1;
}
