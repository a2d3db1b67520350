// Serial vs OpenMP study loop, and sort-based vs pairwise placements.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "aucmi/config.hpp"
#include "aucmi/roc_core.hpp"
#include "aucmi/study_runner.hpp"

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bench_placements(std::size_t n) {
  aucmi::RandomStream rng(7, {n});
  std::vector<double> x(n), y(n);
  for (auto& v : x) v = rng.normal();
  for (auto& v : y) v = rng.normal() + 1.0;
  const aucmi::roc::GroupedScores g(x, y);
  volatile double sink = 0.0;
  const int reps = n <= 200 ? 2000 : n <= 2000 ? 20 : 2;
  const double fast = seconds([&] {
    for (int r = 0; r < reps; ++r) sink = sink + aucmi::roc::placements(g).theta;
  });
  const double ref = seconds([&] {
    for (int r = 0; r < reps; ++r) sink = sink + aucmi::roc::placements_reference(g).theta;
  });
  std::printf("placements n=%-6zu sorted %9.3f us  pairwise %9.3f us  ratio %.1fx\n", n,
              1e6 * fast / reps, 1e6 * ref / reps, ref / fast);
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t replicates = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 20;
  const int threads = argc > 2 ? std::atoi(argv[2]) : omp_get_max_threads();

  for (std::size_t n : {50, 200, 2000, 20000}) bench_placements(n);

  aucmi::config::RunConfig c;
  c.thetas = {0.9};
  c.alpha0 = {0.0};
  c.missingness = {{0.95, 0.9, 0.95, 0.7}};
  c.sample_sizes = {200};
  c.calibration_size = 100000;
  c.replicates = replicates;
  const auto grid = aucmi::config::build_scenarios(c);
  auto opt = aucmi::config::study_options(c);

  std::size_t serial_rows = 0, parallel_rows = 0;
  const double serial = seconds([&] { serial_rows = aucmi::study::run_study_serial(grid, opt).size(); });
  opt.threads = threads;
  const double parallel = seconds([&] { parallel_rows = aucmi::study::run_study(grid, opt).size(); });
  std::printf("study %zu replicates (n=200, all arms): serial %.2f s, %d threads %.2f s, speedup %.2fx\n",
              replicates, serial, threads, parallel, serial / parallel);
  return serial_rows == parallel_rows ? 0 : 1;
}
