// Times the OpenMP workload kernels against their serial references.
#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "axmem/scene.hpp"
#include "axmem/workloads.hpp"

using namespace axmem;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn(); // warm up
  auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
  std::printf("%-14s serial %8.3f ms   parallel %8.3f ms   speedup %.2fx\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif
  const int reps = 10;

  SceneSequence gray({SceneSegment{}}, 42, 352, 288, 1);
  Frame g = gray.frame_at(0);
  report("canny", time_ms([&] { (void)canny_edges_serial(g); }, reps),
         time_ms([&] { (void)canny_edges(g); }, reps));

  SceneSequence rgb({SceneSegment{}}, 43, 426, 240, 3);
  Frame c = rgb.frame_at(0);
  report("kmeans", time_ms([&] { (void)kmeans_recolor_serial(c); }, reps),
         time_ms([&] { (void)kmeans_recolor(c); }, reps));

  OptionBatch batch = rgb.batch_at(0, 65536);
  report("blackscholes", time_ms([&] { (void)blackscholes_prices_serial(batch); }, reps),
         time_ms([&] { (void)blackscholes_prices(batch); }, reps));
  return 0;
}
