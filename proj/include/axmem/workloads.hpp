#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "axmem/memory_sim.hpp"

namespace axmem {

/// 8-bit image, grayscale (channels = 1) or RGB (channels = 3).
struct Frame {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<uint8_t> pixels; // row-major, interleaved channels

  static Frame make(int width, int height, int channels, uint8_t fill = 0);
  size_t size() const { return pixels.size(); }
  uint8_t& at(int x, int y, int c = 0);
  uint8_t at(int x, int y, int c = 0) const;

  friend bool operator==(const Frame&, const Frame&) = default;
};

/// Portable graymap/pixmap (binary P5/P6) i/o for inspection and external
/// input sequences.
Frame read_pnm(const std::string& path);
void write_pnm(const Frame& frame, const std::string& path);

/// One option-pricing parameter record; stored in approximate memory as six
/// 32-bit words.
struct OptionRecord {
  float spot = 0.0f;
  float strike = 0.0f;
  float rate = 0.0f;
  float volatility = 0.0f;
  float maturity = 0.0f;
  uint32_t is_put = 0;
};

struct OptionBatch {
  std::vector<OptionRecord> entries;
};

enum class QosMetric { Rmse, AvgRelErrorPct, BitFlips };

struct QosReading {
  double value = 0.0;
  QosMetric metric = QosMetric::Rmse;
};

struct CannyParams {
  int high_threshold = 200; // on the |gx|+|gy| magnitude scale
  int low_threshold = 100;
};

struct KmeansParams {
  int clusters = 6;
  int max_iterations = 20;
  uint64_t init_seed = 1;
};

// ---- golden (hierarchy-free) kernels ----
// The parallel versions are the defaults used by the harness; the serial
// references exist for testing and benchmarking and must produce identical
// bytes.

Frame canny_edges(const Frame& gray, const CannyParams& params = {});
Frame canny_edges_serial(const Frame& gray, const CannyParams& params = {});

Frame kmeans_recolor(const Frame& rgb, const KmeansParams& params = {});
Frame kmeans_recolor_serial(const Frame& rgb, const KmeansParams& params = {});

std::vector<float> blackscholes_prices(const OptionBatch& batch);
std::vector<float> blackscholes_prices_serial(const OptionBatch& batch);

double blackscholes_price(double spot, double strike, double rate, double volatility,
                          double maturity, bool is_put);

// ---- approximate-buffer runs ----
// The input buffer is ingested into the approximate region at `buffer_addr`
// and every pixel/parameter load goes through the hierarchy.

Frame run_canny(Hierarchy& h, const Frame& gray, uint64_t buffer_addr,
                const CannyParams& params = {});

Frame run_kmeans(Hierarchy& h, const Frame& rgb, uint64_t buffer_addr,
                 const KmeansParams& params = {});

/// Prices are written to, then read back from, approximate memory at
/// `result_addr`.
std::vector<float> run_blackscholes(Hierarchy& h, const OptionBatch& batch, uint64_t buffer_addr,
                                    uint64_t result_addr);

/// Bytes a workload buffer occupies (for region-fit validation).
uint64_t frame_bytes(const Frame& f);
uint64_t batch_bytes(const OptionBatch& b);

// ---- quality monitors ----

/// Root of the mean squared per-sample difference. Frames must match in shape.
QosReading rmse(const Frame& golden, const Frame& approx);

/// Mean per-entry relative error |g - a| / |g|, saturated at 1 (and at 1 for
/// a non-zero result against a zero golden value, or any non-finite value),
/// expressed in percent.
QosReading avg_rel_error(std::span<const float> golden, std::span<const float> approx);

} // namespace axmem
