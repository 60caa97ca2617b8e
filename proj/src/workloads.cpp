#include "axmem/workloads.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "axmem/errors.hpp"
#include "axmem/rng.hpp"

namespace axmem {

namespace {

// Pixel/word sources: the golden path reads plain memory, the approximate
// path routes every load through the hierarchy.
struct PlainSource {
  const uint8_t* data;
  uint8_t load_u8(uint64_t i) { return data[i]; }
  uint32_t load_u32(uint64_t i) {
    uint32_t v;
    std::memcpy(&v, data + i, 4);
    return v;
  }
};

struct HierarchySource {
  Hierarchy* h;
  uint64_t base;
  uint8_t load_u8(uint64_t i) { return static_cast<uint8_t>(h->read(base + i, 1)); }
  uint32_t load_u32(uint64_t i) { return static_cast<uint32_t>(h->read(base + i, 4)); }
};

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// 5x5 binomial-ish smoothing kernel, sum 159.
constexpr int kGauss[5][5] = {{2, 4, 5, 4, 2},
                              {4, 9, 12, 9, 4},
                              {5, 12, 15, 12, 5},
                              {4, 9, 12, 9, 4},
                              {2, 4, 5, 4, 2}};

template <class Src>
void gaussian_blur(Src src, int w, int h, std::vector<int>& out, bool parallel) {
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int acc = 0;
      for (int ky = -2; ky <= 2; ++ky) {
        int yy = clampi(y + ky, 0, h - 1);
        for (int kx = -2; kx <= 2; ++kx) {
          int xx = clampi(x + kx, 0, w - 1);
          acc += kGauss[ky + 2][kx + 2] *
                 src.load_u8(static_cast<uint64_t>(yy) * w + static_cast<uint64_t>(xx));
        }
      }
      out[static_cast<size_t>(y) * w + x] = acc / 159;
    }
  }
}

void sobel_magnitude(const std::vector<int>& img, int w, int h, std::vector<int>& mag,
                     std::vector<int>& gx_out, std::vector<int>& gy_out, bool parallel) {
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t i = static_cast<size_t>(y) * w + x;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
        mag[i] = 0;
        gx_out[i] = 0;
        gy_out[i] = 0;
        continue;
      }
      auto px = [&](int xx, int yy) { return img[static_cast<size_t>(yy) * w + xx]; };
      int gx = -px(x - 1, y - 1) + px(x + 1, y - 1) - 2 * px(x - 1, y) + 2 * px(x + 1, y) -
               px(x - 1, y + 1) + px(x + 1, y + 1);
      int gy = px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1) - px(x - 1, y + 1) -
               2 * px(x, y + 1) - px(x + 1, y + 1);
      mag[i] = std::abs(gx) + std::abs(gy);
      gx_out[i] = gx;
      gy_out[i] = gy;
    }
  }
}

// Quantized gradient direction via integer tangent comparisons
// (tan 22.5 deg ~ 4142/10000, tan 67.5 deg ~ 24142/10000).
void non_maximum_suppression(const std::vector<int>& mag, const std::vector<int>& gx,
                             const std::vector<int>& gy, int w, int h, std::vector<int>& thin,
                             bool parallel) {
#pragma omp parallel for schedule(static) if (parallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      size_t i = static_cast<size_t>(y) * w + x;
      if (x == 0 || y == 0 || x == w - 1 || y == h - 1 || mag[i] == 0) {
        thin[i] = 0;
        continue;
      }
      long ax = std::abs(gx[i]);
      long ay = std::abs(gy[i]);
      int dx, dy;
      if (ay * 10000 <= ax * 4142) {
        dx = 1;
        dy = 0;
      } else if (ay * 10000 >= ax * 24142) {
        dx = 0;
        dy = 1;
      } else if ((gx[i] > 0) == (gy[i] > 0)) {
        dx = 1;
        dy = 1;
      } else {
        dx = 1;
        dy = -1;
      }
      int m = mag[i];
      int m1 = mag[static_cast<size_t>(y + dy) * w + (x + dx)];
      int m2 = mag[static_cast<size_t>(y - dy) * w + (x - dx)];
      thin[i] = (m > m1 && m >= m2) ? m : 0;
    }
  }
}

// Strong seeds grow into connected weak pixels (8-neighborhood). Serial in
// both paths; the scan-order worklist keeps it deterministic.
void hysteresis(const std::vector<int>& thin, int w, int h, const CannyParams& p, Frame& out) {
  std::vector<uint8_t> state(thin.size(), 0); // 0 none, 1 weak, 2 strong
  std::vector<int> worklist;
  for (size_t i = 0; i < thin.size(); ++i) {
    if (thin[i] >= p.high_threshold) {
      state[i] = 2;
      worklist.push_back(static_cast<int>(i));
    } else if (thin[i] >= p.low_threshold) {
      state[i] = 1;
    }
  }
  while (!worklist.empty()) {
    int i = worklist.back();
    worklist.pop_back();
    int x = i % w;
    int y = i / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        int xx = x + dx;
        int yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        size_t j = static_cast<size_t>(yy) * w + xx;
        if (state[j] == 1) {
          state[j] = 2;
          worklist.push_back(static_cast<int>(j));
        }
      }
    }
  }
  for (size_t i = 0; i < thin.size(); ++i) out.pixels[i] = state[i] == 2 ? 255 : 0;
}

template <class Src>
Frame canny_impl(Src src, int w, int h, const CannyParams& params, bool parallel) {
  std::vector<int> blurred(static_cast<size_t>(w) * h);
  std::vector<int> mag(blurred.size()), gx(blurred.size()), gy(blurred.size()),
      thin(blurred.size());
  gaussian_blur(src, w, h, blurred, parallel);
  sobel_magnitude(blurred, w, h, mag, gx, gy, parallel);
  non_maximum_suppression(mag, gx, gy, w, h, thin, parallel);
  Frame out = Frame::make(w, h, 1);
  hysteresis(thin, w, h, params, out);
  return out;
}

template <class Src>
Frame kmeans_impl(Src src, int w, int h, const KmeansParams& params, bool parallel) {
  const int n = w * h;
  const int k = params.clusters;
  if (k < 1) throw DomainError("kmeans needs at least one cluster");
  if (k > n) throw DomainError("more clusters than pixels");

  // Fixed seeded sampling of distinct pixel indices for the initial centroids.
  InjectorRng rng(params.init_seed);
  std::vector<int> seeds;
  seeds.reserve(static_cast<size_t>(k));
  for (int j = 0; j < k; ++j) {
    int idx = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
    for (int tries = 0; std::find(seeds.begin(), seeds.end(), idx) != seeds.end(); ++tries) {
      idx = tries < 64 ? static_cast<int>(rng.next_below(static_cast<uint64_t>(n)))
                       : (idx + 1) % n;
    }
    seeds.push_back(idx);
  }

  std::vector<double> centroid(static_cast<size_t>(k) * 3);
  for (int j = 0; j < k; ++j)
    for (int c = 0; c < 3; ++c)
      centroid[static_cast<size_t>(j) * 3 + c] =
          src.load_u8(static_cast<uint64_t>(seeds[static_cast<size_t>(j)]) * 3 + c);

  std::vector<int> assignment(static_cast<size_t>(n), -1);
  std::vector<uint8_t> scratch(static_cast<size_t>(n) * 3); // values read this iteration
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    bool changed = false;
    // Each pixel is loaded once per iteration; the loaded values feed both
    // the distance computation and the centroid sums.
#pragma omp parallel for schedule(static) if (parallel) reduction(|| : changed)
    for (int i = 0; i < n; ++i) {
      uint8_t p0 = src.load_u8(static_cast<uint64_t>(i) * 3 + 0);
      uint8_t p1 = src.load_u8(static_cast<uint64_t>(i) * 3 + 1);
      uint8_t p2 = src.load_u8(static_cast<uint64_t>(i) * 3 + 2);
      scratch[static_cast<size_t>(i) * 3 + 0] = p0;
      scratch[static_cast<size_t>(i) * 3 + 1] = p1;
      scratch[static_cast<size_t>(i) * 3 + 2] = p2;
      int best = 0;
      double best_d = 0;
      for (int j = 0; j < k; ++j) {
        double d0 = p0 - centroid[static_cast<size_t>(j) * 3 + 0];
        double d1 = p1 - centroid[static_cast<size_t>(j) * 3 + 1];
        double d2 = p2 - centroid[static_cast<size_t>(j) * 3 + 2];
        double d = d0 * d0 + d1 * d1 + d2 * d2;
        if (j == 0 || d < best_d) { // ties keep the lowest cluster index
          best_d = d;
          best = j;
        }
      }
      if (assignment[static_cast<size_t>(i)] != best) {
        assignment[static_cast<size_t>(i)] = best;
        changed = true;
      }
    }
    // Integer accumulation is order-free; a serial pass keeps it simple.
    std::vector<uint64_t> sums(static_cast<size_t>(k) * 3, 0);
    std::vector<uint64_t> counts(static_cast<size_t>(k), 0);
    for (int i = 0; i < n; ++i) {
      int j = assignment[static_cast<size_t>(i)];
      sums[static_cast<size_t>(j) * 3 + 0] += scratch[static_cast<size_t>(i) * 3 + 0];
      sums[static_cast<size_t>(j) * 3 + 1] += scratch[static_cast<size_t>(i) * 3 + 1];
      sums[static_cast<size_t>(j) * 3 + 2] += scratch[static_cast<size_t>(i) * 3 + 2];
      ++counts[static_cast<size_t>(j)];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[static_cast<size_t>(j)] == 0) continue; // empty cluster keeps its centroid
      for (int c = 0; c < 3; ++c)
        centroid[static_cast<size_t>(j) * 3 + c] =
            static_cast<double>(sums[static_cast<size_t>(j) * 3 + c]) /
            static_cast<double>(counts[static_cast<size_t>(j)]);
    }
    if (!changed) break;
  }

  Frame out = Frame::make(w, h, 3);
  for (int i = 0; i < n; ++i) {
    int j = assignment[static_cast<size_t>(i)];
    for (int c = 0; c < 3; ++c) {
      double v = std::round(centroid[static_cast<size_t>(j) * 3 + c]);
      out.pixels[static_cast<size_t>(i) * 3 + c] = static_cast<uint8_t>(clampi(
          static_cast<int>(v), 0, 255));
    }
  }
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

Frame Frame::make(int width, int height, int channels, uint8_t fill) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw DomainError("bad frame shape");
  Frame f;
  f.width = width;
  f.height = height;
  f.channels = channels;
  f.pixels.assign(static_cast<size_t>(width) * height * channels, fill);
  return f;
}

uint8_t& Frame::at(int x, int y, int c) {
  return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
}

uint8_t Frame::at(int x, int y, int c) const {
  return pixels[(static_cast<size_t>(y) * width + x) * channels + c];
}

Frame read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open image: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw ConfigError("unsupported image format: " + path);
  auto next_token = [&in, &path]() {
    std::string tok;
    while (in >> tok) {
      if (tok[0] == '#') {
        std::string rest;
        std::getline(in, rest);
        continue;
      }
      return tok;
    }
    throw ConfigError("truncated image header: " + path);
  };
  int w = std::stoi(next_token());
  int h = std::stoi(next_token());
  int maxval = std::stoi(next_token());
  if (maxval != 255) throw ConfigError("only 8-bit images supported: " + path);
  in.get(); // single whitespace after header
  Frame f = Frame::make(w, h, magic == "P5" ? 1 : 3);
  in.read(reinterpret_cast<char*>(f.pixels.data()), static_cast<std::streamsize>(f.pixels.size()));
  if (!in) throw ConfigError("truncated image data: " + path);
  return f;
}

void write_pnm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write image: " + path);
  out << (frame.channels == 1 ? "P5" : "P6") << '\n'
      << frame.width << ' ' << frame.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.pixels.size()));
}

Frame canny_edges(const Frame& gray, const CannyParams& params) {
  if (gray.channels != 1) throw DomainError("canny expects a grayscale frame");
  return canny_impl(PlainSource{gray.pixels.data()}, gray.width, gray.height, params, true);
}

Frame canny_edges_serial(const Frame& gray, const CannyParams& params) {
  if (gray.channels != 1) throw DomainError("canny expects a grayscale frame");
  return canny_impl(PlainSource{gray.pixels.data()}, gray.width, gray.height, params, false);
}

Frame run_canny(Hierarchy& h, const Frame& gray, uint64_t buffer_addr, const CannyParams& params) {
  if (gray.channels != 1) throw DomainError("canny expects a grayscale frame");
  if (buffer_addr < h.region().start || buffer_addr + gray.size() > h.region().end)
    throw ConfigError("canny buffer does not fit in the approximate region");
  h.dma_write(buffer_addr, gray.pixels);
  return canny_impl(HierarchySource{&h, buffer_addr}, gray.width, gray.height, params, false);
}

Frame kmeans_recolor(const Frame& rgb, const KmeansParams& params) {
  if (rgb.channels != 3) throw DomainError("kmeans expects an rgb frame");
  return kmeans_impl(PlainSource{rgb.pixels.data()}, rgb.width, rgb.height, params, true);
}

Frame kmeans_recolor_serial(const Frame& rgb, const KmeansParams& params) {
  if (rgb.channels != 3) throw DomainError("kmeans expects an rgb frame");
  return kmeans_impl(PlainSource{rgb.pixels.data()}, rgb.width, rgb.height, params, false);
}

Frame run_kmeans(Hierarchy& h, const Frame& rgb, uint64_t buffer_addr, const KmeansParams& params) {
  if (rgb.channels != 3) throw DomainError("kmeans expects an rgb frame");
  if (buffer_addr < h.region().start || buffer_addr + rgb.size() > h.region().end)
    throw ConfigError("kmeans buffer does not fit in the approximate region");
  h.dma_write(buffer_addr, rgb.pixels);
  return kmeans_impl(HierarchySource{&h, buffer_addr}, rgb.width, rgb.height, params, false);
}

double blackscholes_price(double spot, double strike, double rate, double volatility,
                          double maturity, bool is_put) {
  if (!std::isfinite(spot) || !std::isfinite(strike) || !std::isfinite(rate) ||
      !std::isfinite(volatility) || !std::isfinite(maturity) || spot <= 0.0 || strike <= 0.0 ||
      volatility < 0.0 || maturity < 0.0)
    return std::numeric_limits<double>::quiet_NaN();

  double discounted_strike = strike * std::exp(-rate * maturity);
  double sigma_sqrt_t = volatility * std::sqrt(maturity);
  if (sigma_sqrt_t < 1e-12) {
    // Deterministic limit: discounted intrinsic value.
    double call = std::max(spot - discounted_strike, 0.0);
    return is_put ? std::max(discounted_strike - spot, 0.0) : call;
  }
  double d1 = (std::log(spot / strike) + (rate + 0.5 * volatility * volatility) * maturity) /
              sigma_sqrt_t;
  double d2 = d1 - sigma_sqrt_t;
  if (is_put) return discounted_strike * normal_cdf(-d2) - spot * normal_cdf(-d1);
  return spot * normal_cdf(d1) - discounted_strike * normal_cdf(d2);
}

namespace {

std::vector<float> blackscholes_impl(const OptionBatch& batch, bool parallel) {
  std::vector<float> prices(batch.entries.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (size_t i = 0; i < batch.entries.size(); ++i) {
    const OptionRecord& e = batch.entries[i];
    prices[i] = static_cast<float>(
        blackscholes_price(e.spot, e.strike, e.rate, e.volatility, e.maturity, e.is_put != 0));
  }
  return prices;
}

} // namespace

std::vector<float> blackscholes_prices(const OptionBatch& batch) {
  return blackscholes_impl(batch, true);
}

std::vector<float> blackscholes_prices_serial(const OptionBatch& batch) {
  return blackscholes_impl(batch, false);
}

std::vector<float> run_blackscholes(Hierarchy& h, const OptionBatch& batch, uint64_t buffer_addr,
                                    uint64_t result_addr) {
  const uint64_t param_bytes = batch.entries.size() * sizeof(OptionRecord);
  const uint64_t result_bytes = batch.entries.size() * 4;
  auto fits = [&](uint64_t addr, uint64_t size) {
    return addr >= h.region().start && addr + size <= h.region().end;
  };
  if (!fits(buffer_addr, param_bytes) || !fits(result_addr, result_bytes))
    throw ConfigError("option batch does not fit in the approximate region");

  static_assert(sizeof(OptionRecord) == 24);
  std::vector<uint8_t> raw(param_bytes);
  std::memcpy(raw.data(), batch.entries.data(), param_bytes);
  h.dma_write(buffer_addr, raw);

  HierarchySource src{&h, buffer_addr};
  for (size_t i = 0; i < batch.entries.size(); ++i) {
    uint64_t off = i * sizeof(OptionRecord);
    auto f32 = [&](uint64_t o) { return std::bit_cast<float>(src.load_u32(off + o)); };
    float spot = f32(0), strike = f32(4), rate = f32(8), vol = f32(12), mat = f32(16);
    uint32_t is_put = src.load_u32(off + 20);
    float price = static_cast<float>(
        blackscholes_price(spot, strike, rate, vol, mat, is_put != 0));
    h.write(result_addr + i * 4, std::bit_cast<uint32_t>(price), 4);
  }

  // The quality monitor reads the result buffer back through the hierarchy.
  std::vector<float> out(batch.entries.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = std::bit_cast<float>(static_cast<uint32_t>(h.read(result_addr + i * 4, 4)));
  return out;
}

uint64_t frame_bytes(const Frame& f) { return f.size(); }

uint64_t batch_bytes(const OptionBatch& b) {
  return b.entries.size() * sizeof(OptionRecord) + b.entries.size() * 4;
}

QosReading rmse(const Frame& golden, const Frame& approx) {
  if (golden.width != approx.width || golden.height != approx.height ||
      golden.channels != approx.channels)
    throw DomainError("rmse: frame shapes differ");
  double acc = 0.0;
  for (size_t i = 0; i < golden.pixels.size(); ++i) {
    double d = static_cast<double>(golden.pixels[i]) - static_cast<double>(approx.pixels[i]);
    acc += d * d;
  }
  return QosReading{std::sqrt(acc / static_cast<double>(golden.pixels.size())), QosMetric::Rmse};
}

QosReading avg_rel_error(std::span<const float> golden, std::span<const float> approx) {
  if (golden.size() != approx.size()) throw DomainError("avg_rel_error: lengths differ");
  if (golden.empty()) throw DomainError("avg_rel_error: empty input");
  double acc = 0.0;
  for (size_t i = 0; i < golden.size(); ++i) {
    double g = golden[i];
    double a = approx[i];
    double err;
    if (!std::isfinite(g) || !std::isfinite(a)) {
      err = 1.0;
    } else if (g == 0.0) {
      err = a == 0.0 ? 0.0 : 1.0;
    } else {
      err = std::min(std::abs(g - a) / std::abs(g), 1.0);
    }
    acc += err;
  }
  return QosReading{100.0 * acc / static_cast<double>(golden.size()), QosMetric::AvgRelErrorPct};
}

} // namespace axmem
