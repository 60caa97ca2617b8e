#include "axmem/scene.hpp"

#include <algorithm>

#include "axmem/errors.hpp"
#include "axmem/rng.hpp"

namespace axmem {

namespace {

uint64_t mix(uint64_t a, uint64_t b) { return InjectorRng::splitmix64(a ^ (b * 0x9e3779b97f4a7c15ULL)); }

// Uniform integer in [-amp, amp] from a hash.
int jitter(uint64_t h, int amp) {
  if (amp <= 0) return 0;
  return static_cast<int>(h % static_cast<uint64_t>(2 * amp + 1)) - amp;
}

uint8_t clamp_u8(int v) { return static_cast<uint8_t>(std::clamp(v, 0, 255)); }

} // namespace

SceneSequence::SceneSequence(std::vector<SceneSegment> segments, uint64_t seed, int width,
                             int height, int channels)
    : segments_(std::move(segments)), seed_(seed), width_(width), height_(height),
      channels_(channels) {
  if (segments_.empty()) throw ConfigError("scene sequence needs at least one segment");
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw ConfigError("bad scene frame shape");
  for (const auto& s : segments_) {
    if (s.frames <= 0) throw ConfigError("scene segment length must be positive");
    total_frames_ += s.frames;
  }
}

const SceneSegment& SceneSequence::locate(int t, int* local_t, int* seg_index) const {
  if (t < 0) throw DomainError("frame index must be non-negative");
  int cycle = t / total_frames_;
  int rem = t % total_frames_;
  for (size_t i = 0; i < segments_.size(); ++i) {
    if (rem < segments_[i].frames) {
      // Cycles continue the drift rather than restarting it.
      *local_t = rem + cycle * segments_[i].frames;
      *seg_index = static_cast<int>(i);
      return segments_[i];
    }
    rem -= segments_[i].frames;
  }
  throw DomainError("unreachable: segment lookup");
}

int SceneSequence::segment_index(int t) const {
  int local, idx;
  locate(t, &local, &idx);
  return idx;
}

Frame SceneSequence::frame_at(int t) const {
  int local_t = 0, seg_idx = 0;
  const SceneSegment& seg = locate(t, &local_t, &seg_idx);
  uint64_t scene_key = mix(seed_, mix(seg.style, static_cast<uint64_t>(seg_idx) + 101));

  Frame f = Frame::make(width_, height_, channels_);
  int cell = std::max(1, seg.texture_cell);

  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      uint64_t block_key =
          mix(scene_key, (static_cast<uint64_t>(y / cell) << 24) ^ static_cast<uint64_t>(x / cell));
      for (int c = 0; c < channels_; ++c) {
        int v = seg.base_level + jitter(mix(block_key, static_cast<uint64_t>(c) + 7), seg.texture_amp);
        f.at(x, y, c) = clamp_u8(v);
      }
    }
  }

  // Moving solid shapes; geometry hashed per (scene, shape), drifting with t.
  for (int s = 0; s < seg.shapes; ++s) {
    uint64_t shape_key = mix(scene_key, 0x5113f0 + static_cast<uint64_t>(s));
    int sw = 8 + static_cast<int>(mix(shape_key, 1) % static_cast<uint64_t>(std::max(8, width_ / 3)));
    int sh = 8 + static_cast<int>(mix(shape_key, 2) % static_cast<uint64_t>(std::max(8, height_ / 3)));
    int drift = seg.shape_speed * local_t;
    int dir = (mix(shape_key, 3) & 1) ? 1 : -1;
    int x0 = static_cast<int>((mix(shape_key, 4) % static_cast<uint64_t>(width_)) +
                              static_cast<uint64_t>(std::abs(dir * drift))) %
             width_;
    if (dir < 0) x0 = width_ - 1 - x0;
    int y0 = static_cast<int>(mix(shape_key, 5) % static_cast<uint64_t>(height_));
    bool disk = (mix(shape_key, 6) & 1) != 0;

    uint8_t color[3];
    for (int c = 0; c < 3; ++c) {
      int bright = (mix(shape_key, 8 + static_cast<uint64_t>(c)) & 1) != 0;
      color[c] = bright ? clamp_u8(190 + jitter(mix(shape_key, 16 + static_cast<uint64_t>(c)), 40))
                        : clamp_u8(40 + jitter(mix(shape_key, 32 + static_cast<uint64_t>(c)), 30));
    }

    int rx = sw / 2, ry = sh / 2;
    for (int dy = -ry; dy <= ry; ++dy) {
      int y = y0 + dy;
      if (y < 0 || y >= height_) continue;
      for (int dx = -rx; dx <= rx; ++dx) {
        int x = x0 + dx;
        if (x < 0 || x >= width_) continue;
        if (disk && dx * dx * ry * ry + dy * dy * rx * rx > rx * rx * ry * ry) continue;
        for (int c = 0; c < channels_; ++c) f.at(x, y, c) = color[c % 3];
      }
    }
  }

  if (seg.noise_amp > 0) {
    uint64_t frame_key = mix(scene_key, 0xa01beULL + static_cast<uint64_t>(t));
    for (int y = 0; y < height_; ++y) {
      for (int x = 0; x < width_; ++x) {
        uint64_t px_key = mix(frame_key, (static_cast<uint64_t>(y) << 20) ^ static_cast<uint64_t>(x));
        for (int c = 0; c < channels_; ++c) {
          int v = f.at(x, y, c) + jitter(mix(px_key, static_cast<uint64_t>(c)), seg.noise_amp);
          f.at(x, y, c) = clamp_u8(v);
        }
      }
    }
  }
  return f;
}

OptionBatch SceneSequence::batch_at(int t, int entries) const {
  if (entries <= 0) throw ConfigError("option batch needs a positive entry count");
  int local_t = 0, seg_idx = 0;
  const SceneSegment& seg = locate(t, &local_t, &seg_idx);
  uint64_t scene_key = mix(seed_, mix(seg.style, static_cast<uint64_t>(seg_idx) + 977));
  uint64_t frame_key = mix(scene_key, static_cast<uint64_t>(t) + 13);

  // The segment's "base level" shifts the spot/volatility ranges so scene
  // changes alter pricing statistics.
  double spot_center = 40.0 + static_cast<double>(seg.base_level);
  double vol_center = 0.15 + 0.002 * static_cast<double>(seg.texture_amp);

  OptionBatch batch;
  batch.entries.resize(static_cast<size_t>(entries));
  for (int i = 0; i < entries; ++i) {
    InjectorRng rng(mix(frame_key, static_cast<uint64_t>(i)));
    OptionRecord& e = batch.entries[static_cast<size_t>(i)];
    e.spot = static_cast<float>(spot_center * (0.5 + rng.next_unit()));
    e.strike = static_cast<float>(e.spot * (0.8 + 0.4 * rng.next_unit()));
    e.rate = static_cast<float>(0.01 + 0.09 * rng.next_unit());
    e.volatility = static_cast<float>(vol_center * (0.5 + rng.next_unit()));
    e.maturity = static_cast<float>(0.25 + 2.75 * rng.next_unit());
    e.is_put = (rng.next_u64() & 1) ? 1u : 0u;
  }
  return batch;
}

} // namespace axmem
