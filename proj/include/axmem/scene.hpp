#pragma once

#include <cstdint>
#include <vector>

#include "axmem/workloads.hpp"

namespace axmem {

/// One stretch of procedurally generated inputs with fixed statistics.
/// Frames within a segment differ only by shape drift and per-frame noise;
/// segment boundaries are the scene changes.
struct SceneSegment {
  int frames = 1;
  int base_level = 96;    // background mean
  int texture_amp = 24;   // blocky background texture amplitude
  int texture_cell = 8;   // texture block size in pixels
  int shapes = 4;         // moving rectangles/disks per frame
  int shape_speed = 1;    // drift in pixels per frame
  int noise_amp = 4;      // per-pixel uniform noise amplitude
  uint64_t style = 0;     // extra generator salt (scene identity)
};

/// Deterministic input-sequence generator: frame_at / batch_at are pure
/// functions of (seed, segments, index), so replays and golden reruns see
/// identical bytes. Sequences cycle if read past their total length.
class SceneSequence {
public:
  SceneSequence(std::vector<SceneSegment> segments, uint64_t seed, int width, int height,
                int channels);

  int total_frames() const { return total_frames_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  /// Segment index covering frame t (cycling).
  int segment_index(int t) const;

  Frame frame_at(int t) const;

  /// Option-pricing batch for frame t; entry parameter ranges shift per
  /// segment.
  OptionBatch batch_at(int t, int entries) const;

private:
  std::vector<SceneSegment> segments_;
  uint64_t seed_;
  int width_;
  int height_;
  int channels_;
  int total_frames_ = 0;

  const SceneSegment& locate(int t, int* local_t, int* seg_index) const;
};

} // namespace axmem
