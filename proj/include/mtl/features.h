// mtl/features.h

// Copyright 2026 The mtlspeech Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTL_FEATURES_H_
#define MTL_FEATURES_H_

#include <cstddef>
#include <filesystem>
#include <vector>

#include "mtl/tensor.h"

namespace mtl {

// Front end: 25 ms Hann windows every 10 ms at 16 kHz, 512-point power
// spectrum, 40 triangular mel filters over 0-8000 Hz, natural log floored at
// 1e-10. Seven frames (t-3..t+3, edges replicated) are stacked and every
// third stacked frame is kept, giving 280-dim vectors at 100/3 fps.
inline constexpr int kSampleRateHz = 16000;
inline constexpr std::size_t kWindowSamples = 400;
inline constexpr std::size_t kHopSamples = 160;
inline constexpr std::size_t kFftSize = 512;
inline constexpr std::size_t kNumMelBands = 40;
inline constexpr double kMelLowHz = 0.0;
inline constexpr double kMelHighHz = 8000.0;
inline constexpr double kEnergyFloor = 1e-10;
inline constexpr std::size_t kSpliceContext = 3;
inline constexpr std::size_t kSubsampleFactor = 3;
inline constexpr std::size_t kFeatureDim = kNumMelBands * (2 * kSpliceContext + 1);
inline constexpr double kSourceFrameRate = 100.0;

struct AudioClip {
  std::vector<double> samples;  // PCM in [-1, 1]
  int sample_rate_hz = kSampleRateHz;
};

struct FeatureSequence {
  Tensor frames;  // T' x 280
  double frame_rate_fps = kSourceFrameRate / kSubsampleFactor;
  double source_frame_rate_fps = kSourceFrameRate;

  std::size_t num_frames() const { return frames.rows(); }
  double duration_s() const { return num_frames() / frame_rate_fps; }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Centre frequency (Hz) of each of the 40 mel filters.
std::vector<double> mel_center_frequencies();

// T x 40 log mel energies. Rejects sample rates other than 16 kHz and clips
// shorter than one 400-sample window.
Tensor log_filterbank(const AudioClip& clip);

// T x 40 -> ceil(T/3) x 280.
FeatureSequence splice_and_subsample(const Tensor& filterbanks);

inline FeatureSequence compute_features(const AudioClip& clip) {
  return splice_and_subsample(log_filterbank(clip));
}

// Mono 16-bit little-endian PCM WAV.
AudioClip read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

// "MTLF" container: magic, version u32, T' u32, dim u32, then T'*dim
// little-endian float32 values, row-major.
inline constexpr std::uint32_t kFeatureFormatVersion = 1;
void write_features(const std::filesystem::path& path, const FeatureSequence& seq);
FeatureSequence read_features(const std::filesystem::path& path);

}  // namespace mtl

#endif  // MTL_FEATURES_H_
