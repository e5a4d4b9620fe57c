// mtl/features.cc

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

#include "mtl/features.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>

#include "mtl/errors.h"
#include "mtl/io.h"

namespace mtl {
namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// weights[m][k]: contribution of spectrum bin k to mel band m.
std::vector<std::vector<double>> mel_weights() {
  const std::size_t bins = kFftSize / 2 + 1;
  const double mel_lo = hz_to_mel(kMelLowHz), mel_hi = hz_to_mel(kMelHighHz);
  const double step = (mel_hi - mel_lo) / (kNumMelBands + 1);
  std::vector<std::vector<double>> w(kNumMelBands, std::vector<double>(bins, 0.0));
  for (std::size_t m = 0; m < kNumMelBands; ++m) {
    const double left = mel_lo + step * m;
    const double center = left + step;
    const double right = center + step;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel =
          hz_to_mel(static_cast<double>(k) * kSampleRateHz / kFftSize);
      if (mel > left && mel <= center)
        w[m][k] = (mel - left) / (center - left);
      else if (mel > center && mel < right)
        w[m][k] = (right - mel) / (right - center);
    }
  }
  return w;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> mel_center_frequencies() {
  const double mel_lo = hz_to_mel(kMelLowHz), mel_hi = hz_to_mel(kMelHighHz);
  const double step = (mel_hi - mel_lo) / (kNumMelBands + 1);
  std::vector<double> c(kNumMelBands);
  for (std::size_t m = 0; m < kNumMelBands; ++m)
    c[m] = mel_to_hz(mel_lo + step * (m + 1));
  return c;
}

Tensor log_filterbank(const AudioClip& clip) {
  if (clip.sample_rate_hz != kSampleRateHz)
    throw DataError("log_filterbank: sample rate " +
                    std::to_string(clip.sample_rate_hz) + " Hz unsupported, need " +
                    std::to_string(kSampleRateHz));
  if (clip.samples.size() < kWindowSamples)
    throw DataError("log_filterbank: empty input, clip has " +
                    std::to_string(clip.samples.size()) +
                    " samples, one window needs " + std::to_string(kWindowSamples));

  static const std::vector<std::vector<double>> weights = mel_weights();
  static const std::vector<double> window = [] {
    std::vector<double> w(kWindowSamples);
    for (std::size_t i = 0; i < kWindowSamples; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (kWindowSamples - 1));
    return w;
  }();

  const std::size_t frames = (clip.samples.size() - kWindowSamples) / kHopSamples + 1;
  const std::size_t bins = kFftSize / 2 + 1;

  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(kFftSize));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(bins));
  std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan.reset(fftw_plan_dft_r2c_1d(static_cast<int>(kFftSize), in.get(), out.get(),
                                    FFTW_ESTIMATE));
  }
  if (!plan) throw Error("log_filterbank: FFT planning failed");

  Tensor fb({frames, kNumMelBands});
  std::vector<double> power(bins);
  for (std::size_t f = 0; f < frames; ++f) {
    const double* src = clip.samples.data() + f * kHopSamples;
    double* buf = in.get();
    for (std::size_t i = 0; i < kWindowSamples; ++i) buf[i] = src[i] * window[i];
    std::fill(buf + kWindowSamples, buf + kFftSize, 0.0);
    fftw_execute(plan.get());
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out.get()[k][0], im = out.get()[k][1];
      power[k] = re * re + im * im;
    }
    for (std::size_t m = 0; m < kNumMelBands; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += weights[m][k] * power[k];
      fb(f, m) = std::log(std::max(e, kEnergyFloor));
    }
  }
  return fb;
}

FeatureSequence splice_and_subsample(const Tensor& filterbanks) {
  if (filterbanks.rank() != 2 || filterbanks.cols() != kNumMelBands)
    throw DimensionError("splice_and_subsample expects T x 40, got " +
                         shape_to_string(filterbanks.shape()));
  const std::size_t t_in = filterbanks.rows();
  const std::size_t t_out = (t_in + kSubsampleFactor - 1) / kSubsampleFactor;
  FeatureSequence seq;
  seq.frames = Tensor({t_out, kFeatureDim});
  const auto last = static_cast<std::ptrdiff_t>(t_in) - 1;
  const auto ctx = static_cast<std::ptrdiff_t>(kSpliceContext);
  for (std::size_t o = 0; o < t_out; ++o) {
    const auto t = static_cast<std::ptrdiff_t>(o * kSubsampleFactor);
    auto dst = seq.frames.row(o);
    for (std::ptrdiff_t d = -ctx; d <= ctx; ++d) {
      const std::size_t src = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(t + d, 0, last));
      auto row = filterbanks.row(src);
      std::copy(row.begin(), row.end(),
                dst.begin() + static_cast<std::ptrdiff_t>((d + ctx) * kNumMelBands));
    }
  }
  return seq;
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  expect_magic(in, "RIFF", path.string());
  read_u32(in);
  expect_magic(in, "WAVE", path.string());

  bool have_fmt = false;
  AudioClip clip;
  while (true) {
    char id[4];
    if (!in.read(id, 4)) break;
    const std::uint32_t len = read_u32(in);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      std::vector<char> body(len);
      if (!in.read(body.data(), len)) throw DataError(path.string() + ": truncated fmt chunk");
      if (len < 16) throw DataError(path.string() + ": short fmt chunk");
      auto u16 = [&](std::size_t o) {
        return static_cast<std::uint16_t>(static_cast<unsigned char>(body[o]) |
                                          (static_cast<unsigned char>(body[o + 1]) << 8));
      };
      auto u32 = [&](std::size_t o) {
        return static_cast<std::uint32_t>(u16(o)) | (static_cast<std::uint32_t>(u16(o + 2)) << 16);
      };
      if (u16(0) != 1) throw DataError(path.string() + ": only PCM WAV is supported");
      if (u16(2) != 1) throw DataError(path.string() + ": only mono WAV is supported");
      if (u16(14) != 16) throw DataError(path.string() + ": only 16-bit WAV is supported");
      clip.sample_rate_hz = static_cast<int>(u32(4));
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) throw DataError(path.string() + ": data chunk before fmt chunk");
      std::vector<unsigned char> raw(len);
      if (!in.read(reinterpret_cast<char*>(raw.data()), len))
        throw DataError(path.string() + ": truncated data chunk");
      clip.samples.resize(len / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
        clip.samples[i] = s / 32768.0;
      }
      return clip;
    } else {
      in.seekg(len + (len & 1), std::ios::cur);
    }
  }
  throw DataError(path.string() + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  auto put16 = [&](std::uint16_t v) {
    out.put(static_cast<char>(v & 0xff));
    out.put(static_cast<char>(v >> 8));
  };
  write_magic(out, "RIFF");
  write_u32(out, 36 + data_bytes);
  write_magic(out, "WAVE");
  write_magic(out, "fmt ");
  write_u32(out, 16);
  put16(1);
  put16(1);
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  write_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz * 2));
  put16(2);
  put16(16);
  write_magic(out, "data");
  write_u32(out, data_bytes);
  for (double s : clip.samples) {
    const long q = std::clamp(std::lround(s * 32768.0), -32768L, 32767L);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  if (!out) throw DataError("write failed for " + path.string());
}

void write_features(const std::filesystem::path& path, const FeatureSequence& seq) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_magic(out, "MTLF");
  write_u32(out, kFeatureFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(seq.frames.rows()));
  write_u32(out, static_cast<std::uint32_t>(seq.frames.cols()));
  for (double v : seq.frames.data()) write_f32(out, static_cast<float>(v));
  if (!out) throw DataError("write failed for " + path.string());
}

FeatureSequence read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  expect_magic(in, "MTLF", path.string());
  const std::uint32_t version = read_u32(in);
  if (version != kFeatureFormatVersion)
    throw DataError(path.string() + ": unsupported feature version " + std::to_string(version));
  const std::uint32_t t = read_u32(in);
  const std::uint32_t dim = read_u32(in);
  if (t == 0) throw DataError(path.string() + ": feature file has no frames");
  if (dim != kFeatureDim)
    throw DataError(path.string() + ": feature dim " + std::to_string(dim) + ", expected " +
                    std::to_string(kFeatureDim));
  FeatureSequence seq;
  seq.frames = Tensor({t, dim});
  for (double& v : seq.frames.values()) v = read_f32(in);
  return seq;
}

}  // namespace mtl
