// mtl/corpus.h

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

#ifndef MTL_CORPUS_H_
#define MTL_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mtl/io.h"
#include "mtl/tensor.h"
#include "mtl/trigger.h"

namespace mtl {

/// Synthetic corpus description. Phones are fixed 40-band log-energy
/// templates; a speaker's voice maps each template frame x to
/// gain(b) * x[b] + offset[b], with gain a spectral tilt and offset drawn
/// from a `voice_dims`-dimensional subspace shared by every speaker.
///
/// Training data: `num_phonetic` phone-labelled utterances with anonymous
/// voices (about `phrase_fraction` of them contain the trigger phrase) and
/// `num_speakers` x `utterances_per_speaker` speaker-labelled recordings, each
/// emitted as trigger, payload and full segments. Evaluation uses speakers
/// never seen in training.
struct SyntheticSpec {
  int num_phones = 8;  // the CTC blank is id num_phones
  int num_speakers = 20;
  int utterances_per_speaker = 20;
  int num_phonetic = 800;
  TriggerPhrase phrase{"hey_toy", {2, 5, 1, 6}};
  std::uint64_t seed = 1;
  double noise_level = 0.3;

  double phrase_fraction = 0.4;
  int min_phone_frames = 3;  // at 100 fps, before splicing
  int max_phone_frames = 8;
  int min_phones = 3;
  int max_phones = 8;
  int min_payload_phones = 4;
  int max_payload_phones = 8;
  int voice_dims = 4;
  double voice_scale = 1.0;
  double tilt_scale = 0.25;
  double template_scale = 2.0;

  int eval_speakers = 10;
  int min_enrolments = 4;
  int max_enrolments = 6;
  int tests_per_speaker = 10;
  int cohort_speakers = 24;
  int cohort_utterances = 4;
  int trigger_positives = 100;
  int trigger_negatives = 200;

  int vocab() const { return num_phones + 1; }
  int blank_id() const { return num_phones; }
  int base_speaker_utterances() const { return num_speakers * utterances_per_speaker; }
  int training_utterances() const { return num_phonetic + 3 * base_speaker_utterances(); }

  // Throws ConfigError when these settings cannot be realised.
  void validate() const;
  Json to_json() const;
  static SyntheticSpec from_json(const Json& j);
};

enum class LabelKind { kPhonetic, kSpeaker };
enum class SegmentKind { kTrigger, kPayload, kFull };

std::string to_string(LabelKind kind);
std::string to_string(SegmentKind kind);
LabelKind label_kind_from_string(const std::string& s);
SegmentKind segment_kind_from_string(const std::string& s);

struct Utterance {
  std::string id;
  std::string feature_path;  // relative to the manifest's directory
  LabelKind label_kind = LabelKind::kPhonetic;
  PhoneSequence phones;      // phonetic utterances only
  std::string speaker;       // speaker utterances only
  SegmentKind segment_kind = SegmentKind::kFull;
  double duration_s = 0.0;
  std::optional<bool> is_positive;  // trigger trials only

  bool operator==(const Utterance&) const = default;
};

using Manifest = std::vector<Utterance>;

Json to_json(const Utterance& u);
Utterance utterance_from_json(const Json& j);
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

struct SpeakerTrial {
  std::string test_id;
  std::string feature_path;
  std::string claimed_speaker;
  bool is_target = false;
  SegmentKind segment_kind = SegmentKind::kFull;

  bool operator==(const SpeakerTrial&) const = default;
};

void write_trials(const std::filesystem::path& path, const std::vector<SpeakerTrial>& trials);
std::vector<SpeakerTrial> read_trials(const std::filesystem::path& path);

// Files written by generate() under the output directory.
struct CorpusLayout {
  std::filesystem::path root;
  std::filesystem::path spec() const { return root / "spec.json"; }
  std::filesystem::path train() const { return root / "train.jsonl"; }
  std::filesystem::path trigger_trials() const { return root / "trigger_trials.jsonl"; }
  std::filesystem::path enrol() const { return root / "enrol.jsonl"; }
  std::filesystem::path test() const { return root / "test.jsonl"; }
  std::filesystem::path trials() const { return root / "trials.jsonl"; }
  std::filesystem::path cohort() const { return root / "cohort.jsonl"; }
  std::filesystem::path features() const { return root / "features"; }
};

struct CorpusSummary {
  int phonetic = 0;
  int speaker_base = 0;
  int speaker_segments = 0;
  int trigger_trials = 0;
  int enrol = 0;
  int test = 0;
  int speaker_trials = 0;
  int cohort = 0;
};

// Phone templates: num_phones + 1 rows (the last is silence) of 40 bands.
Tensor phone_templates(const SyntheticSpec& spec);

struct Voice {
  std::vector<double> gain;
  std::vector<double> offset;
};
Voice draw_voice(const SyntheticSpec& spec, std::mt19937_64& rng);

// Renders phones (silence is id num_phones) as 100 fps log-energy frames.
// `frame_labels` receives the template index used for each frame.
Tensor render(const SyntheticSpec& spec, const Tensor& templates, const Voice& voice,
              const PhoneSequence& phones, std::mt19937_64& rng,
              std::vector<int>* frame_labels = nullptr);

// Writes the full corpus under `out_dir`. Fully determined by spec.
CorpusSummary generate(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

SyntheticSpec read_corpus_spec(const CorpusLayout& layout);

// A manifest path resolved against the manifest's directory.
std::filesystem::path resolve(const std::filesystem::path& manifest_dir, const std::string& rel);

struct BatchPlan {
  int epoch = 0;
  int batch_size = 128;
  std::vector<std::vector<std::string>> batches;
};

// Uniform shuffle of all utterances, reseeded from (seed, epoch), cut into
// consecutive batches; the last may be short.
BatchPlan schedule(const Manifest& manifest, int batch_size, std::uint64_t seed, int epoch);

}  // namespace mtl

#endif  // MTL_CORPUS_H_
