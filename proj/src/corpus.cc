// mtl/corpus.cc

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

#include "mtl/corpus.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mtl/errors.h"
#include "mtl/features.h"

namespace mtl {
namespace fs = std::filesystem;

namespace {

// Independent RNG streams.
enum Stream : std::uint32_t {
  kTemplates = 1,
  kVoiceBasis,
  kSpeakerVoice,
  kPhonetic,
  kSpeakerUtt,
  kTriggerTrial,
  kEvalVoice,
  kEvalUtt,
  kCohortVoice,
  kCohortUtt,
  kSchedule,
};

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t stream, std::uint32_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    stream, index};
  return std::mt19937_64(seq);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Random phones with no two equal neighbours, also differing from `prev`.
PhoneSequence random_phones(std::mt19937_64& rng, int num_phones, int length, int prev = -1) {
  PhoneSequence out;
  for (int i = 0; i < length; ++i) {
    int p;
    do p = uniform_int(rng, 0, num_phones - 1);
    while (p == prev);
    out.push_back(p);
    prev = p;
  }
  return out;
}

std::string pad(int v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, v);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("synthetic spec: " + what);
}

template <typename T>
void get_opt(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

class Writer {
 public:
  Writer(const SyntheticSpec& spec, fs::path root)
      : spec_(spec), root_(std::move(root)), templates_(phone_templates(spec)) {}

  // Splices `frames`, writes the feature file and fills path + duration.
  void emit(Utterance& u, const Tensor& frames) const {
    const FeatureSequence seq = splice_and_subsample(frames);
    u.feature_path = "features/" + u.id + ".mtlf";
    u.duration_s = seq.duration_s();
    write_features(root_ / u.feature_path, seq);
  }

  Tensor render_with_silence(const Voice& v, const PhoneSequence& phones,
                             std::mt19937_64& rng) const {
    PhoneSequence full;
    full.push_back(spec_.num_phones);
    full.insert(full.end(), phones.begin(), phones.end());
    full.push_back(spec_.num_phones);
    return render(spec_, templates_, v, full, rng);
  }

  // [sil] phrase payload [sil], cut into the three segments.
  void emit_segments(const std::string& id_prefix, const std::string& speaker, const Voice& v,
                     std::mt19937_64& rng, Manifest& out) const {
    const PhoneSequence payload =
        random_phones(rng, spec_.num_phones,
                      uniform_int(rng, spec_.min_payload_phones, spec_.max_payload_phones),
                      spec_.phrase.phones.back());
    PhoneSequence head;
    head.push_back(spec_.num_phones);
    head.insert(head.end(), spec_.phrase.phones.begin(), spec_.phrase.phones.end());
    PhoneSequence tail(payload);
    tail.push_back(spec_.num_phones);
    const Tensor a = render(spec_, templates_, v, head, rng);
    const Tensor b = render(spec_, templates_, v, tail, rng);
    Tensor full({a.rows() + b.rows(), a.cols()});
    std::copy(a.data().begin(), a.data().end(), full.data().begin());
    std::copy(b.data().begin(), b.data().end(),
              full.data().begin() + static_cast<std::ptrdiff_t>(a.size()));

    const std::pair<SegmentKind, Tensor> parts[] = {
        {SegmentKind::kTrigger, a}, {SegmentKind::kPayload, b}, {SegmentKind::kFull, full}};
    for (const auto& [kind, frames] : parts) {
      Utterance u;
      u.id = id_prefix + "_" + to_string(kind);
      u.label_kind = LabelKind::kSpeaker;
      u.speaker = speaker;
      u.segment_kind = kind;
      emit(u, frames);
      out.push_back(std::move(u));
    }
  }

 private:
  const SyntheticSpec& spec_;
  fs::path root_;
  Tensor templates_;
};

}  // namespace

void SyntheticSpec::validate() const {
  require(num_phones >= 2, "num_phones must be at least 2");
  require(num_speakers >= 2, "num_speakers must be at least 2");
  require(utterances_per_speaker >= 1, "utterances_per_speaker must be positive");
  require(num_phonetic >= 1, "num_phonetic must be positive");
  require(!phrase.phones.empty(), "trigger phrase is empty");
  for (int p : phrase.phones)
    require(p >= 0 && p < num_phones,
            "phrase uses unknown phone " + std::to_string(p) + " (num_phones " +
                std::to_string(num_phones) + ")");
  require(noise_level >= 0.0 && std::isfinite(noise_level), "noise_level must be >= 0");
  require(phrase_fraction >= 0.0 && phrase_fraction <= 1.0, "phrase_fraction outside [0, 1]");
  require(min_phone_frames >= 1 && min_phone_frames <= max_phone_frames,
          "phone frame range invalid");
  require(min_phones >= 1 && min_phones <= max_phones, "phone count range invalid");
  require(min_payload_phones >= 1 && min_payload_phones <= max_payload_phones,
          "payload phone range invalid");
  require(voice_dims >= 1, "voice_dims must be positive");
  require(voice_scale >= 0.0 && tilt_scale >= 0.0 && template_scale > 0.0,
          "voice/template scales invalid");
  require(eval_speakers >= 2, "eval_speakers must be at least 2");
  require(min_enrolments >= 1 && min_enrolments <= max_enrolments, "enrolment range invalid");
  require(tests_per_speaker >= 1, "tests_per_speaker must be positive");
  require(cohort_speakers >= 2, "cohort_speakers must be at least 2");
  require(cohort_utterances >= 1, "cohort_utterances must be positive");
  require(trigger_positives >= 1 && trigger_negatives >= 1, "trigger trial counts must be positive");
}

Json SyntheticSpec::to_json() const {
  Json j;
  j["num_phones"] = num_phones;
  j["num_speakers"] = num_speakers;
  j["utterances_per_speaker"] = utterances_per_speaker;
  j["num_phonetic"] = num_phonetic;
  j["phrase_name"] = phrase.name;
  j["phrase"] = phrase.phones;
  j["seed"] = seed;
  j["noise_level"] = noise_level;
  j["phrase_fraction"] = phrase_fraction;
  j["min_phone_frames"] = min_phone_frames;
  j["max_phone_frames"] = max_phone_frames;
  j["min_phones"] = min_phones;
  j["max_phones"] = max_phones;
  j["min_payload_phones"] = min_payload_phones;
  j["max_payload_phones"] = max_payload_phones;
  j["voice_dims"] = voice_dims;
  j["voice_scale"] = voice_scale;
  j["tilt_scale"] = tilt_scale;
  j["template_scale"] = template_scale;
  j["eval_speakers"] = eval_speakers;
  j["min_enrolments"] = min_enrolments;
  j["max_enrolments"] = max_enrolments;
  j["tests_per_speaker"] = tests_per_speaker;
  j["cohort_speakers"] = cohort_speakers;
  j["cohort_utterances"] = cohort_utterances;
  j["trigger_positives"] = trigger_positives;
  j["trigger_negatives"] = trigger_negatives;
  return j;
}

SyntheticSpec SyntheticSpec::from_json(const Json& j) {
  SyntheticSpec s;
  try {
    get_opt(j, "num_phones", s.num_phones);
    get_opt(j, "num_speakers", s.num_speakers);
    get_opt(j, "utterances_per_speaker", s.utterances_per_speaker);
    get_opt(j, "num_phonetic", s.num_phonetic);
    get_opt(j, "phrase_name", s.phrase.name);
    get_opt(j, "phrase", s.phrase.phones);
    get_opt(j, "seed", s.seed);
    get_opt(j, "noise_level", s.noise_level);
    get_opt(j, "phrase_fraction", s.phrase_fraction);
    get_opt(j, "min_phone_frames", s.min_phone_frames);
    get_opt(j, "max_phone_frames", s.max_phone_frames);
    get_opt(j, "min_phones", s.min_phones);
    get_opt(j, "max_phones", s.max_phones);
    get_opt(j, "min_payload_phones", s.min_payload_phones);
    get_opt(j, "max_payload_phones", s.max_payload_phones);
    get_opt(j, "voice_dims", s.voice_dims);
    get_opt(j, "voice_scale", s.voice_scale);
    get_opt(j, "tilt_scale", s.tilt_scale);
    get_opt(j, "template_scale", s.template_scale);
    get_opt(j, "eval_speakers", s.eval_speakers);
    get_opt(j, "min_enrolments", s.min_enrolments);
    get_opt(j, "max_enrolments", s.max_enrolments);
    get_opt(j, "tests_per_speaker", s.tests_per_speaker);
    get_opt(j, "cohort_speakers", s.cohort_speakers);
    get_opt(j, "cohort_utterances", s.cohort_utterances);
    get_opt(j, "trigger_positives", s.trigger_positives);
    get_opt(j, "trigger_negatives", s.trigger_negatives);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("synthetic spec: ") + e.what());
  }
  return s;
}

std::string to_string(LabelKind kind) {
  return kind == LabelKind::kPhonetic ? "phonetic" : "speaker";
}

std::string to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kTrigger: return "trigger";
    case SegmentKind::kPayload: return "payload";
    case SegmentKind::kFull: return "full";
  }
  return "full";
}

LabelKind label_kind_from_string(const std::string& s) {
  if (s == "phonetic") return LabelKind::kPhonetic;
  if (s == "speaker") return LabelKind::kSpeaker;
  throw DataError("unknown label_kind '" + s + "'");
}

SegmentKind segment_kind_from_string(const std::string& s) {
  if (s == "trigger") return SegmentKind::kTrigger;
  if (s == "payload") return SegmentKind::kPayload;
  if (s == "full") return SegmentKind::kFull;
  throw DataError("unknown segment_kind '" + s + "'");
}

Json to_json(const Utterance& u) {
  Json j;
  j["id"] = u.id;
  j["feature_path"] = u.feature_path;
  j["label_kind"] = to_string(u.label_kind);
  if (u.label_kind == LabelKind::kPhonetic) j["phones"] = u.phones;
  else j["speaker"] = u.speaker;
  j["segment_kind"] = to_string(u.segment_kind);
  j["duration_s"] = u.duration_s;
  if (u.is_positive) j["is_positive"] = *u.is_positive;
  return j;
}

Utterance utterance_from_json(const Json& j) {
  Utterance u;
  try {
    u.id = j.at("id").get<std::string>();
    u.feature_path = j.at("feature_path").get<std::string>();
    u.label_kind = label_kind_from_string(j.at("label_kind").get<std::string>());
    const bool has_phones = j.contains("phones"), has_speaker = j.contains("speaker");
    if (has_phones && has_speaker)
      throw DataError("utterance " + u.id + " carries both phonetic and speaker labels");
    if (u.label_kind == LabelKind::kPhonetic) {
      if (!has_phones) throw DataError("phonetic utterance " + u.id + " has no phones");
      u.phones = j.at("phones").get<PhoneSequence>();
    } else {
      if (!has_speaker) throw DataError("speaker utterance " + u.id + " has no speaker");
      u.speaker = j.at("speaker").get<std::string>();
    }
    u.segment_kind = segment_kind_from_string(j.value("segment_kind", std::string("full")));
    u.duration_s = j.value("duration_s", 0.0);
    if (j.contains("is_positive")) u.is_positive = j.at("is_positive").get<bool>();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed manifest row: ") + e.what());
  }
  return u;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  std::vector<Json> rows;
  rows.reserve(m.size());
  for (const Utterance& u : m) rows.push_back(to_json(u));
  write_jsonl(path, rows);
}

Manifest read_manifest(const fs::path& path) {
  Manifest m;
  for (const Json& j : read_jsonl(path)) m.push_back(utterance_from_json(j));
  return m;
}

void write_trials(const fs::path& path, const std::vector<SpeakerTrial>& trials) {
  std::vector<Json> rows;
  for (const SpeakerTrial& t : trials) {
    Json j;
    j["test_id"] = t.test_id;
    j["feature_path"] = t.feature_path;
    j["claimed_speaker"] = t.claimed_speaker;
    j["is_target"] = t.is_target;
    j["segment_kind"] = to_string(t.segment_kind);
    rows.push_back(std::move(j));
  }
  write_jsonl(path, rows);
}

std::vector<SpeakerTrial> read_trials(const fs::path& path) {
  std::vector<SpeakerTrial> out;
  for (const Json& j : read_jsonl(path)) {
    try {
      SpeakerTrial t;
      t.test_id = j.at("test_id").get<std::string>();
      t.feature_path = j.at("feature_path").get<std::string>();
      t.claimed_speaker = j.at("claimed_speaker").get<std::string>();
      t.is_target = j.at("is_target").get<bool>();
      t.segment_kind = segment_kind_from_string(j.value("segment_kind", std::string("full")));
      out.push_back(std::move(t));
    } catch (const Json::exception& e) {
      throw DataError(path.string() + ": malformed trial: " + e.what());
    }
  }
  return out;
}

Tensor phone_templates(const SyntheticSpec& spec) {
  auto rng = stream_rng(spec.seed, kTemplates, 0);
  std::normal_distribution<double> n01;
  const auto P = static_cast<std::size_t>(spec.num_phones);
  Tensor t({P + 1, kNumMelBands});
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t b = 0; b < kNumMelBands; ++b) t(p, b) = spec.template_scale * n01(rng);
  for (std::size_t b = 0; b < kNumMelBands; ++b) t(P, b) = -1.5 * spec.template_scale;
  return t;
}

Voice draw_voice(const SyntheticSpec& spec, std::mt19937_64& rng) {
  // The basis is a property of the corpus, not of the speaker.
  auto basis_rng = stream_rng(spec.seed, kVoiceBasis, 0);
  std::normal_distribution<double> n01;
  std::vector<std::vector<double>> basis(static_cast<std::size_t>(spec.voice_dims),
                                         std::vector<double>(kNumMelBands));
  for (auto& row : basis)
    for (double& x : row) x = n01(basis_rng);

  Voice v;
  v.offset.assign(kNumMelBands, 0.0);
  const double norm = spec.voice_scale / std::sqrt(static_cast<double>(spec.voice_dims));
  for (const auto& row : basis) {
    const double z = n01(rng) * norm;
    for (std::size_t b = 0; b < kNumMelBands; ++b) v.offset[b] += z * row[b];
  }
  const double tilt = spec.tilt_scale * n01(rng);
  v.gain.resize(kNumMelBands);
  for (std::size_t b = 0; b < kNumMelBands; ++b)
    v.gain[b] = std::exp(tilt * (2.0 * static_cast<double>(b) / (kNumMelBands - 1) - 1.0));
  return v;
}

Tensor render(const SyntheticSpec& spec, const Tensor& templates, const Voice& voice,
              const PhoneSequence& phones, std::mt19937_64& rng, std::vector<int>* frame_labels) {
  std::vector<int> labels;
  for (int p : phones) {
    if (p < 0 || p > spec.num_phones) throw DataError("render: phone id out of range");
    const int n = uniform_int(rng, spec.min_phone_frames, spec.max_phone_frames);
    labels.insert(labels.end(), static_cast<std::size_t>(n), p);
  }
  if (labels.empty()) throw DataError("render: empty phone sequence");
  std::normal_distribution<double> noise(0.0, 1.0);
  Tensor out({labels.size(), kNumMelBands});
  for (std::size_t t = 0; t < labels.size(); ++t) {
    const auto p = static_cast<std::size_t>(labels[t]);
    for (std::size_t b = 0; b < kNumMelBands; ++b)
      out(t, b) = voice.gain[b] * templates(p, b) + voice.offset[b] +
                  spec.noise_level * noise(rng);
  }
  if (frame_labels) *frame_labels = std::move(labels);
  return out;
}

fs::path resolve(const fs::path& manifest_dir, const std::string& rel) {
  const fs::path p(rel);
  return p.is_absolute() ? p : manifest_dir / p;
}

SyntheticSpec read_corpus_spec(const CorpusLayout& layout) {
  try {
    return SyntheticSpec::from_json(Json::parse(read_text_file(layout.spec())));
  } catch (const Json::parse_error& e) {
    throw DataError(layout.spec().string() + ": " + e.what());
  }
}

CorpusSummary generate(const SyntheticSpec& spec, const fs::path& out_dir) {
  spec.validate();
  const CorpusLayout layout{out_dir};
  fs::create_directories(layout.features());
  Writer w(spec, out_dir);
  const int P = spec.num_phones;
  const PhoneSequence& phrase = spec.phrase.phones;
  CorpusSummary sum;

  // Phone-labelled training data, anonymous voices.
  Manifest train;
  for (int i = 0; i < spec.num_phonetic; ++i) {
    auto rng = stream_rng(spec.seed, kPhonetic, static_cast<std::uint32_t>(i));
    const Voice v = draw_voice(spec, rng);
    const int len = uniform_int(rng, spec.min_phones, spec.max_phones);
    PhoneSequence phones;
    if (std::bernoulli_distribution(spec.phrase_fraction)(rng)) {
      const int before = uniform_int(rng, 0, std::max(0, len - 1));
      do phones = random_phones(rng, P, before);
      while (!phones.empty() && phones.back() == phrase.front());
      phones.insert(phones.end(), phrase.begin(), phrase.end());
      const PhoneSequence after = random_phones(rng, P, len - before, phrase.back());
      phones.insert(phones.end(), after.begin(), after.end());
    } else {
      phones = random_phones(rng, P, len);
    }
    Utterance u;
    u.id = "ph" + pad(i, 5);
    u.label_kind = LabelKind::kPhonetic;
    u.phones = phones;
    u.segment_kind = SegmentKind::kFull;
    w.emit(u, w.render_with_silence(v, phones, rng));
    train.push_back(std::move(u));
    ++sum.phonetic;
  }

  // Speaker-labelled training data, three segments per recording.
  for (int s = 0; s < spec.num_speakers; ++s) {
    auto vrng = stream_rng(spec.seed, kSpeakerVoice, static_cast<std::uint32_t>(s));
    const Voice v = draw_voice(spec, vrng);
    const std::string spk = "spk" + pad(s, 3);
    for (int k = 0; k < spec.utterances_per_speaker; ++k) {
      auto rng = stream_rng(spec.seed, kSpeakerUtt,
                            static_cast<std::uint32_t>(s * spec.utterances_per_speaker + k));
      w.emit_segments(spk + "_u" + pad(k, 3), spk, v, rng, train);
      ++sum.speaker_base;
    }
  }
  sum.speaker_segments = 3 * sum.speaker_base;
  write_manifest(layout.train(), train);

  // Trigger trials: phrase-only positives; random, truncated and
  // single-substitution negatives. All voices unseen in training.
  Manifest trig;
  const int total = spec.trigger_positives + spec.trigger_negatives;
  for (int i = 0; i < total; ++i) {
    auto rng = stream_rng(spec.seed, kTriggerTrial, static_cast<std::uint32_t>(i));
    const Voice v = draw_voice(spec, rng);
    const bool positive = i < spec.trigger_positives;
    PhoneSequence phones;
    if (positive) {
      phones = phrase;
    } else {
      const int kind = (i - spec.trigger_positives) % 4;
      do {
        if (kind == 0 || kind == 1) {
          phones = random_phones(rng, P, uniform_int(rng, 3, 6));
        } else if (kind == 2) {
          const int keep = uniform_int(rng, 1, static_cast<int>(phrase.size()) - 1);
          phones.assign(phrase.begin(), phrase.begin() + keep);
          const PhoneSequence rest = random_phones(
              rng, P, static_cast<int>(phrase.size()) - keep + uniform_int(rng, 0, 1),
              phones.back());
          phones.insert(phones.end(), rest.begin(), rest.end());
        } else {
          phones = phrase;
          const auto pos = static_cast<std::size_t>(
              uniform_int(rng, 0, static_cast<int>(phrase.size()) - 1));
          int p;
          do p = uniform_int(rng, 0, P - 1);
          while (p == phrase[pos] || (pos > 0 && p == phones[pos - 1]) ||
                 (pos + 1 < phones.size() && p == phones[pos + 1]));
          phones[pos] = p;
        }
      } while (phones == phrase);
    }
    Utterance u;
    u.id = "trig" + pad(i, 5);
    u.label_kind = LabelKind::kPhonetic;
    u.phones = phones;
    u.segment_kind = SegmentKind::kTrigger;
    u.is_positive = positive;
    w.emit(u, w.render_with_silence(v, phones, rng));
    trig.push_back(std::move(u));
  }
  sum.trigger_trials = total;
  write_manifest(layout.trigger_trials(), trig);

  // Held-out speakers: enrolment and test recordings.
  Manifest enrol, test;
  std::vector<std::string> eval_ids;
  for (int s = 0; s < spec.eval_speakers; ++s) {
    auto vrng = stream_rng(spec.seed, kEvalVoice, static_cast<std::uint32_t>(s));
    const Voice v = draw_voice(spec, vrng);
    const std::string spk = "eval" + pad(s, 3);
    eval_ids.push_back(spk);
    auto rng = stream_rng(spec.seed, kEvalUtt, static_cast<std::uint32_t>(s));
    const int n_enrol = uniform_int(rng, spec.min_enrolments, spec.max_enrolments);
    for (int k = 0; k < n_enrol; ++k) w.emit_segments(spk + "_e" + pad(k, 2), spk, v, rng, enrol);
    for (int k = 0; k < spec.tests_per_speaker; ++k)
      w.emit_segments(spk + "_t" + pad(k, 2), spk, v, rng, test);
  }
  write_manifest(layout.enrol(), enrol);
  write_manifest(layout.test(), test);
  sum.enrol = static_cast<int>(enrol.size());
  sum.test = static_cast<int>(test.size());

  std::vector<SpeakerTrial> trials;
  for (const Utterance& u : test)
    for (const std::string& claimed : eval_ids)
      trials.push_back({u.id, u.feature_path, claimed, claimed == u.speaker, u.segment_kind});
  write_trials(layout.trials(), trials);
  sum.speaker_trials = static_cast<int>(trials.size());

  Manifest cohort;
  for (int s = 0; s < spec.cohort_speakers; ++s) {
    auto vrng = stream_rng(spec.seed, kCohortVoice, static_cast<std::uint32_t>(s));
    const Voice v = draw_voice(spec, vrng);
    const std::string spk = "coh" + pad(s, 3);
    auto rng = stream_rng(spec.seed, kCohortUtt, static_cast<std::uint32_t>(s));
    for (int k = 0; k < spec.cohort_utterances; ++k)
      w.emit_segments(spk + "_u" + pad(k, 2), spk, v, rng, cohort);
  }
  write_manifest(layout.cohort(), cohort);
  sum.cohort = static_cast<int>(cohort.size());

  Json sj = spec.to_json();
  sj["schema_version"] = 1;
  write_text_file(layout.spec(), sj.dump(2) + "\n");
  return sum;
}

BatchPlan schedule(const Manifest& manifest, int batch_size, std::uint64_t seed, int epoch) {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1, got " + std::to_string(batch_size));
  if (manifest.empty()) throw DataError("cannot schedule an empty manifest");
  std::vector<std::string> ids;
  ids.reserve(manifest.size());
  for (const Utterance& u : manifest) ids.push_back(u.id);
  auto rng = stream_rng(seed, kSchedule, static_cast<std::uint32_t>(epoch));
  std::shuffle(ids.begin(), ids.end(), rng);
  BatchPlan plan;
  plan.epoch = epoch;
  plan.batch_size = batch_size;
  const auto B = static_cast<std::size_t>(batch_size);
  for (std::size_t i = 0; i < ids.size(); i += B)
    plan.batches.emplace_back(ids.begin() + static_cast<std::ptrdiff_t>(i),
                              ids.begin() + static_cast<std::ptrdiff_t>(std::min(ids.size(), i + B)));
  return plan;
}

}  // namespace mtl
