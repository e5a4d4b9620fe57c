// mtl/cli.cc

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

#include "mtl/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>

#include "mtl/checkpoint.h"
#include "mtl/errors.h"
#include "mtl/features.h"
#include "mtl/metrics.h"
#include "mtl/speaker.h"
#include "mtl/train.h"
#include "mtl/trigger.h"

namespace mtl {
namespace fs = std::filesystem;

namespace {

constexpr SegmentKind kSegmentOrder[] = {SegmentKind::kTrigger, SegmentKind::kFull,
                                         SegmentKind::kPayload};

std::string epoch_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "epoch_%03d.mtlc", epoch);
  return buf;
}

std::string percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", 100.0 * rate);
  return buf;
}

// JSON has no infinities; they are written as null.
Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const std::set<std::string>& spec_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    const Json defaults = SyntheticSpec{}.to_json();
    for (const auto& [key, _] : defaults.items()) k.insert(key);
    return k;
  }();
  return keys;
}

template <typename T>
T get(const Json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError("config key '" + key + "': " + e.what());
  }
}

JointModel load_model_for(const RunConfig& cfg, unsigned need) {
  JointModel model = load_checkpoint(cfg.checkpoint_path());
  if ((need & kTriggerBranch) && !model.config().has_trigger_branch())
    throw ConfigError(cfg.checkpoint_path().string() + " has no trigger branch");
  if ((need & kSpeakerBranch) && !model.config().has_speaker_branch())
    throw ConfigError(cfg.checkpoint_path().string() + " has no speaker branch");
  return model;
}

void write_json(const fs::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_loss_log(const fs::path& path, const std::vector<EpochStats>& rows) {
  std::string out = "# schema_version: 1\nepoch,C_vt,C_spk,C_mtl\n";
  for (const EpochStats& r : rows)
    out += std::to_string(r.epoch) + "," + format_real(r.trigger) + "," + format_real(r.speaker) +
           "," + format_real(r.total()) + "\n";
  write_text_file(path, out);
}

}  // namespace

RunConfig RunConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  RunConfig c;
  Json spec_json = Json::object();
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") c.seed = get<std::uint64_t>(j, key);
    else if (key == "force") c.force = get<bool>(j, key);
    else if (key == "threads") c.threads = get<int>(j, key);
    else if (key == "corpus") c.corpus = get<std::string>(j, key);
    else if (key == "tied") c.tied = get<int>(j, key);
    else if (key == "task") c.task = task_from_string(get<std::string>(j, key));
    else if (key == "hidden_units") c.hidden_units = get<int>(j, key);
    else if (key == "attn_hidden") c.attn_hidden = get<int>(j, key);
    else if (key == "embedding_dim") c.embedding_dim = get<int>(j, key);
    else if (key == "trigger_depth") c.trigger_depth = get<int>(j, key);
    else if (key == "speaker_baseline_depth") c.speaker_baseline_depth = get<int>(j, key);
    else if (key == "lr") c.adam.lr = get<double>(j, key);
    else if (key == "beta1") c.adam.beta1 = get<double>(j, key);
    else if (key == "beta2") c.adam.beta2 = get<double>(j, key);
    else if (key == "eps") c.adam.eps = get<double>(j, key);
    else if (key == "epochs") c.epochs = get<int>(j, key);
    else if (key == "batch_size") c.batch_size = get<int>(j, key);
    else if (key == "checkpoint_dir") c.checkpoint_dir = get<std::string>(j, key);
    else if (key == "checkpoint") c.checkpoint = get<std::string>(j, key);
    else if (key == "reports") c.reports = get<std::string>(j, key);
    else if (key == "baseline_report") c.baseline_report = get<std::string>(j, key);
    else if (key == "input") c.input = get<std::string>(j, key);
    else if (key == "output") c.output = get<std::string>(j, key);
    else if (spec_keys().count(key)) spec_json[key] = value;
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.corpus_spec = SyntheticSpec::from_json(spec_json);
  c.corpus_spec.seed = c.seed;
  if (c.threads < 1) throw ConfigError("threads must be at least 1");
  if (c.epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(c.adam.lr > 0.0)) throw ConfigError("lr must be positive");
  if (c.tied != 0 && c.tied != 2 && c.tied != 3 && c.tied != 4)
    throw ConfigError("tied must be one of 0, 2, 3, 4");
  return c;
}

Json RunConfig::to_json() const {
  Json j;
  j["seed"] = seed;
  j["force"] = force;
  j["threads"] = threads;
  j["corpus"] = corpus.string();
  const Json spec = corpus_spec.to_json();
  for (const auto& [k, v] : spec.items())
    if (k != "seed") j[k] = v;
  j["tied"] = tied;
  j["task"] = to_string(task);
  j["hidden_units"] = hidden_units;
  j["attn_hidden"] = attn_hidden;
  j["embedding_dim"] = embedding_dim;
  j["trigger_depth"] = trigger_depth;
  j["speaker_baseline_depth"] = speaker_baseline_depth;
  j["lr"] = adam.lr;
  j["beta1"] = adam.beta1;
  j["beta2"] = adam.beta2;
  j["eps"] = adam.eps;
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["checkpoint_dir"] = checkpoint_dir.string();
  if (checkpoint) j["checkpoint"] = checkpoint->string();
  j["reports"] = reports.string();
  if (baseline_report) j["baseline_report"] = baseline_report->string();
  if (input) j["input"] = input->string();
  if (output) j["output"] = output->string();
  return j;
}

Json load_config_json(const std::optional<fs::path>& file, const Json& overrides) {
  Json j = Json::object();
  if (file) {
    try {
      j = Json::parse(read_text_file(*file));
    } catch (const Json::parse_error& e) {
      throw ConfigError(file->string() + ": " + e.what());
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    if (!j.is_object()) throw ConfigError(file->string() + ": config must be a JSON object");
  }
  for (const auto& [k, v] : overrides.items()) j[k] = v;
  return j;
}

CorpusSummary cmd_gen(const RunConfig& cfg, std::ostream& log) {
  const CorpusLayout layout{cfg.corpus};
  if (fs::exists(cfg.corpus) && !fs::is_empty(cfg.corpus)) {
    if (!cfg.force)
      throw ConfigError("output " + cfg.corpus.string() + " exists; pass --force to replace it");
    if (!fs::exists(layout.spec()))
      throw ConfigError("refusing to replace " + cfg.corpus.string() +
                        ": it does not look like a generated corpus");
    fs::remove_all(cfg.corpus);
  }
  const CorpusSummary s = generate(cfg.corpus_spec, cfg.corpus);
  log << "corpus " << cfg.corpus.string() << ": " << s.phonetic << " phonetic + "
      << s.speaker_segments << " speaker (" << s.speaker_base << " x 3 segments) training utterances\n"
      << "  trigger trials " << s.trigger_trials << ", enrol " << s.enrol << ", test " << s.test
      << ", speaker trials " << s.speaker_trials << ", cohort " << s.cohort << "\n";
  return s;
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  const CorpusLayout layout{cfg.corpus};
  const SyntheticSpec spec = read_corpus_spec(layout);
  const fs::path last = cfg.checkpoint_dir / "last.mtlc";
  if (fs::exists(last) && !cfg.force)
    throw ConfigError(last.string() + " exists; pass --force to retrain");

  const TrainingSet data = load_training_set(layout.train());
  ModelConfig mc;
  mc.tied_layers = cfg.tied;
  mc.task = cfg.task;
  mc.trigger_depth = cfg.trigger_depth;
  mc.speaker_baseline_depth = cfg.speaker_baseline_depth;
  mc.hidden_units = cfg.hidden_units;
  mc.attn_hidden = cfg.attn_hidden;
  mc.embedding_dim = cfg.embedding_dim;
  mc.phone_vocab = spec.vocab();
  mc.num_speakers = std::max<int>(1, static_cast<int>(data.speakers.size()));
  mc.speaker_labels = data.speakers;
  if (mc.speaker_labels.empty()) mc.speaker_labels.push_back("none");
  mc.init_seed = cfg.seed;
  JointModel model(mc);

  fs::create_directories(cfg.checkpoint_dir);
  log << "training " << to_string(mc.task) << " model, tied_layers " << mc.tied_layers << ", "
      << model.num_parameters() << " parameters, " << data.examples.size() << " utterances\n";
  save_checkpoint(cfg.checkpoint_dir / epoch_name(0), model);
  save_checkpoint(last, model);

  TrainOptions opts;
  opts.epochs = cfg.epochs;
  opts.batch_size = cfg.batch_size;
  opts.adam = cfg.adam;
  opts.seed = cfg.seed;
  opts.threads = cfg.threads;
  std::vector<EpochStats> rows;
  const fs::path loss_log = cfg.checkpoint_dir / "loss.csv";
  write_loss_log(loss_log, rows);
  try {
    train(model, data, opts, [&](const EpochStats& st, const JointModel& m) {
      rows.push_back(st);
      save_checkpoint(cfg.checkpoint_dir / epoch_name(st.epoch), m);
      save_checkpoint(last, m);
      write_loss_log(loss_log, rows);
      log << "epoch " << st.epoch << "  C_vt " << format_real(st.trigger) << "  C_spk "
          << format_real(st.speaker) << "  C_mtl " << format_real(st.total()) << "\n"
          << std::flush;
    });
  } catch (const NumericalError&) {
    log << "numerical failure; " << last.string() << " holds the last good epoch ("
        << rows.size() << ")\n";
    throw;
  }
}

void cmd_eval_trigger(const RunConfig& cfg, std::ostream& log) {
  const CorpusLayout layout{cfg.corpus};
  const SyntheticSpec spec = read_corpus_spec(layout);
  const JointModel model = load_model_for(cfg, kTriggerBranch);
  if (model.config().phone_vocab != spec.vocab())
    throw DataError("checkpoint vocabulary " + std::to_string(model.config().phone_vocab) +
                    " does not match corpus vocabulary " + std::to_string(spec.vocab()));
  const Manifest trials = read_manifest(layout.trigger_trials());
  if (trials.empty()) throw DataError(layout.trigger_trials().string() + " has no trials");

  // Negatives longer than one second are searched in 1 s windows with a
  // 1 s hop; the best window is the recording's score.
  const auto window = static_cast<std::size_t>(std::lround(FeatureSequence{}.frame_rate_fps));
  ScoreSet ss;
  double negative_seconds = 0.0;
  std::string dump = "utterance_id,log_prob,frames,normalized,is_positive\n";
  for (const Utterance& u : trials) {
    if (!u.is_positive) throw DataError("trigger trial " + u.id + " lacks is_positive");
    const FeatureSequence x = read_features(resolve(layout.root, u.feature_path));
    const Tensor lp = model.infer(x, kTriggerBranch).phone_logprobs;
    TriggerScore s;
    if (*u.is_positive) {
      s = score_trigger(lp, spec.phrase, model.config().blank_id());
      ss.target_scores.push_back(s.normalized);
    } else {
      if (!(u.duration_s > 0.0))
        throw DataError("negative trial " + u.id + " has no duration_s; cannot compute hours");
      negative_seconds += u.duration_s;
      const auto windows = score_windows(lp, spec.phrase, model.config().blank_id(), window, window);
      s = *std::max_element(windows.begin(), windows.end(),
                            [](const TriggerScore& a, const TriggerScore& b) {
                              return a.normalized < b.normalized;
                            });
      ss.nontarget_scores.push_back(s.normalized);
    }
    dump += u.id + "," + format_real(s.log_prob) + "," + std::to_string(s.frames) + "," +
            format_real(s.normalized) + "," + (*u.is_positive ? "true" : "false") + "\n";
  }
  if (ss.target_scores.empty() || ss.nontarget_scores.empty())
    throw DataError("trigger trials need both positives and negatives");
  ss.negative_audio_hours = negative_seconds / 3600.0;

  const DetCurve det = det_curve(ss);
  const EerResult e = eer(ss);
  const double fr0 = fr_at_zero_fa(ss);
  const ReportLayout out{cfg.reports};
  fs::create_directories(out.root);
  write_text_file(out.trigger_scores(), dump);
  write_det_csv(out.trigger_det(), det);
  Json summary;
  summary["schema_version"] = kReportSchemaVersion;
  summary["phrase"] = spec.phrase.phones;
  summary["num_targets"] = ss.target_scores.size();
  summary["num_nontargets"] = ss.nontarget_scores.size();
  summary["negative_audio_hours"] = *ss.negative_audio_hours;
  summary["det_points"] = det.points.size();
  summary["fr_at_zero_fa"] = fr0;
  summary["eer"] = e.eer;
  summary["eer_threshold"] = real_or_null(e.threshold);
  write_json(out.trigger_summary(), summary);
  log << "trigger: " << ss.target_scores.size() << " positives, " << ss.nontarget_scores.size()
      << " negatives over " << format_real(*ss.negative_audio_hours) << " h; FR at 0 FA "
      << percent(fr0) << ", EER " << percent(e.eer) << "\n";
}

void cmd_eval_speaker(const RunConfig& cfg, std::ostream& log) {
  const CorpusLayout layout{cfg.corpus};
  const JointModel model = load_model_for(cfg, kSpeakerBranch);
  const Manifest enrol = read_manifest(layout.enrol());
  const Manifest test = read_manifest(layout.test());
  const Manifest cohort = read_manifest(layout.cohort());
  const std::vector<SpeakerTrial> trials = read_trials(layout.trials());

  std::map<std::string, Embedding> emb;
  auto embed_all = [&](const Manifest& m) {
    for (const Utterance& u : m)
      if (!emb.count(u.id))
        emb.emplace(u.id, embed(read_features(resolve(layout.root, u.feature_path)), model));
  };
  embed_all(enrol);
  embed_all(test);
  embed_all(cohort);

  auto profiles_of = [&](const Manifest& m, SegmentKind kind) {
    std::map<std::string, SpeakerProfile> by;
    for (const Utterance& u : m) {
      if (u.label_kind != LabelKind::kSpeaker || u.segment_kind != kind) continue;
      SpeakerProfile& p = by[u.speaker];
      p.speaker_id = u.speaker;
      p.enrolment.push_back(emb.at(u.id));
    }
    return by;
  };

  std::optional<Json> baseline;
  if (cfg.baseline_report) {
    try {
      baseline = Json::parse(read_text_file(*cfg.baseline_report));
    } catch (const Json::parse_error& e) {
      throw DataError(cfg.baseline_report->string() + ": " + e.what());
    }
  }

  const ReportLayout out{cfg.reports};
  fs::create_directories(out.root);
  Json report;
  report["schema_version"] = kReportSchemaVersion;
  Json eers = Json::object(), thresholds = Json::object(), raw = Json::object(),
       counts = Json::object();
  std::vector<std::size_t> enrol_counts;
  for (SegmentKind kind : kSegmentOrder) {
    const std::string key = to_string(kind);
    const auto profiles = profiles_of(enrol, kind);
    const auto cohort_profiles = profiles_of(cohort, kind);
    TnormCohort tc;
    for (const auto& [_, p] : cohort_profiles) tc.profiles.push_back(p);

    std::vector<SpeakerProfile> store;
    for (const auto& [_, p] : profiles) store.push_back(p);
    write_profiles(out.profiles(kind), store);
    if (kind == SegmentKind::kFull)
      for (const auto& p : store) enrol_counts.push_back(p.enrolment.size());

    ScoreSet norm, plain;
    std::map<std::string, TnormStats> stats;
    for (const SpeakerTrial& t : trials) {
      if (t.segment_kind != kind) continue;
      const auto it = profiles.find(t.claimed_speaker);
      if (it == profiles.end())
        throw DataError("claimed speaker " + t.claimed_speaker + " has zero " + key +
                        " enrolments");
      const auto eit = emb.find(t.test_id);
      if (eit == emb.end()) throw DataError("trial test " + t.test_id + " is not in test.jsonl");
      const Embedding& e = eit->second;
      if (!stats.count(t.test_id)) stats.emplace(t.test_id, tnorm_stats(e, tc));
      const double s = cosine_score(e, it->second);
      const double z = tnorm(s, stats.at(t.test_id));
      (t.is_target ? norm.target_scores : norm.nontarget_scores).push_back(z);
      (t.is_target ? plain.target_scores : plain.nontarget_scores).push_back(s);
    }
    if (norm.target_scores.empty() || norm.nontarget_scores.empty())
      throw DataError("no " + key + " trials with both target and nontarget scores");
    const EerResult r = eer(norm);
    eers[key] = r.eer;
    thresholds[key] = real_or_null(r.threshold);
    raw[key] = eer(plain).eer;
    counts[key] = {{"target", norm.target_scores.size()},
                   {"nontarget", norm.nontarget_scores.size()}};
    log << "speaker " << key << ": EER " << percent(r.eer) << " (raw cosine "
        << percent(raw[key].get<double>()) << ")\n";
  }
  report["eer"] = eers;
  report["eer_threshold"] = thresholds;
  report["raw_eer"] = raw;
  report["trials"] = counts;
  std::sort(enrol_counts.begin(), enrol_counts.end());
  report["median_enrolments"] = enrol_counts.empty() ? 0 : enrol_counts[enrol_counts.size() / 2];
  if (baseline) {
    report["baseline_eer"] = baseline->at("eer");
    report["relative_improvement"] = relative_improvements(*baseline, report);
    for (const auto& [k, v] : report["relative_improvement"].items()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f%%", v.get<double>());
      log << "relative improvement " << k << ": " << buf << "\n";
    }
  }
  write_json(out.speaker_report(), report);
}

Json relative_improvements(const Json& baseline, const Json& current) {
  Json out = Json::object();
  try {
    for (SegmentKind kind : kSegmentOrder) {
      const std::string key = to_string(kind);
      out[key] = relative_improvement(baseline.at("eer").at(key).get<double>(),
                                      current.at("eer").at(key).get<double>());
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("speaker report lacks an eer entry: ") + e.what());
  }
  return out;
}

void cmd_score(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.input) throw ConfigError("score needs --input (a .wav or .mtlf file)");
  const JointModel model = load_checkpoint(cfg.checkpoint_path());
  const FeatureSequence x = cfg.input->extension() == ".wav"
                                ? compute_features(read_wav(*cfg.input))
                                : read_features(*cfg.input);
  const ModelConfig& mc = model.config();
  const InferenceOutputs o = model.infer(x);

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["frames"] = x.num_frames();
  j["duration_s"] = x.duration_s();
  if (mc.has_trigger_branch()) {
    TriggerPhrase phrase = SyntheticSpec{}.phrase;
    const CorpusLayout layout{cfg.corpus};
    if (fs::exists(layout.spec())) phrase = read_corpus_spec(layout).phrase;
    const TriggerScore s = score_trigger(o.phone_logprobs, phrase, mc.blank_id());
    // Best path: argmax per frame, merge repeats, drop blanks.
    PhoneSequence decoded;
    int prev = -1;
    for (std::size_t t = 0; t < o.phone_logprobs.rows(); ++t) {
      int best = 0;
      for (std::size_t k = 1; k < o.phone_logprobs.cols(); ++k)
        if (o.phone_logprobs(t, k) > o.phone_logprobs(t, static_cast<std::size_t>(best)))
          best = static_cast<int>(k);
      if (best != prev && best != mc.blank_id()) decoded.push_back(best);
      prev = best;
    }
    j["trigger"] = {{"phrase", phrase.phones},
                    {"log_prob", real_or_null(s.log_prob)},
                    {"normalized", real_or_null(s.normalized)},
                    {"admissible", s.admissible},
                    {"best_path", decoded}};
  }
  if (mc.has_speaker_branch()) {
    j["embedding"] = o.embedding;
    const auto top = std::max_element(o.speaker_logits.begin(), o.speaker_logits.end());
    const auto idx = static_cast<std::size_t>(top - o.speaker_logits.begin());
    j["closest_training_speaker"] =
        idx < mc.speaker_labels.size() ? mc.speaker_labels[idx] : std::to_string(idx);
  }
  const std::string text = j.dump(2) + "\n";
  if (cfg.output) write_text_file(*cfg.output, text);
  else out << text;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 3;
  return 1;
}

}  // namespace mtl
