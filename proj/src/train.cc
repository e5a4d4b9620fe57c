// mtl/train.cc

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

#include "mtl/train.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

#include "mtl/errors.h"
#include "mtl/ops.h"

namespace mtl {
namespace {

constexpr std::size_t kChunk = 8;

struct ChunkResult {
  GradientSet grads;
  double trigger_sum = 0.0;
  double speaker_sum = 0.0;
};

}  // namespace

TrainingSet load_training_set(const std::filesystem::path& manifest) {
  const Manifest m = read_manifest(manifest);
  if (m.empty()) throw DataError(manifest.string() + ": empty training manifest");
  const auto dir = manifest.parent_path();
  TrainingSet ts;
  std::set<std::string> speakers;
  for (const Utterance& u : m)
    if (u.label_kind == LabelKind::kSpeaker) speakers.insert(u.speaker);
  ts.speakers.assign(speakers.begin(), speakers.end());
  for (const Utterance& u : m) {
    TrainingExample ex;
    ex.id = u.id;
    ex.kind = u.label_kind;
    ex.features = read_features(resolve(dir, u.feature_path));
    if (u.label_kind == LabelKind::kPhonetic) {
      ex.phones = u.phones;
    } else {
      ex.speaker = static_cast<int>(
          std::lower_bound(ts.speakers.begin(), ts.speakers.end(), u.speaker) -
          ts.speakers.begin());
    }
    if (!ts.by_id.emplace(ex.id, ts.examples.size()).second)
      throw DataError(manifest.string() + ": duplicate utterance id " + ex.id);
    ts.examples.push_back(std::move(ex));
  }
  return ts;
}

TaskLosses mtl_loss(const JointModel& model, std::span<const TrainingExample* const> batch,
                    GradientSet* grads, unsigned terms, int threads) {
  if (batch.empty()) throw DataError("mtl_loss: empty batch");
  const ModelConfig& cfg = model.config();
  const bool use_vt = (terms & kTriggerTerm) && cfg.has_trigger_branch();
  const bool use_spk = (terms & kSpeakerTerm) && cfg.has_speaker_branch();
  auto active = [&](const TrainingExample& ex) {
    return ex.kind == LabelKind::kPhonetic ? use_vt : use_spk;
  };

  TaskLosses out;
  for (const TrainingExample* ex : batch) {
    if (!active(*ex)) continue;
    if (ex->kind == LabelKind::kPhonetic) ++out.trigger_count;
    else ++out.speaker_count;
  }
  const double w_vt = out.trigger_count ? 1.0 / static_cast<double>(out.trigger_count) : 0.0;
  const double w_spk = out.speaker_count ? 1.0 / static_cast<double>(out.speaker_count) : 0.0;

  auto run_chunk = [&](std::size_t c, ChunkResult& r) {
    if (grads) r.grads = GradientSet(model.parameters());
    const std::size_t end = std::min(batch.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const TrainingExample& ex = *batch[i];
      if (!active(ex)) continue;
      Tape tape;
      const auto bound = model.bind(tape);
      Var x = tape.constant(ex.features.frames);
      Var loss;
      if (ex.kind == LabelKind::kPhonetic) {
        JointOutputs o = model.forward(tape, x, bound, kTriggerBranch);
        loss = ctc_loss(o.phone_logprobs, ex.phones, cfg.blank_id());
        r.trigger_sum += loss.value().item();
      } else {
        if (ex.speaker < 0 || ex.speaker >= cfg.num_speakers)
          throw DataError("utterance " + ex.id + " has speaker index outside the classifier");
        JointOutputs o = model.forward(tape, x, bound, kSpeakerBranch);
        loss = cross_entropy(o.speaker_logits, ex.speaker);
        r.speaker_sum += loss.value().item();
      }
      if (!std::isfinite(loss.value().item()))
        throw NumericalError("non-finite loss on utterance " + ex.id);
      if (!grads) continue;
      Var scaled = scale(loss, ex.kind == LabelKind::kPhonetic ? w_vt : w_spk);
      tape.backward(scaled);
      for (std::size_t p = 0; p < bound.size(); ++p) tape.add_gradient_to(bound[p], r.grads.at(p));
    }
  };

  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  const std::size_t wave = static_cast<std::size_t>(std::max(1, threads));
  double vt_sum = 0.0, spk_sum = 0.0;
  for (std::size_t start = 0; start < chunks; start += wave) {
    const std::size_t n = std::min(wave, chunks - start);
    std::vector<ChunkResult> results(n);
    if (n == 1) {
      run_chunk(start, results[0]);
    } else {
      std::vector<std::exception_ptr> errors(n);
      std::vector<std::thread> pool;
      for (std::size_t k = 0; k < n; ++k)
        pool.emplace_back([&, k] {
          try {
            run_chunk(start + k, results[k]);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    for (ChunkResult& r : results) {
      vt_sum += r.trigger_sum;
      spk_sum += r.speaker_sum;
      if (grads) grads->add(r.grads);
    }
  }
  out.trigger = vt_sum * w_vt;
  out.speaker = spk_sum * w_spk;
  return out;
}

std::vector<EpochStats> train(JointModel& model, const TrainingSet& data,
                              const TrainOptions& options, const EpochCallback& on_epoch) {
  if (options.epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (data.examples.empty()) throw DataError("training set is empty");
  Manifest ids;
  ids.reserve(data.examples.size());
  for (const TrainingExample& ex : data.examples) {
    Utterance u;
    u.id = ex.id;
    ids.push_back(std::move(u));
  }

  AdamState state(model.parameters(), options.adam);
  GradientSet grads(model.parameters());
  std::vector<EpochStats> history;
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    const BatchPlan plan = schedule(ids, options.batch_size, options.seed, epoch);
    double vt_sum = 0.0, spk_sum = 0.0;
    std::size_t vt_n = 0, spk_n = 0;
    for (const auto& batch_ids : plan.batches) {
      std::vector<const TrainingExample*> batch;
      batch.reserve(batch_ids.size());
      for (const std::string& id : batch_ids) batch.push_back(&data.examples[data.by_id.at(id)]);
      grads.zero();
      const TaskLosses l = mtl_loss(model, batch, &grads, kAllTerms, options.threads);
      if (!std::isfinite(l.total()))
        throw NumericalError("non-finite C_mtl in epoch " + std::to_string(epoch));
      adam_step(model.parameters(), grads, state);
      vt_sum += l.trigger * static_cast<double>(l.trigger_count);
      spk_sum += l.speaker * static_cast<double>(l.speaker_count);
      vt_n += l.trigger_count;
      spk_n += l.speaker_count;
    }
    EpochStats st;
    st.epoch = epoch;
    st.trigger = vt_n ? vt_sum / static_cast<double>(vt_n) : 0.0;
    st.speaker = spk_n ? spk_sum / static_cast<double>(spk_n) : 0.0;
    history.push_back(st);
    if (on_epoch) on_epoch(st, model);
  }
  return history;
}

}  // namespace mtl
