// mtl/train.h

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

#ifndef MTL_TRAIN_H_
#define MTL_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mtl/adam.h"
#include "mtl/corpus.h"
#include "mtl/features.h"
#include "mtl/losses.h"
#include "mtl/model.h"
#include "mtl/params.h"

namespace mtl {

struct TrainingExample {
  std::string id;
  FeatureSequence features;
  LabelKind kind = LabelKind::kPhonetic;
  PhoneSequence phones;  // kPhonetic
  int speaker = -1;      // kSpeaker: row of the speaker classifier
};

struct TrainingSet {
  std::vector<TrainingExample> examples;
  std::vector<std::string> speakers;  // sorted; index = classifier row
  std::map<std::string, std::size_t> by_id;
};

// Loads every utterance of a training manifest with its features.
TrainingSet load_training_set(const std::filesystem::path& manifest);

enum LossTerms : unsigned { kTriggerTerm = 1u, kSpeakerTerm = 2u, kAllTerms = 3u };

/// C_mtl for one batch. Each phone-labelled example contributes its CTC loss
/// to C_vt, each speaker-labelled one its cross-entropy to C_spk; both are
/// means over the examples of their kind. `terms` drops either task, and a
/// task the model has no branch for is skipped. When `grads` is given the
/// gradient of C_mtl is accumulated into it.
///
/// Examples are processed in fixed chunks whose gradients are reduced in
/// index order, so results do not depend on `threads`.
TaskLosses mtl_loss(const JointModel& model, std::span<const TrainingExample* const> batch,
                    GradientSet* grads, unsigned terms = kAllTerms, int threads = 1);

struct TrainOptions {
  int epochs = 20;
  int batch_size = 128;
  AdamOptions adam;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct EpochStats {
  int epoch = 0;         // 1-based
  double trigger = 0.0;  // mean per-utterance CTC loss over the epoch
  double speaker = 0.0;  // mean per-utterance cross-entropy over the epoch
  double total() const { return mtl_objective(trigger, speaker); }
};

using EpochCallback = std::function<void(const EpochStats&, const JointModel&)>;

// Adam over shuffled mixed batches. Throws NumericalError on a non-finite
// loss or gradient before the offending update is applied.
std::vector<EpochStats> train(JointModel& model, const TrainingSet& data,
                              const TrainOptions& options, const EpochCallback& on_epoch = {});

}  // namespace mtl

#endif  // MTL_TRAIN_H_
