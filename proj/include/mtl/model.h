// mtl/model.h

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

#ifndef MTL_MODEL_H_
#define MTL_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mtl/features.h"
#include "mtl/io.h"
#include "mtl/lstm.h"
#include "mtl/params.h"
#include "mtl/tape.h"

namespace mtl {

enum class Task { kTrigger, kSpeaker, kJoint };

std::string to_string(Task task);
Task task_from_string(const std::string& name);

/// Architecture of a joint (or single-task baseline) model.
///
/// The trigger branch always sees `trigger_depth` biLSTM layers in total:
/// `tied_layers` shared ones followed by `trigger_depth - tied_layers` of its
/// own. In a joint model the speaker branch mirrors it with
/// `trigger_depth - tied_layers` untied layers, so with two tied layers the
/// joint model has exactly as many parameters as the two baselines combined.
/// A speaker baseline (tied_layers == 0, task == kSpeaker) has
/// `speaker_baseline_depth` layers.
struct ModelConfig {
  int tied_layers = 2;
  Task task = Task::kJoint;
  int trigger_depth = 4;
  int speaker_baseline_depth = 2;
  int hidden_units = 256;
  int input_dim = static_cast<int>(kFeatureDim);
  int phone_vocab = 53;  // last id is the CTC blank
  int num_speakers = 1;
  int embedding_dim = 128;
  int attn_hidden = 256;
  std::uint64_t init_seed = 0;
  // Optional index -> speaker id map for the classifier rows.
  std::vector<std::string> speaker_labels;

  int blank_id() const { return phone_vocab - 1; }
  bool has_trigger_branch() const { return task != Task::kSpeaker; }
  bool has_speaker_branch() const { return task != Task::kTrigger; }
  int trigger_untied_layers() const;
  int speaker_untied_layers() const;

  // Throws ConfigError on an inconsistent configuration.
  void validate() const;

  Json to_json() const;
  static ModelConfig from_json(const Json& j);
};

// Which of the three disjoint parameter groups a parameter belongs to.
enum class ParamGroup { kTied, kTrigger, kSpeaker };
ParamGroup param_group(const std::string& name);

enum Branches : unsigned { kTriggerBranch = 1u, kSpeakerBranch = 2u, kBothBranches = 3u };

struct AttentionResult {
  Var pooled;  // 1 x D, e = sum_t alpha_t h_t
  Var alphas;  // 1 x T
  Var scores;  // T x 1
};

// alpha = softmax over time of `scores` (T x 1), pooled = alpha * h.
AttentionResult pool_with_scores(Var h, Var scores);

// s_t = w2 . tanh(W1 h_t + b1) + b2, then pool_with_scores.
AttentionResult attention_pool(Var h, Var w1, Var b1, Var w2, Var b2);

// T x 2H -> T x V log-probabilities.
Var phonetic_head(Var h, Var w, Var b);

struct SpeakerHeadResult {
  Var embedding;  // 1 x E
  Var logits;     // 1 x num_speakers
};
SpeakerHeadResult speaker_head(Var pooled, Var proj_w, Var proj_b, Var cls_w, Var cls_b);

struct JointOutputs {
  Var shared;            // output of the tied stack (the input when untied)
  Var trigger_features;  // activations consumed by the phonetic head
  Var speaker_features;  // activations consumed by attention pooling
  Var phone_logprobs;    // T' x V
  Var alphas;
  Var embedding;         // 1 x E
  Var speaker_logits;    // 1 x num_speakers
};

struct InferenceOutputs {
  Tensor phone_logprobs;
  std::vector<double> embedding;
  std::vector<double> speaker_logits;
};

class JointModel {
 public:
  // Fresh model initialised from config.init_seed: Glorot-uniform weight
  // matrices, zero biases, +1 on the LSTM forget-gate bias.
  explicit JointModel(ModelConfig config);
  // Model over existing parameters; names and shapes must match the layout
  // implied by `config`.
  JointModel(ModelConfig config, ParameterSet params);

  const ModelConfig& config() const { return config_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  std::size_t num_parameters() const { return params_.scalar_count(); }

  static std::size_t parameter_count(const ModelConfig& config);

  // Parameter leaves on `tape`, in parameters() order. The model must
  // outlive the tape.
  std::vector<Var> bind(Tape& tape) const;

  JointOutputs forward(Tape& tape, Var x, const std::vector<Var>& bound,
                       unsigned branches = kBothBranches) const;

  InferenceOutputs infer(const FeatureSequence& x, unsigned branches = kBothBranches) const;

 private:
  static std::vector<std::pair<std::string, Shape>> layout(const ModelConfig& config);
  Var param(const std::vector<Var>& bound, const std::string& name) const;
  std::vector<BiLstmLayer> layers(const std::vector<Var>& bound, const std::string& group,
                                  int count) const;

  ModelConfig config_;
  ParameterSet params_;
};

}  // namespace mtl

#endif  // MTL_MODEL_H_
