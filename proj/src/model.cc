// mtl/model.cc

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

#include "mtl/model.h"

#include <cmath>
#include <random>

#include "mtl/errors.h"
#include "mtl/ops.h"

namespace mtl {

std::string to_string(Task task) {
  switch (task) {
    case Task::kTrigger: return "trigger";
    case Task::kSpeaker: return "speaker";
    case Task::kJoint: return "joint";
  }
  return "joint";
}

Task task_from_string(const std::string& name) {
  if (name == "trigger") return Task::kTrigger;
  if (name == "speaker") return Task::kSpeaker;
  if (name == "joint") return Task::kJoint;
  throw ConfigError("unknown task '" + name + "' (expected trigger, speaker or joint)");
}

int ModelConfig::trigger_untied_layers() const {
  if (!has_trigger_branch()) return 0;
  return trigger_depth - tied_layers;
}

int ModelConfig::speaker_untied_layers() const {
  if (!has_speaker_branch()) return 0;
  if (task == Task::kSpeaker) return speaker_baseline_depth;
  return trigger_depth - tied_layers;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (task == Task::kJoint) {
    if (tied_layers < 2 || tied_layers > trigger_depth)
      fail("joint models tie between 2 and " + std::to_string(trigger_depth) +
           " layers, got " + std::to_string(tied_layers));
  } else if (tied_layers != 0) {
    fail("single-task baselines must have tied_layers == 0");
  }
  if (trigger_depth < 1) fail("trigger_depth must be >= 1");
  if (speaker_baseline_depth < 1) fail("speaker_baseline_depth must be >= 1");
  if (hidden_units < 1 || input_dim < 1 || embedding_dim < 1 || attn_hidden < 1)
    fail("layer sizes must be positive");
  if (phone_vocab < 2) fail("phone_vocab must include at least one phone and the blank");
  if (num_speakers < 1) fail("num_speakers must be >= 1");
  if (!speaker_labels.empty() && static_cast<int>(speaker_labels.size()) != num_speakers)
    fail("speaker_labels has " + std::to_string(speaker_labels.size()) +
         " entries but num_speakers is " + std::to_string(num_speakers));
}

Json ModelConfig::to_json() const {
  Json j;
  j["tied_layers"] = tied_layers;
  j["task"] = to_string(task);
  j["trigger_depth"] = trigger_depth;
  j["speaker_baseline_depth"] = speaker_baseline_depth;
  j["hidden_units"] = hidden_units;
  j["input_dim"] = input_dim;
  j["phone_vocab"] = phone_vocab;
  j["num_speakers"] = num_speakers;
  j["embedding_dim"] = embedding_dim;
  j["attn_hidden"] = attn_hidden;
  j["init_seed"] = init_seed;
  j["speaker_labels"] = speaker_labels;
  return j;
}

ModelConfig ModelConfig::from_json(const Json& j) {
  ModelConfig c;
  try {
    c.tied_layers = j.value("tied_layers", c.tied_layers);
    c.task = task_from_string(j.value("task", to_string(c.task)));
    c.trigger_depth = j.value("trigger_depth", c.trigger_depth);
    c.speaker_baseline_depth = j.value("speaker_baseline_depth", c.speaker_baseline_depth);
    c.hidden_units = j.value("hidden_units", c.hidden_units);
    c.input_dim = j.value("input_dim", c.input_dim);
    c.phone_vocab = j.value("phone_vocab", c.phone_vocab);
    c.num_speakers = j.value("num_speakers", c.num_speakers);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.attn_hidden = j.value("attn_hidden", c.attn_hidden);
    c.init_seed = j.value("init_seed", c.init_seed);
    c.speaker_labels = j.value("speaker_labels", c.speaker_labels);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

ParamGroup param_group(const std::string& name) {
  if (name.rfind("tied.", 0) == 0) return ParamGroup::kTied;
  if (name.rfind("vt.", 0) == 0) return ParamGroup::kTrigger;
  if (name.rfind("spk.", 0) == 0) return ParamGroup::kSpeaker;
  throw Error("parameter " + name + " belongs to no group");
}

AttentionResult pool_with_scores(Var h, Var scores) {
  if (scores.value().size() != h.value().rows())
    throw DimensionError("attention needs one score per frame: " +
                         shape_to_string(scores.shape()) + " vs " +
                         shape_to_string(h.shape()));
  Var row = transpose(scores);  // 1 x T
  Var alphas = exp(log_softmax(row));
  return {matmul(alphas, h), alphas, scores};
}

AttentionResult attention_pool(Var h, Var w1, Var b1, Var w2, Var b2) {
  Var hidden = tanh(affine(h, w1, b1));
  return pool_with_scores(h, affine(hidden, w2, b2));
}

Var phonetic_head(Var h, Var w, Var b) { return log_softmax(affine(h, w, b)); }

SpeakerHeadResult speaker_head(Var pooled, Var proj_w, Var proj_b, Var cls_w, Var cls_b) {
  Var embedding = affine(pooled, proj_w, proj_b);
  return {embedding, affine(embedding, cls_w, cls_b)};
}

namespace {

void add_lstm_layout(std::vector<std::pair<std::string, Shape>>& out,
                     const std::string& prefix, std::size_t in, std::size_t hidden) {
  for (const char* dir : {".fw", ".bw"}) {
    out.push_back({prefix + dir + ".w", {in, 4 * hidden}});
    out.push_back({prefix + dir + ".u", {hidden, 4 * hidden}});
    out.push_back({prefix + dir + ".b", {4 * hidden}});
  }
}

bool is_bias(const std::string& name) {
  return name.size() >= 2 && (name.compare(name.size() - 2, 2, ".b") == 0 ||
                              name.compare(name.size() - 3, 3, ".b1") == 0 ||
                              name.compare(name.size() - 3, 3, ".b2") == 0);
}

bool is_lstm_bias(const std::string& name) {
  return name.size() > 5 && (name.compare(name.size() - 5, 5, ".fw.b") == 0 ||
                             name.compare(name.size() - 5, 5, ".bw.b") == 0);
}

}  // namespace

std::vector<std::pair<std::string, Shape>> JointModel::layout(const ModelConfig& c) {
  c.validate();
  const auto H = static_cast<std::size_t>(c.hidden_units);
  const auto in = static_cast<std::size_t>(c.input_dim);
  std::vector<std::pair<std::string, Shape>> out;
  for (int l = 0; l < c.tied_layers; ++l)
    add_lstm_layout(out, "tied.l" + std::to_string(l), l == 0 ? in : 2 * H, H);
  const std::size_t branch_in = c.tied_layers == 0 ? in : 2 * H;
  if (c.has_trigger_branch()) {
    for (int l = 0; l < c.trigger_untied_layers(); ++l)
      add_lstm_layout(out, "vt.l" + std::to_string(l), l == 0 ? branch_in : 2 * H, H);
    out.push_back({"vt.out.w", {2 * H, static_cast<std::size_t>(c.phone_vocab)}});
    out.push_back({"vt.out.b", {static_cast<std::size_t>(c.phone_vocab)}});
  }
  if (c.has_speaker_branch()) {
    const auto A = static_cast<std::size_t>(c.attn_hidden);
    const auto E = static_cast<std::size_t>(c.embedding_dim);
    const auto S = static_cast<std::size_t>(c.num_speakers);
    for (int l = 0; l < c.speaker_untied_layers(); ++l)
      add_lstm_layout(out, "spk.l" + std::to_string(l), l == 0 ? branch_in : 2 * H, H);
    out.push_back({"spk.attn.w1", {2 * H, A}});
    out.push_back({"spk.attn.b1", {A}});
    out.push_back({"spk.attn.w2", {A, 1}});
    out.push_back({"spk.attn.b2", {1}});
    out.push_back({"spk.proj.w", {2 * H, E}});
    out.push_back({"spk.proj.b", {E}});
    out.push_back({"spk.cls.w", {E, S}});
    out.push_back({"spk.cls.b", {S}});
  }
  return out;
}

std::size_t JointModel::parameter_count(const ModelConfig& config) {
  std::size_t n = 0;
  for (const auto& [name, shape] : layout(config)) n += shape_size(shape);
  return n;
}

JointModel::JointModel(ModelConfig config) : config_(std::move(config)) {
  std::mt19937_64 rng(config_.init_seed);
  const std::size_t H = static_cast<std::size_t>(config_.hidden_units);
  for (auto& [name, shape] : layout(config_)) {
    Tensor t(shape, 0.0);
    if (is_bias(name)) {
      if (is_lstm_bias(name))
        for (std::size_t k = H; k < 2 * H; ++k) t[k] = 1.0;
    } else {
      const double fan_in = static_cast<double>(shape[0]);
      const double fan_out = static_cast<double>(shape[1]);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      const double r = std::sqrt(6.0 / (fan_in + fan_out));
      for (double& v : t.values()) v = r * dist(rng);
    }
    params_.add(name, std::move(t));
  }
}

JointModel::JointModel(ModelConfig config, ParameterSet params)
    : config_(std::move(config)), params_(std::move(params)) {
  const auto expected = layout(config_);
  if (expected.size() != params_.size())
    throw DataError("model expects " + std::to_string(expected.size()) +
                    " parameter tensors, got " + std::to_string(params_.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& [name, shape] = expected[i];
    if (params_.names()[i] != name)
      throw DataError("parameter " + std::to_string(i) + " is '" + params_.names()[i] +
                      "', expected '" + name + "'");
    if (params_.at(i).shape() != shape)
      throw DataError("parameter " + name + " has shape " +
                      shape_to_string(params_.at(i).shape()) + ", expected " +
                      shape_to_string(shape));
  }
}

std::vector<Var> JointModel::bind(Tape& tape) const {
  std::vector<Var> vars;
  vars.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) vars.push_back(tape.parameter(params_.at(i)));
  return vars;
}

Var JointModel::param(const std::vector<Var>& bound, const std::string& name) const {
  return bound.at(params_.index_of(name));
}

std::vector<BiLstmLayer> JointModel::layers(const std::vector<Var>& bound,
                                            const std::string& group, int count) const {
  std::vector<BiLstmLayer> out;
  for (int l = 0; l < count; ++l) {
    const std::string p = group + ".l" + std::to_string(l);
    out.push_back({{param(bound, p + ".fw.w"), param(bound, p + ".fw.u"), param(bound, p + ".fw.b")},
                   {param(bound, p + ".bw.w"), param(bound, p + ".bw.u"), param(bound, p + ".bw.b")}});
  }
  return out;
}

JointOutputs JointModel::forward(Tape& tape, Var x, const std::vector<Var>& bound,
                                 unsigned branches) const {
  if (x.tape() != &tape) throw Error("input recorded on a different tape");
  if (bound.size() != params_.size()) throw Error("bound parameter list does not match model");
  if (x.value().empty()) throw DataError("joint_forward: empty input sequence");
  if (x.value().rank() != 2 || x.value().cols() != static_cast<std::size_t>(config_.input_dim))
    throw DimensionError("joint_forward: expected T x " + std::to_string(config_.input_dim) +
                         " features, got " + shape_to_string(x.shape()));

  JointOutputs out;
  const auto tied = layers(bound, "tied", config_.tied_layers);
  out.shared = bilstm_stack_forward(x, tied);

  if ((branches & kTriggerBranch) && config_.has_trigger_branch()) {
    const auto own = layers(bound, "vt", config_.trigger_untied_layers());
    out.trigger_features = bilstm_stack_forward(out.shared, own);
    out.phone_logprobs = phonetic_head(out.trigger_features, param(bound, "vt.out.w"),
                                       param(bound, "vt.out.b"));
  }
  if ((branches & kSpeakerBranch) && config_.has_speaker_branch()) {
    const auto own = layers(bound, "spk", config_.speaker_untied_layers());
    out.speaker_features = bilstm_stack_forward(out.shared, own);
    AttentionResult att = attention_pool(out.speaker_features, param(bound, "spk.attn.w1"),
                                         param(bound, "spk.attn.b1"),
                                         param(bound, "spk.attn.w2"),
                                         param(bound, "spk.attn.b2"));
    out.alphas = att.alphas;
    SpeakerHeadResult head =
        speaker_head(att.pooled, param(bound, "spk.proj.w"), param(bound, "spk.proj.b"),
                     param(bound, "spk.cls.w"), param(bound, "spk.cls.b"));
    out.embedding = head.embedding;
    out.speaker_logits = head.logits;
  }
  return out;
}

InferenceOutputs JointModel::infer(const FeatureSequence& x, unsigned branches) const {
  Tape tape;
  const auto bound = bind(tape);
  Var input = tape.constant(x.frames);
  JointOutputs o = forward(tape, input, bound, branches);
  InferenceOutputs r;
  if (o.phone_logprobs.valid()) r.phone_logprobs = o.phone_logprobs.value();
  if (o.embedding.valid()) {
    r.embedding = o.embedding.value().values();
    r.speaker_logits = o.speaker_logits.value().values();
  }
  return r;
}

}  // namespace mtl
