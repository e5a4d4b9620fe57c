// mtl/tools/mtlspeech.cc

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

// Usage:
//   mtlspeech gen          [--config FILE] [--seed N] [--corpus DIR] [--force]
//   mtlspeech train        [--tied {0,2,3,4}] [--task {trigger,speaker,joint}] ...
//   mtlspeech eval-trigger [--checkpoint FILE] [--reports DIR]
//   mtlspeech eval-speaker [--checkpoint FILE] [--baseline REPORT]
//   mtlspeech score        --input FILE.{wav,mtlf} [--output FILE]
// Command-line flags take precedence over the --config file.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mtl/cli.h"

namespace {

struct Flags {
  std::optional<std::string> config;
  mtl::Json overrides = mtl::Json::object();
};

// Registers an option whose value, when given, overrides the config key.
template <typename T>
void opt(CLI::App* app, Flags& flags, const std::string& name, const std::string& key,
         const std::string& help) {
  app->add_option_function<T>(name, [&flags, key](const T& v) { flags.overrides[key] = v; }, help);
}

void common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "flat JSON config file");
  opt<std::uint64_t>(app, f, "--seed", "seed", "random seed");
  opt<std::string>(app, f, "--corpus", "corpus", "corpus directory");
  opt<int>(app, f, "--threads", "threads", "worker threads");
  app->add_flag_callback("--force", [&f] { f.overrides["force"] = true; },
                         "overwrite existing outputs");
}

void model_flags(CLI::App* app, Flags& f) {
  app->add_option_function<int>(
         "--tied", [&f](const int& v) { f.overrides["tied"] = v; },
         "tied biLSTM layers (0 = single-task baseline)")
      ->check(CLI::IsMember({0, 2, 3, 4}));
  app->add_option_function<std::string>(
         "--task", [&f](const std::string& v) { f.overrides["task"] = v; }, "task")
      ->check(CLI::IsMember({"trigger", "speaker", "joint"}));
  opt<int>(app, f, "--hidden", "hidden_units", "biLSTM units per direction");
  opt<int>(app, f, "--epochs", "epochs", "training epochs");
  opt<int>(app, f, "--batch-size", "batch_size", "utterances per mini-batch");
  opt<double>(app, f, "--lr", "lr", "Adam learning rate");
  opt<std::string>(app, f, "--checkpoint-dir", "checkpoint_dir", "checkpoint directory");
}

void eval_flags(CLI::App* app, Flags& f) {
  opt<std::string>(app, f, "--checkpoint-dir", "checkpoint_dir", "checkpoint directory");
  opt<std::string>(app, f, "--checkpoint", "checkpoint", "checkpoint file");
  opt<std::string>(app, f, "--reports", "reports", "report directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint voice-trigger detection and speaker verification toolkit"};
  app.require_subcommand(1);
  Flags f;

  auto* gen = app.add_subcommand("gen", "generate the synthetic corpus");
  common(gen, f);
  auto* train = app.add_subcommand("train", "train a joint or baseline model");
  common(train, f);
  model_flags(train, f);
  auto* evt = app.add_subcommand("eval-trigger", "DET curve for trigger detection");
  common(evt, f);
  eval_flags(evt, f);
  auto* evs = app.add_subcommand("eval-speaker", "EER per segment kind for verification");
  common(evs, f);
  eval_flags(evs, f);
  opt<std::string>(evs, f, "--baseline", "baseline_report", "baseline speaker report");
  auto* score = app.add_subcommand("score", "both branch outputs for one utterance");
  common(score, f);
  opt<std::string>(score, f, "--checkpoint", "checkpoint", "checkpoint file");
  opt<std::string>(score, f, "--input", "input", ".wav or .mtlf input");
  opt<std::string>(score, f, "--output", "output", "output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const mtl::RunConfig cfg = mtl::RunConfig::from_json(
        mtl::load_config_json(f.config ? std::optional<std::filesystem::path>(*f.config)
                                       : std::nullopt,
                              f.overrides));
    if (gen->parsed()) mtl::cmd_gen(cfg, std::cout);
    else if (train->parsed()) mtl::cmd_train(cfg, std::cout);
    else if (evt->parsed()) mtl::cmd_eval_trigger(cfg, std::cout);
    else if (evs->parsed()) mtl::cmd_eval_speaker(cfg, std::cout);
    else if (score->parsed()) mtl::cmd_score(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "mtlspeech: " << e.what() << "\n";
    return mtl::exit_code_for(e);
  }
  return 0;
}
