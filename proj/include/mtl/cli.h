// mtl/cli.h

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

#ifndef MTL_CLI_H_
#define MTL_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mtl/adam.h"
#include "mtl/corpus.h"
#include "mtl/io.h"
#include "mtl/model.h"

namespace mtl {

inline constexpr int kReportSchemaVersion = 1;

/// Settings shared by every subcommand. Each field has a default, so an
/// empty config runs the bundled toy setup end to end. Loaded from a flat
/// JSON object; keys are the field names below plus any SyntheticSpec key.
struct RunConfig {
  std::uint64_t seed = 1;
  bool force = false;
  int threads = 1;

  std::filesystem::path corpus = "corpus";
  SyntheticSpec corpus_spec;  // gen only; its seed follows `seed`

  // Model. Desk-scale widths; the full-size network is hidden_units 256,
  // attn_hidden 256.
  int tied = 2;
  Task task = Task::kJoint;
  int hidden_units = 32;
  int attn_hidden = 32;
  int embedding_dim = 128;
  int trigger_depth = 4;
  int speaker_baseline_depth = 2;

  // Optimiser and schedule.
  AdamOptions adam;
  int epochs = 20;
  int batch_size = 128;

  std::filesystem::path checkpoint_dir = "checkpoints";
  std::optional<std::filesystem::path> checkpoint;  // default: checkpoint_dir/last.mtlc
  std::filesystem::path reports = "reports";
  std::optional<std::filesystem::path> baseline_report;
  std::optional<std::filesystem::path> input;   // score
  std::optional<std::filesystem::path> output;  // score; stdout when absent

  std::filesystem::path checkpoint_path() const {
    return checkpoint ? *checkpoint : checkpoint_dir / "last.mtlc";
  }

  // Unknown keys and ill-typed values raise ConfigError.
  static RunConfig from_json(const Json& j);
  Json to_json() const;
};

// Reads a flat JSON config file (ConfigError on malformed input) and lays
// `overrides` on top of it.
Json load_config_json(const std::optional<std::filesystem::path>& file, const Json& overrides);

CorpusSummary cmd_gen(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_eval_trigger(const RunConfig& cfg, std::ostream& log);
void cmd_eval_speaker(const RunConfig& cfg, std::ostream& log);
void cmd_score(const RunConfig& cfg, std::ostream& out);

// Report locations under cfg.reports.
struct ReportLayout {
  std::filesystem::path root;
  std::filesystem::path trigger_det() const { return root / "trigger_det.csv"; }
  std::filesystem::path trigger_summary() const { return root / "trigger_summary.json"; }
  std::filesystem::path trigger_scores() const { return root / "trigger_scores.csv"; }
  std::filesystem::path speaker_report() const { return root / "speaker_eer.json"; }
  std::filesystem::path profiles(SegmentKind k) const {
    return root / ("profiles_" + to_string(k) + ".jsonl");
  }
};

// Percent improvement per segment kind of `current` over `baseline`, both
// speaker reports as written by cmd_eval_speaker.
Json relative_improvements(const Json& baseline, const Json& current);

// Maps an exception to the documented process exit code.
int exit_code_for(const std::exception& e);

}  // namespace mtl

#endif  // MTL_CLI_H_
