// mtl/tests/test_cli.cc

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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <doctest.h>

#include "mtl/checkpoint.h"
#include "mtl/cli.h"
#include "mtl/errors.h"
#include "mtl/io.h"
#include "mtl/metrics.h"
#include "test_support.h"

using namespace mtl;
using mtl::testing::small_corpus_spec;
using mtl::testing::snapshot;
using mtl::testing::TempDir;
namespace fs = std::filesystem;

namespace {

RunConfig small_run(const fs::path& root, std::uint64_t seed = 3) {
  RunConfig c;
  c.seed = seed;
  c.corpus = root / "corpus";
  c.corpus_spec = small_corpus_spec(seed);
  c.checkpoint_dir = root / "ckpt";
  c.reports = root / "reports";
  c.hidden_units = 4;
  c.attn_hidden = 4;
  c.embedding_dim = 8;
  c.epochs = 2;
  c.batch_size = 8;
  c.adam.lr = 0.01;
  return c;
}

struct LossRow {
  int epoch;
  double vt, spk, mtl;
};

std::vector<LossRow> read_loss_log(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "# schema_version: 1");
  std::getline(in, line);
  REQUIRE(line == "epoch,C_vt,C_spk,C_mtl");
  std::vector<LossRow> rows;
  while (std::getline(in, line)) {
    LossRow r{};
    char c;
    std::istringstream s(line);
    s >> r.epoch >> c >> r.vt >> c >> r.spk >> c >> r.mtl;
    rows.push_back(r);
  }
  return rows;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MTL_CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t csv_rows(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++n;
  return n - 1;  // header
}

}  // namespace

TEST_CASE("gen refuses to overwrite without force") {
  TempDir dir("cli_gen");
  std::ostringstream log;
  RunConfig c = small_run(dir.path());
  cmd_gen(c, log);
  CHECK_THROWS_AS(cmd_gen(c, log), ConfigError);
  c.force = true;
  CHECK_NOTHROW(cmd_gen(c, log));
  // Never wipe a directory that is not a generated corpus.
  fs::create_directories(dir / "other");
  write_text_file(dir / "other" / "keep.txt", "x");
  c.corpus = dir / "other";
  CHECK_THROWS_AS(cmd_gen(c, log), ConfigError);
  CHECK(fs::exists(dir / "other" / "keep.txt"));
}

TEST_CASE("train, evaluate and score on a small corpus") {
  TempDir dir("cli_pipeline");
  std::ostringstream log;
  RunConfig c = small_run(dir.path());
  c.epochs = 5;
  cmd_gen(c, log);
  cmd_train(c, log);

  SUBCASE("loss log rows satisfy C_mtl = C_vt + C_spk and decrease") {
    const auto rows = read_loss_log(c.checkpoint_dir / "loss.csv");
    REQUIRE(rows.size() == 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].epoch == static_cast<int>(i) + 1);
      CHECK(rows[i].mtl == doctest::Approx(rows[i].vt + rows[i].spk).epsilon(1e-12));
    }
    CHECK(rows.back().mtl < rows.front().mtl);
  }

  SUBCASE("per-epoch checkpoints and retrain refusal") {
    for (int e = 0; e <= 5; ++e) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.mtlc", e);
      CHECK(fs::exists(c.checkpoint_dir / name));
    }
    CHECK(snapshot(c.checkpoint_dir)["last.mtlc"] == snapshot(c.checkpoint_dir)["epoch_005.mtlc"]);
    CHECK_THROWS_AS(cmd_train(c, log), ConfigError);
  }

  SUBCASE("trigger evaluation writes a DET curve and summary") {
    cmd_eval_trigger(c, log);
    const ReportLayout r{c.reports};
    const Json s = Json::parse(read_text_file(r.trigger_summary()));
    CHECK(s.at("schema_version") == kReportSchemaVersion);
    CHECK(csv_rows(r.trigger_det()) == s.at("det_points").get<std::size_t>());
    CHECK(s.at("num_targets") == c.corpus_spec.trigger_positives);
    CHECK(s.at("num_nontargets") == c.corpus_spec.trigger_negatives);
    CHECK(s.at("negative_audio_hours").get<double>() > 0.0);
    const double fr = s.at("fr_at_zero_fa").get<double>();
    CHECK((fr >= 0.0 && fr <= 1.0));
    CHECK(csv_rows(r.trigger_scores()) ==
          static_cast<std::size_t>(c.corpus_spec.trigger_positives + c.corpus_spec.trigger_negatives));
  }

  SUBCASE("speaker evaluation reports three EERs and a relative improvement") {
    cmd_eval_speaker(c, log);
    const ReportLayout r{c.reports};
    const Json rep = Json::parse(read_text_file(r.speaker_report()));
    for (const char* k : {"trigger", "full", "payload"}) {
      REQUIRE(rep.at("eer").contains(k));
      const double e = rep.at("eer").at(k).get<double>();
      CHECK((e >= 0.0 && e <= 1.0));
      CHECK(fs::exists(r.profiles(segment_kind_from_string(k))));
    }
    Json base = rep;
    base["eer"]["payload"] = 0.5;
    base["eer"]["trigger"] = 0.5;
    base["eer"]["full"] = 0.5;
    write_text_file(dir / "base.json", base.dump());
    RunConfig c2 = c;
    c2.reports = dir / "reports2";
    c2.baseline_report = dir / "base.json";
    cmd_eval_speaker(c2, log);
    const Json rep2 = Json::parse(read_text_file(ReportLayout{c2.reports}.speaker_report()));
    CHECK(rep2.at("relative_improvement").at("payload").get<double>() ==
          doctest::Approx(relative_improvement(0.5, rep.at("eer").at("payload").get<double>())));
  }

  SUBCASE("score emits both branch outputs") {
    std::ostringstream out;
    RunConfig sc = c;
    const Manifest test = read_manifest(CorpusLayout{c.corpus}.test());
    sc.input = resolve(c.corpus, test.front().feature_path);
    cmd_score(sc, out);
    const Json j = Json::parse(out.str());
    CHECK(j.at("embedding").size() == 8);
    CHECK(j.at("trigger").at("phrase") == c.corpus_spec.phrase.phones);
    CHECK(j.contains("closest_training_speaker"));
    CHECK(j.at("frames").get<std::size_t>() > 0);
  }
}

TEST_CASE("same seed, same bytes") {
  TempDir a("cli_seed_a"), b("cli_seed_b");
  std::ostringstream log;
  for (const TempDir* d : {&a, &b}) {
    const RunConfig c = small_run(d->path(), 11);
    cmd_gen(c, log);
    cmd_train(c, log);
  }
  CHECK(snapshot(a / "corpus") == snapshot(b / "corpus"));
  CHECK(snapshot(a / "ckpt") == snapshot(b / "ckpt"));
}

TEST_CASE("four tied layers use fewer parameters than two") {
  TempDir dir("cli_tied");
  std::ostringstream log;
  RunConfig c = small_run(dir.path());
  c.epochs = 0;
  cmd_gen(c, log);
  std::size_t counts[2];
  int k = 0;
  for (int tied : {4, 2}) {
    c.tied = tied;
    c.checkpoint_dir = dir / ("tied" + std::to_string(tied));
    cmd_train(c, log);
    counts[k++] = load_checkpoint(c.checkpoint_dir / "last.mtlc").num_parameters();
  }
  CHECK(counts[0] < counts[1]);
}

TEST_CASE("single-task baselines train through the same command") {
  TempDir dir("cli_baseline");
  std::ostringstream log;
  RunConfig c = small_run(dir.path());
  c.epochs = 1;
  c.tied = 0;
  cmd_gen(c, log);
  for (Task t : {Task::kTrigger, Task::kSpeaker}) {
    c.task = t;
    c.checkpoint_dir = dir / to_string(t);
    cmd_train(c, log);
    const JointModel m = load_checkpoint(c.checkpoint_dir / "last.mtlc");
    CHECK(m.config().task == t);
  }
  c.task = Task::kTrigger;
  c.checkpoint_dir = dir / "trigger";
  CHECK_THROWS_AS(cmd_eval_speaker(c, log), ConfigError);
  const auto rows = read_loss_log(c.checkpoint_dir / "loss.csv");
  CHECK(rows.front().spk == 0.0);
}

TEST_CASE("checkpoint round trip is exact and corruption is detected") {
  TempDir dir("ckpt");
  ModelConfig mc;
  mc.hidden_units = 3;
  mc.attn_hidden = 3;
  mc.phone_vocab = 5;
  mc.num_speakers = 2;
  mc.speaker_labels = {"a", "b"};
  mc.init_seed = 9;
  const JointModel m(mc);
  save_checkpoint(dir / "m.mtlc", m);
  const JointModel r = load_checkpoint(dir / "m.mtlc");
  CHECK(r.config().to_json() == m.config().to_json());
  REQUIRE(r.parameters().size() == m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    CHECK(r.parameters().names()[i] == m.parameters().names()[i]);
    CHECK(r.parameters().at(i) == m.parameters().at(i));
  }
  std::string bytes = snapshot(dir.path())["m.mtlc"];
  write_text_file(dir / "trunc.mtlc", bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(dir / "trunc.mtlc"), DataError);
  bytes[0] = 'X';
  write_text_file(dir / "magic.mtlc", bytes);
  CHECK_THROWS_AS(load_checkpoint(dir / "magic.mtlc"), DataError);
  CHECK_THROWS_AS(load_checkpoint(dir / "absent.mtlc"), DataError);
}

TEST_CASE("relative improvement across speaker reports") {
  const Json base = {{"eer", {{"trigger", 0.0245}, {"full", 0.0213}, {"payload", 0.0801}}}};
  const Json cur = {{"eer", {{"trigger", 0.0225}, {"full", 0.0198}, {"payload", 0.0740}}}};
  const Json r = relative_improvements(base, cur);
  CHECK(std::round(r.at("payload").get<double>() * 10.0) / 10.0 == 7.6);
  CHECK(std::round(r.at("trigger").get<double>() * 10.0) / 10.0 == 8.2);
  CHECK_THROWS_AS(relative_improvements(Json::object(), cur), DataError);
}

TEST_CASE("config parsing") {
  CHECK_THROWS_AS(RunConfig::from_json(Json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(Json{{"tied", 1}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(Json{{"epochs", "many"}}), ConfigError);
  CHECK_THROWS_AS(RunConfig::from_json(Json::array()), ConfigError);
  const RunConfig c = RunConfig::from_json(Json{{"seed", 5}, {"num_speakers", 7}, {"lr", 0.5}});
  CHECK(c.corpus_spec.seed == 5);
  CHECK(c.corpus_spec.num_speakers == 7);
  CHECK(c.adam.lr == 0.5);
  CHECK(RunConfig::from_json(c.to_json()).to_json() == c.to_json());

  TempDir dir("cfg");
  write_text_file(dir / "c.json", R"({"seed": 4, "epochs": 3})");
  const Json merged = load_config_json(dir / "c.json", Json{{"seed", 8}});
  CHECK(merged.at("seed") == 8);
  CHECK(merged.at("epochs") == 3);
  write_text_file(dir / "bad.json", "{");
  CHECK_THROWS_AS(load_config_json(dir / "bad.json", Json::object()), ConfigError);
  CHECK_THROWS_AS(load_config_json(dir / "none.json", Json::object()), ConfigError);
}

TEST_CASE("exception to exit code mapping") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DataError("x")) == 3);
  CHECK(exit_code_for(InfeasibleAlignment("x")) == 3);
  CHECK(exit_code_for(NumericalError("x")) == 4);
  CHECK(exit_code_for(DomainError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("process exit codes") {
  TempDir dir("cli_exit");
  const std::string corpus = (dir / "corpus").string();
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("gen --no-such-flag") == 2);
  CHECK(run_cli("train --tied 1") == 2);
  CHECK(run_cli("train --corpus " + (dir / "missing").string() + " --checkpoint-dir " +
                (dir / "ck").string()) == 3);
  write_text_file(dir / "cfg.json", R"({"num_speakers": 3, "num_phonetic": 10, "eval_speakers": 2,
    "tests_per_speaker": 1, "cohort_speakers": 2, "cohort_utterances": 1,
    "trigger_positives": 2, "trigger_negatives": 2, "utterances_per_speaker": 1})");
  CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --corpus " + corpus) == 0);
  CHECK(run_cli("gen --config " + (dir / "cfg.json").string() + " --corpus " + corpus) == 2);
  write_text_file(dir / "bad.json", R"({"unknown_key": true})");
  CHECK(run_cli("gen --config " + (dir / "bad.json").string() + " --corpus " + corpus) == 2);
  CHECK(run_cli("score --corpus " + corpus) == 2);
}
