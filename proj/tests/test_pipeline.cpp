#include <doctest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <json.hpp>
#include <numeric>

#include "helpers.hpp"
#include "stancepipe/errors.hpp"
#include "stancepipe/pipeline.hpp"
#include "stancepipe/synthgen.hpp"

using namespace stancepipe;
using nlohmann::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STANCEPIPE_CLI) + " --log-level off " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// A small generated corpus with a config tuned for quick runs.
struct Workspace {
  testing::TempDir dir;
  json config;

  explicit Workspace(std::size_t users = 150) {
    SynthSpec spec;
    spec.n_users = users;
    spec.labeled_positive = 120;
    spec.labeled_negative = 120;
    spec.labeled_neutral = 100;
    spec.labeled_non_relevant = 240;
    spec.labeled_names_per_class = 40;
    const auto corpus = generate(spec);
    write_corpus(corpus, dir.path());
    config = corpus_config(corpus.topic);
    config["embedding"] = {{"dimension", 24}, {"epochs", 3}, {"min_count", 2}};
    config["training"] = {{"k_folds", 3}, {"epochs", 20}, {"relevance_per_class", 240}, {"polarity_per_class", 120}};
    save();
  }
  void save() const { testing::write_file(dir / "pipeline.json", config.dump(2)); }
  std::string flags() const { return "--config " + (dir / "pipeline.json").string(); }
  PipelineConfig load() const { return load_config(dir / "pipeline.json"); }
  Artifacts artifacts() const { return Artifacts(load().paths.output); }
};

std::vector<std::string> violations_of(const json& doc, const std::filesystem::path& base) {
  try {
    parse_config(doc, base);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& what) {
  return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(what) != std::string::npos; });
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  Workspace ws(20);
  const auto c = ws.load();
  CHECK(c.filtering.bot_threshold == 40);
  CHECK(c.filtering.iqr_multiplier == 1.5);
  CHECK(c.training.ratio == 0.8);
  CHECK(c.training.k_folds == 3);
  CHECK(c.report.top_k == 5);
  CHECK(c.embedding.dimension == 24);
  CHECK(c.paths.users == ws.dir / "users.jsonl");
  CHECK(c.reference_time() == c.topic.window_end);
  CHECK_FALSE(c.sampling.size);

  auto copy = c;
  copy.override_seed(99);
  CHECK(copy.embedding.seed == 99);
  CHECK(copy.training.seed == 99);
  CHECK(copy.sampling.seed == 99);

  const auto round = parse_config(to_json(c), "/");
  CHECK(round.paths.users == c.paths.users);
  CHECK(round.embedding.dimension == 24);
}

TEST_CASE("config validation lists every violation") {
  Workspace ws(20);
  auto doc = ws.config;
  doc["filtering"]["bot_threshold"] = -1;
  doc["filtering"]["iqr_multiplier"] = 0;
  doc["training"]["ratio"] = 1.5;
  doc["report"]["top_k"] = 0;
  const auto v = violations_of(doc, ws.dir.path());
  CHECK(v.size() >= 4);
  CHECK(mentions(v, "bot_threshold"));
  CHECK(mentions(v, "iqr_multiplier"));
  CHECK(mentions(v, "ratio"));
  CHECK(mentions(v, "top_k"));

  doc = ws.config;
  doc["filtering"]["bot_treshold"] = 40;
  doc["extras"] = json::object();
  const auto typos = violations_of(doc, ws.dir.path());
  CHECK(mentions(typos, "bot_treshold"));
  CHECK(mentions(typos, "extras"));

  doc = ws.config;
  doc["paths"]["users"] = "nope.jsonl";
  doc["paths"]["gazetteer"] = "nope.csv";
  const auto missing = violations_of(doc, ws.dir.path());
  CHECK(mentions(missing, "nope.jsonl"));
  CHECK(mentions(missing, "nope.csv"));

  doc = ws.config;
  doc["filtering"]["bot_threshold"] = "forty";
  CHECK(mentions(violations_of(doc, ws.dir.path()), "bot_threshold"));
}

TEST_CASE("sample_users") {
  std::vector<std::string> pop(50);
  for (std::size_t i = 0; i < pop.size(); ++i) pop[i] = "u" + std::to_string(i);
  CHECK(sample_users(pop, 50, 1) == pop);
  CHECK(sample_users(pop, 0, 1).empty());
  const auto a = sample_users(pop, 10, 5);
  CHECK(a == sample_users(pop, 10, 5));
  CHECK(a.size() == 10);
  CHECK(std::is_sorted(a.begin(), a.end(), [&](const std::string& x, const std::string& y) {
    return std::stoi(x.substr(1)) < std::stoi(y.substr(1));
  }));
  CHECK_THROWS_AS(sample_users(pop, 51, 1), ValidationError);
}

TEST_CASE("sample_users is uniform") {
  std::vector<std::string> pop(20);
  for (std::size_t i = 0; i < pop.size(); ++i) pop[i] = std::to_string(i);
  std::vector<int> hits(20, 0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t)
    for (const auto& id : sample_users(pop, 5, static_cast<std::uint64_t>(t))) ++hits[std::stoul(id)];
  // Each member is drawn with probability 1/4.
  for (int h : hits) CHECK(std::abs(h - trials / 4) <= 4 * std::sqrt(trials * 0.25 * 0.75));
}

TEST_CASE("stage order") {
  PipelineConfig c;
  const auto plain = all_stages(c);
  CHECK(std::find(plain.begin(), plain.end(), Stage::sample) == plain.end());
  CHECK(plain.front() == Stage::ingest);
  CHECK(plain.back() == Stage::report);
  c.sampling.size = 10;
  const auto sampled = all_stages(c);
  CHECK(sampled.size() == plain.size() + 1);
  CHECK(sampled[2] == Stage::sample);
}

TEST_CASE("output lock") {
  testing::TempDir dir;
  {
    OutputLock lock(dir.path());
    CHECK(std::filesystem::exists(dir / ".lock"));
    CHECK_THROWS_AS(OutputLock(dir.path()), PreconditionError);
  }
  CHECK_FALSE(std::filesystem::exists(dir / ".lock"));
  CHECK_NOTHROW(OutputLock(dir.path()));
}

TEST_CASE("missing upstream artifacts are precondition errors") {
  Workspace ws(30);
  const auto c = ws.load();
  try {
    run_stage(Stage::classify, c);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("train_predictors") != std::string::npos);
  }
  run_stage(Stage::ingest, c);
  run_stage(Stage::filter, c);
  run_stage(Stage::demographics, c);
  try {
    run_stage(Stage::classify, c);
    FAIL("expected a precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find(".model") != std::string::npos);
  }
}

TEST_CASE("stages chain and re-runs are byte-identical") {
  Workspace ws;
  ws.config["sampling"] = {{"size", 40}, {"seed", 3}};
  ws.save();
  const auto c = ws.load();
  const Artifacts art(c.paths.output);
  std::vector<StageSummary> summaries;
  for (auto s : all_stages(c)) summaries.push_back(run_stage(s, c));
  write_manifest(c, summaries);

  const auto verdicts = testing::read_file(art.verdicts());
  const auto demo = testing::read_file(art.demographics());
  const auto users = testing::read_file(art.user_polarity());
  CHECK(read_id_list(art.sample()).size() == 40);
  CHECK(read_user_polarity(art.user_polarity()).size() == 40);

  run_stage(Stage::filter, c);
  run_stage(Stage::demographics, c);
  run_stage(Stage::classify, c);
  CHECK(testing::read_file(art.verdicts()) == verdicts);
  CHECK(testing::read_file(art.demographics()) == demo);
  CHECK(testing::read_file(art.user_polarity()) == users);

  const auto manifest = json::parse(testing::read_file(art.manifest()));
  CHECK(manifest.contains("config"));
  CHECK(manifest.contains("tool_version"));
  const auto& filter = manifest["stages"]["filter"]["counts"];
  const auto count = [&](const char* k) { return filter[k].get<std::size_t>(); };
  CHECK(count("collected") == count("after_outliers") + count("outliers_removed"));
  CHECK(count("after_outliers") == count("after_bots") + count("bots_removed"));
  CHECK(std::filesystem::exists(art.report_dir() / "polarity_distribution.csv"));
}

TEST_CASE("cli exit codes") {
  Workspace ws(30);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("ingest") == 2);
  CHECK(run_cli("--config " + (ws.dir / "absent.json").string() + " ingest") == 4);
  CHECK(run_cli(ws.flags() + " classify") == 3);

  auto bad = ws.config;
  bad["filtering"]["bot_threshold"] = -1;
  testing::write_file(ws.dir / "bad.json", bad.dump());
  CHECK(run_cli("--config " + (ws.dir / "bad.json").string() + " filter") == 2);

  CHECK(run_cli(ws.flags() + " ingest") == 0);
  CHECK(run_cli(ws.flags() + " filter") == 0);
  {
    OutputLock held(ws.load().paths.output);
    CHECK(run_cli(ws.flags() + " filter") == 3);
  }

  testing::write_file(ws.dir / "users.jsonl", "");
  CHECK(run_cli(ws.flags() + " --output " + (ws.dir / "other").string() + " ingest") == 0);

  testing::TempDir synth;
  CHECK(run_cli("--output " + synth.path().string() + " synth --users 25") == 0);
  CHECK(std::filesystem::exists(synth / "pipeline.json"));
  CHECK(std::filesystem::exists(synth / CorpusFiles::truth_users));
  CHECK(run_cli("--output " + synth.path().string() + " synth --users 25 --bot-fraction 2") == 2);
}
