#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "stancepipe/errors.hpp"
#include "stancepipe/log.hpp"
#include "stancepipe/pipeline.hpp"
#include "stancepipe/synthgen.hpp"

namespace fs = std::filesystem;
using namespace stancepipe;

namespace {

enum Exit { ok = 0, failure = 1, config_error = 2, precondition_error = 3, io_error = 4 };

struct Globals {
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::string log_level = "info";
};

PipelineConfig resolve(const Globals& g) {
  if (g.config.empty()) throw ConfigError({"--config is required"});
  auto doc_path = fs::path(g.config);
  PipelineConfig c = load_config(doc_path);
  if (!g.output.empty()) c.paths.output = g.output;
  if (g.seed) c.override_seed(*g.seed);
  return c;
}

void run(const Globals& g, const std::vector<Stage>& stages) {
  const auto config = resolve(g);
  OutputLock lock(config.paths.output);
  for (auto s : stages) {
    auto summary = run_stage(s, config);
    write_manifest(config, {summary});
  }
}

int synth(const Globals& g, std::size_t users, double bots, double outliers) {
  if (g.output.empty()) throw ConfigError({"--output is required for synth"});
  SynthSpec spec;
  spec.n_users = users;
  spec.bot_fraction = bots;
  spec.outlier_fraction = outliers;
  if (g.seed) spec.seed = *g.seed;
  const auto corpus = generate(spec);
  const fs::path dir = g.output;
  const auto files = write_corpus(corpus, dir);
  std::ofstream cfg(dir / "pipeline.json");
  if (!cfg) throw IoError("cannot write '" + (dir / "pipeline.json").string() + "'");
  cfg << corpus_config(corpus.topic).dump(2) << '\n';
  log::info("wrote " + std::to_string(files.size() + 1) + " files to " + dir.string());
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Referendum stance pipeline: filtering, demographics, polarity and reports"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Pipeline config file (JSON)");
  app.add_option("--output", g.output, "Output directory (overrides paths.output)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed overriding every seed in the config");
  app.add_option("--log-level", g.log_level, "debug, info, warn, error or off");

  struct Sub {
    const char* name;
    const char* help;
    Stage stage;
  };
  const Sub stages[] = {
      {"ingest", "Load users and topic-matching tweets", Stage::ingest},
      {"filter", "Remove outlier and bot accounts", Stage::filter},
      {"sample", "Sample analysis users uniformly", Stage::sample},
      {"demographics", "Extract gender, age, ethnicity and location", Stage::demographics},
      {"embed", "Train word embeddings on human tweets", Stage::train_embedding},
      {"train", "Train relevance and polarity predictors", Stage::train_predictors},
      {"classify", "Classify tweets and aggregate user polarity", Stage::classify},
      {"report", "Emit aggregate report tables", Stage::report},
  };
  std::optional<Stage> chosen;
  for (const auto& s : stages) {
    auto* sub = app.add_subcommand(s.name, s.help);
    sub->callback([&chosen, stage = s.stage] { chosen = stage; });
  }

  bool run_all = false;
  auto* run_cmd = app.add_subcommand("run", "Run several stages");
  std::string what;
  run_cmd->add_option("what", what, "Only 'all' is supported")->required()->check(CLI::IsMember({"all"}));
  run_cmd->callback([&] { run_all = true; });

  bool do_synth = false;
  std::size_t n_users = 1000;
  double bot_fraction = 0.3, outlier_fraction = 0.12;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus with ground truth");
  synth_cmd->add_option("--users", n_users, "Number of users")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--bot-fraction", bot_fraction, "Share of bot accounts");
  synth_cmd->add_option("--outlier-fraction", outlier_fraction, "Share of outlier accounts");
  synth_cmd->callback([&] { do_synth = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }
  if (*seed_opt) g.seed = seed;

  try {
    log::set_level(log::parse_level(g.log_level));
    if (do_synth) return synth(g, n_users, bot_fraction, outlier_fraction);
    if (run_all) {
      const auto config = resolve(g);
      run(g, all_stages(config));
    } else if (chosen) {
      run(g, {*chosen});
    }
    return ok;
  } catch (const ConfigError& e) {
    log::error(e.what());
    return config_error;
  } catch (const PreconditionError& e) {
    log::error(e.what());
    return precondition_error;
  } catch (const ValidationError& e) {
    log::error(e.what());
    return precondition_error;
  } catch (const IoError& e) {
    log::error(e.what());
    return io_error;
  } catch (const ParseError& e) {
    log::error(e.what());
    return io_error;
  } catch (const std::exception& e) {
    log::error(e.what());
    return failure;
  }
}
