#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stancepipe/corpus.hpp"
#include "stancepipe/embedding.hpp"
#include "stancepipe/filtering.hpp"
#include "stancepipe/report.hpp"
#include "stancepipe/training.hpp"

namespace stancepipe {

struct PipelinePaths {
  std::filesystem::path users;
  std::filesystem::path tweets;
  std::optional<std::filesystem::path> bot_scores;  // heuristic scorer when absent
  std::optional<std::filesystem::path> faces;
  std::optional<std::filesystem::path> name_gender;
  std::optional<std::filesystem::path> labeled_names;
  std::filesystem::path labeled_tweets;
  std::filesystem::path gazetteer;
  std::optional<std::filesystem::path> official;
  std::vector<std::filesystem::path> stopwords;
  std::filesystem::path output;
};

struct IngestSettings {
  bool exclude_retweets = false;
};

struct FilterSettings {
  double iqr_multiplier = 1.5;
  double bot_threshold = 40;
  std::optional<Timestamp> reference_time;  // defaults to the end of the topic window
  FixtureMissPolicy fixture_miss = FixtureMissPolicy::error;
};

struct DemographicsSettings {
  double radius_km = 50;
  int ngram_order = 3;
  double smoothing = 1.0;
};

struct TrainingSettings {
  double ratio = 0.8;
  std::size_t k_folds = 10;
  double regularization = 1e-4;
  int epochs = 50;
  std::size_t relevance_per_class = 1000;
  std::size_t polarity_per_class = 500;
  std::uint64_t seed = 1;
};

struct ReportSettings {
  std::size_t top_k = 5;
  ReportFormat format = ReportFormat::csv;
};

struct SamplingSettings {
  std::optional<std::size_t> size;
  std::uint64_t seed = 1;
};

struct PipelineConfig {
  PipelinePaths paths;
  TopicConfig topic;
  IngestSettings ingest;
  FilterSettings filtering;
  DemographicsSettings demographics;
  EmbeddingParams embedding;
  TrainingSettings training;
  ReportSettings report;
  SamplingSettings sampling;

  Timestamp reference_time() const { return filtering.reference_time.value_or(topic.window_end); }

  /// Applies one seed to embedding, training and sampling.
  void override_seed(std::uint64_t seed);
};

/// Reads a JSON config. Relative paths resolve against the config file's
/// directory. Throws ConfigError listing every problem found, including
/// input files that do not exist; IoError if the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
nlohmann::json to_json(const PipelineConfig& config);

/// Throws ConfigError listing every violation.
void validate(const PipelineConfig& config);

enum class Stage { ingest, filter, sample, demographics, train_embedding, train_predictors, classify, report };
const char* to_string(Stage s);

/// Stage order for `run all`; sample only when sampling.size is set.
std::vector<Stage> all_stages(const PipelineConfig& config);

struct StageSummary {
  Stage stage = Stage::ingest;
  std::map<std::string, std::size_t> counts;
  std::vector<std::filesystem::path> outputs;
  double seconds = 0;
};

/// Artifact locations under the output directory.
struct Artifacts {
  explicit Artifacts(std::filesystem::path root) : root(std::move(root)) {}
  std::filesystem::path root;

  std::filesystem::path users() const { return root / "ingest" / "users.jsonl"; }
  std::filesystem::path tweets() const { return root / "ingest" / "tweets.jsonl"; }
  std::filesystem::path verdicts() const { return root / "filter" / "verdicts.csv"; }
  std::filesystem::path humans() const { return root / "filter" / "humans.txt"; }
  std::filesystem::path sample() const { return root / "sample" / "users.txt"; }
  std::filesystem::path demographics() const { return root / "demographics" / "demographics.csv"; }
  std::filesystem::path embedding() const { return root / "embed" / "model.vec"; }
  std::filesystem::path model(const std::string& name) const { return root / "train" / (name + ".model"); }
  std::filesystem::path metrics() const { return root / "train" / "metrics.csv"; }
  std::filesystem::path tweet_polarity() const { return root / "classify" / "tweet_polarity.csv"; }
  std::filesystem::path user_polarity() const { return root / "classify" / "user_polarity.csv"; }
  std::filesystem::path report_dir() const { return root / "report"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path lock() const { return root / ".lock"; }
};

/// Runs one stage. Throws PreconditionError naming a missing upstream
/// artifact.
StageSummary run_stage(Stage stage, const PipelineConfig& config);

/// Exclusive claim on an output directory, released on destruction.
/// Throws PreconditionError when another run holds it.
class OutputLock {
 public:
  explicit OutputLock(const std::filesystem::path& output_dir);
  ~OutputLock();
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  std::filesystem::path path_;
};

/// Merges the summaries into manifest.json (config snapshot, per-stage
/// counts and timings, tool version), replacing entries for the same stage.
void write_manifest(const PipelineConfig& config, const std::vector<StageSummary>& summaries);

/// Uniform sample without replacement, returned in input order. Throws
/// ValidationError when n exceeds the population.
std::vector<std::string> sample_users(const std::vector<std::string>& users, std::size_t n, std::uint64_t seed);

std::vector<std::string> read_id_list(const std::filesystem::path& path);
void write_id_list(const std::filesystem::path& path, const std::vector<std::string>& ids);

/// Reads classify/user_polarity.csv.
std::vector<std::pair<std::string, UserPolarity>> read_user_polarity(const std::filesystem::path& path);

/// Config document for a corpus laid out by write_corpus, with paths
/// relative to the corpus directory.
nlohmann::json corpus_config(const TopicConfig& topic, const std::string& output = "out");

const char* tool_version();

}  // namespace stancepipe
