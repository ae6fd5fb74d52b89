#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stancekit/error.hpp"
#include "stancekit/ingest.hpp"
#include "stancekit/nli_gateway.hpp"

namespace stancekit::pipeline {

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path panel;
  std::filesystem::path hypotheses_simple;
  std::filesystem::path hypotheses_survey;
  std::filesystem::path gold;
  std::string backend;  // see nli::parse_backend_spec
  std::vector<std::string> keywords{"vrouw", "man", "moeder", "vader", "jongen", "meisje"};
  ingest::MatchMode keyword_mode = ingest::MatchMode::kSubstring;
  int first_year = 2017;
  int last_year = 2021;
  std::size_t min_tokens = 5;
  std::vector<std::size_t> k_values{10, 50, 100};
  std::size_t baseline_n = 100;
  std::optional<std::uint64_t> seed;
  std::set<int> reverse_coded{1, 4, 6, 7};
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
  int retries = 2;
  std::filesystem::path output_dir = "out";

  ingest::CleaningRules cleaning_rules() const;
  nli::GatewayOptions gateway_options() const;
};

// `key = value` lines; `#` starts a comment; lists are comma-separated.
// Relative paths resolve against `base_dir`. Unknown keys are errors.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                            const std::string& source = "<memory>");
PipelineConfig load_config(const std::filesystem::path& path);

// Stable text rendering, used for the config hash in the run manifest.
std::string canonical_config(const PipelineConfig& config);

enum class Stage { kIngest, kFilter, kScore, kAggregate, kBaseline, kPanel, kEvaluate };

inline constexpr Stage kAllStages[] = {Stage::kIngest,   Stage::kFilter, Stage::kScore,   Stage::kAggregate,
                                       Stage::kBaseline, Stage::kPanel,  Stage::kEvaluate};

std::string_view to_string(Stage stage) noexcept;
Stage parse_stage(std::string_view text);

class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what);
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

// An upstream artifact a stage needs has not been produced.
class MissingArtifact : public StageError {
 public:
  MissingArtifact(Stage stage, const std::filesystem::path& artifact, Stage producer);
};

// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr std::string_view kClean = "clean.jsonl";
inline constexpr std::string_view kIngestStats = "ingest_stats.json";
inline constexpr std::string_view kFiltered = "filtered.jsonl";
inline constexpr std::string_view kScoresSimple = "scores_simple.jsonl";
inline constexpr std::string_view kScoresSurvey = "scores_survey.jsonl";
inline constexpr std::string_view kStancesSimple = "stances_simple.jsonl";
inline constexpr std::string_view kStancesSurvey = "stances_survey.jsonl";
inline constexpr std::string_view kBaselineAll = "baseline_all.jsonl";
inline constexpr std::string_view kBaselineFiltered = "baseline_filtered.jsonl";
inline constexpr std::string_view kBaselineMeta = "baseline.json";
inline constexpr std::string_view kPanelScores = "panel_scores.json";
inline constexpr std::string_view kReport = "report.json";
inline constexpr std::string_view kManifest = "manifest.json";
}  // namespace artifacts

// Throws InvalidArgument naming the offending field when a file the given
// stages read from the config is missing, a k value is zero, or baseline runs
// without a seed.
void validate(const PipelineConfig& config, const std::vector<Stage>& stages);

struct RunOptions {
  // Overrides the scorer built from `config.backend`.
  nli::Scorer* scorer = nullptr;
  std::ostream* log = nullptr;
};

// Runs the stages in pipeline order, then rewrites manifest.json with the
// config hash, seed and the checksum of every artifact present.
void run(const PipelineConfig& config, const std::vector<Stage>& stages, const RunOptions& options = {});

void run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options = {});

void write_manifest(const PipelineConfig& config);

// Tweets to annotate for a finished run: the top max(k) tweets of every
// condition plus both random baseline samples, deduplicated and ordered by id
// so annotators do not see the model's ranking.
std::vector<std::pair<std::string, std::string>> annotation_pool(const PipelineConfig& config);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Renders report.json as a plain-text precision/correlation grid.
std::string render_report_table(std::string_view report_json);

}  // namespace stancekit::pipeline
