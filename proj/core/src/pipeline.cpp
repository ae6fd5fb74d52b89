#include "stancekit/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "io_util.hpp"
#include "stancekit/hypothesis.hpp"
#include "stancekit/metrics.hpp"
#include "stancekit/stance.hpp"

namespace stancekit::pipeline {

namespace fs = std::filesystem;

namespace {

using detail::json;
using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  while (true) {
    const auto comma = value.find(',');
    auto item = trim(value.substr(0, comma));
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return items;
}

template <typename T>
T parse_number(std::string_view text, const std::string& key) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidArgument("config key '" + key + "': '" + std::string(text) + "' is not a valid number");
  }
  return value;
}

fs::path resolve(const fs::path& base, std::string_view value) {
  fs::path p{std::string(value)};
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

fs::path artifact(const PipelineConfig& config, std::string_view name) { return config.output_dir / name; }

void log_line(const RunOptions& options, const std::string& message) {
  if (options.log) *options.log << message << '\n';
}

fs::path require_artifact(const PipelineConfig& config, Stage stage, std::string_view name, Stage producer) {
  auto path = artifact(config, name);
  if (!fs::exists(path)) throw MissingArtifact(stage, path, producer);
  return path;
}

void write_json(const fs::path& path, const ordered_json& doc) { detail::write_file(path, doc.dump(2) + "\n"); }

// --- stages ---------------------------------------------------------------

void stage_ingest(const PipelineConfig& config, const RunOptions& options) {
  const auto raw = ingest::load_tweets(config.corpus);
  const auto result = ingest::clean_corpus(raw, config.cleaning_rules());
  detail::write_file(artifact(config, artifacts::kClean), ingest::to_jsonl(result.kept));
  ordered_json dropped = ordered_json::object();
  for (auto reason : {ingest::DropReason::kYearOutOfRange, ingest::DropReason::kTooFewTokens}) {
    auto it = result.dropped.find(reason);
    dropped[std::string(ingest::to_string(reason))] = it == result.dropped.end() ? 0 : it->second;
  }
  write_json(artifact(config, artifacts::kIngestStats),
             {{"input", raw.size()}, {"kept", result.kept.size()}, {"dropped", std::move(dropped)}});
  log_line(options, "ingest: kept " + std::to_string(result.kept.size()) + " of " + std::to_string(raw.size()) +
                        " tweets");
}

void stage_filter(const PipelineConfig& config, const RunOptions& options) {
  const auto clean = ingest::load_clean_tweets(require_artifact(config, Stage::kFilter, artifacts::kClean, Stage::kIngest));
  const auto filtered = ingest::filter_by_keywords(clean, config.keywords, config.keyword_mode);
  detail::write_file(artifact(config, artifacts::kFiltered), ingest::to_jsonl(filtered));
  log_line(options, "filter: " + std::to_string(filtered.size()) + " of " + std::to_string(clean.size()) +
                        " tweets match the keywords");
}

struct HypothesisCondition {
  const char* name;
  const fs::path* hypotheses;
  std::string_view scores;
  std::string_view stances;
};

std::vector<HypothesisCondition> hypothesis_conditions(const PipelineConfig& config) {
  return {{"simple", &config.hypotheses_simple, artifacts::kScoresSimple, artifacts::kStancesSimple},
          {"survey", &config.hypotheses_survey, artifacts::kScoresSurvey, artifacts::kStancesSurvey}};
}

void stage_score(const PipelineConfig& config, const RunOptions& options) {
  const auto clean = ingest::load_clean_tweets(require_artifact(config, Stage::kScore, artifacts::kClean, Stage::kIngest));
  std::unique_ptr<nli::Scorer> owned;
  nli::Scorer* scorer = options.scorer;
  if (!scorer) {
    if (config.backend.empty()) throw StageError(Stage::kScore, "no backend configured");
    owned = nli::make_scorer(nli::parse_backend_spec(config.backend));
    scorer = owned.get();
  }
  for (const auto& condition : hypothesis_conditions(config)) {
    const auto set = hypothesis::load_set(*condition.hypotheses);
    const auto pairs = stance::make_pairs(clean, set);
    const auto scores = nli::score_batch(pairs, *scorer, config.gateway_options());
    std::string out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out += json{{"tweet_id", pairs[i].tweet_id},
                  {"hypothesis_id", pairs[i].hypothesis_id},
                  {"entailment", scores[i].entailment},
                  {"neutral", scores[i].neutral},
                  {"contradiction", scores[i].contradiction}}
                 .dump();
      out += '\n';
    }
    detail::write_file(artifact(config, condition.scores), out);
    log_line(options, std::string("score: ") + std::to_string(pairs.size()) + " pairs against the " +
                          condition.name + " hypotheses");
  }
}

void stage_aggregate(const PipelineConfig& config, const RunOptions& options) {
  const auto clean =
      ingest::load_clean_tweets(require_artifact(config, Stage::kAggregate, artifacts::kClean, Stage::kIngest));
  for (const auto& condition : hypothesis_conditions(config)) {
    const auto set = hypothesis::load_set(*condition.hypotheses);
    const auto scores_path = require_artifact(config, Stage::kAggregate, condition.scores, Stage::kScore);
    std::map<std::pair<std::string, std::string>, nli::EntailmentDistribution> lookup;
    const auto source = scores_path.string();
    detail::for_each_line(detail::read_file(scores_path), [&](std::string_view line, std::size_t n) {
      const auto record = detail::parse_json_line(line, source, n);
      nli::EntailmentDistribution d{detail::require_number(record, "entailment", source, n),
                                    detail::require_number(record, "neutral", source, n),
                                    detail::require_number(record, "contradiction", source, n)};
      lookup[{detail::require_string(record, "tweet_id", source, n),
              detail::require_string(record, "hypothesis_id", source, n)}] = d;
    });
    std::vector<nli::EntailmentDistribution> ordered;
    ordered.reserve(clean.size() * set.hypotheses.size());
    for (const auto& tweet : clean) {
      for (const auto& h : set.hypotheses) {
        auto it = lookup.find({tweet.id, h.id});
        if (it == lookup.end()) {
          throw StageError(Stage::kAggregate, std::string(condition.scores) + " has no score for tweet '" + tweet.id +
                                                  "' and hypothesis '" + h.id + "'; re-run score");
        }
        ordered.push_back(it->second);
      }
    }
    const auto stances = stance::assemble(clean, set, ordered);
    detail::write_file(artifact(config, condition.stances), stance::to_jsonl(stances));
    log_line(options, std::string("aggregate: ") + std::to_string(stances.size()) + " stances for the " +
                          condition.name + " hypotheses");
  }
}

void stage_baseline(const PipelineConfig& config, const RunOptions& options) {
  const auto clean =
      ingest::load_clean_tweets(require_artifact(config, Stage::kBaseline, artifacts::kClean, Stage::kIngest));
  const auto filtered =
      ingest::load_clean_tweets(require_artifact(config, Stage::kBaseline, artifacts::kFiltered, Stage::kFilter));
  const auto seed = *config.seed;
  const auto all_sample = metrics::sample_baseline(clean, config.baseline_n, seed);
  const auto filtered_sample = metrics::sample_baseline(filtered, config.baseline_n, seed);
  detail::write_file(artifact(config, artifacts::kBaselineAll), ingest::to_jsonl(all_sample));
  detail::write_file(artifact(config, artifacts::kBaselineFiltered), ingest::to_jsonl(filtered_sample));
  auto ids = [](const std::vector<ingest::CleanTweet>& tweets) {
    ordered_json out = ordered_json::array();
    for (const auto& t : tweets) out.push_back(t.id);
    return out;
  };
  write_json(artifact(config, artifacts::kBaselineMeta),
             {{"seed", seed}, {"n", config.baseline_n}, {"all", ids(all_sample)}, {"filtered", ids(filtered_sample)}});
  log_line(options, "baseline: sampled " + std::to_string(config.baseline_n) + " tweets per corpus with seed " +
                        std::to_string(seed));
}

ordered_json scores_json(const std::vector<metrics::PartyScore>& scores) {
  ordered_json out = ordered_json::array();
  for (const auto& s : scores) {
    ordered_json entry = {{"party", s.party}};
    if (s.year) entry["year"] = *s.year;
    entry["score"] = s.score;
    out.push_back(std::move(entry));
  }
  return out;
}

void stage_panel(const PipelineConfig& config, const RunOptions& options) {
  const auto responses = ingest::load_panel(config.panel);
  const auto by_party =
      metrics::rank_parties(metrics::panel_scores(responses, config.reverse_coded, metrics::Grouping::kByParty));
  const auto by_party_year = metrics::panel_scores(responses, config.reverse_coded, metrics::Grouping::kByPartyYear);
  write_json(artifact(config, artifacts::kPanelScores),
             {{"respondents", responses.size()},
              {"reverse_coded", config.reverse_coded},
              {"by_party", scores_json(by_party)},
              {"by_party_year", scores_json(by_party_year)}});
  log_line(options, "panel: scored " + std::to_string(by_party.size()) + " parties from " +
                        std::to_string(responses.size()) + " respondents");
}

std::vector<metrics::PartyScore> load_party_year_scores(const fs::path& path) {
  const auto doc = json::parse(detail::read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.contains("by_party_year")) {
    throw ParseError(path.string(), 0, "missing 'by_party_year'");
  }
  std::vector<metrics::PartyScore> scores;
  for (const auto& entry : doc.at("by_party_year")) {
    scores.push_back({entry.at("party").get<std::string>(), entry.at("year").get<int>(), entry.at("score").get<double>()});
  }
  return scores;
}

ordered_json precision_cell(const metrics::PrecisionReport& report) {
  return {{"p_entail", report.p_entail}, {"p_nonneutral", report.p_nonneutral}};
}

ordered_json rho_cell(std::span<const stance::TweetStance> stances, std::span<const metrics::PartyScore> scores,
                      std::optional<std::size_t> k) {
  try {
    const auto report = metrics::party_level_eval(stances, scores, k);
    return {{"rho", report.rho}, {"n_pairs", report.n_pairs}};
  } catch (const InvalidArgument& e) {
    return {{"rho", nullptr}, {"n_pairs", nullptr}, {"note", e.what()}};
  }
}

void stage_evaluate(const PipelineConfig& config, const RunOptions& options) {
  const auto filtered =
      ingest::load_clean_tweets(require_artifact(config, Stage::kEvaluate, artifacts::kFiltered, Stage::kFilter));
  const auto scores = load_party_year_scores(
      require_artifact(config, Stage::kEvaluate, artifacts::kPanelScores, Stage::kPanel));
  const auto baseline_all =
      ingest::load_clean_tweets(require_artifact(config, Stage::kEvaluate, artifacts::kBaselineAll, Stage::kBaseline));
  const auto baseline_filtered = ingest::load_clean_tweets(
      require_artifact(config, Stage::kEvaluate, artifacts::kBaselineFiltered, Stage::kBaseline));
  const auto gold = metrics::load_gold(config.gold);

  std::set<std::string> filtered_ids;
  for (const auto& t : filtered) filtered_ids.insert(t.id);

  std::map<std::string, std::vector<stance::TweetStance>> stances;
  for (const auto& condition : hypothesis_conditions(config)) {
    stances[condition.name] =
        stance::load_stances(require_artifact(config, Stage::kEvaluate, condition.stances, Stage::kAggregate));
  }

  auto ids_of = [](const std::vector<ingest::CleanTweet>& tweets) {
    std::vector<std::string> ids;
    for (const auto& t : tweets) ids.push_back(t.id);
    return ids;
  };

  ordered_json conditions = ordered_json::object();
  for (const bool use_filter : {false, true}) {
    ordered_json block = ordered_json::object();
    for (const bool survey : {false, true}) {
      auto pool = stances[survey ? "survey" : "simple"];
      if (use_filter) {
        std::erase_if(pool, [&](const stance::TweetStance& s) { return !filtered_ids.contains(s.tweet_id); });
      }
      ordered_json cells = ordered_json::object();
      for (auto k : config.k_values) {
        try {
          const auto top = stance::rank_top_k(pool, k);
          cells["P" + std::to_string(k)] = precision_cell(metrics::topk_precision(top, gold, k));
        } catch (const InvalidArgument& e) {
          throw StageError(Stage::kEvaluate, std::string(use_filter ? "filtered" : "all") + "/" +
                                                 (survey ? "with" : "without") + " survey, P" + std::to_string(k) +
                                                 ": " + e.what());
        }
      }
      for (auto k : config.k_values) cells["rho" + std::to_string(k)] = rho_cell(pool, scores, k);
      cells["rho_all"] = rho_cell(pool, scores, std::nullopt);
      block[survey ? "with_survey" : "without_survey"] = std::move(cells);
    }
    const auto& sample = use_filter ? baseline_filtered : baseline_all;
    try {
      const auto report = metrics::precision_of(ids_of(sample), gold);
      ordered_json cell = precision_cell(report);
      cell["n"] = sample.size();
      block["random_baseline"] = std::move(cell);
    } catch (const InvalidArgument& e) {
      throw StageError(Stage::kEvaluate, std::string("random baseline: ") + e.what());
    }
    conditions[use_filter ? "filtered" : "all"] = std::move(block);
  }

  ordered_json report = {{"k_values", config.k_values},
                         {"baseline", {{"n", config.baseline_n}, {"seed", config.seed ? json(*config.seed) : json()}}},
                         {"keywords", config.keywords},
                         {"keyword_mode", ingest::to_string(config.keyword_mode)},
                         {"conditions", std::move(conditions)}};
  write_json(artifact(config, artifacts::kReport), report);
  log_line(options, "evaluate: wrote " + artifact(config, artifacts::kReport).string());
}

}  // namespace

ingest::CleaningRules PipelineConfig::cleaning_rules() const {
  ingest::CleaningRules rules;
  rules.first_year = first_year;
  rules.last_year = last_year;
  rules.min_tokens = min_tokens;
  return rules;
}

nli::GatewayOptions PipelineConfig::gateway_options() const {
  nli::GatewayOptions options;
  options.batch_size = batch_size;
  options.max_in_flight = max_in_flight;
  options.retries = retries;
  return options;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir, const std::string& source) {
  PipelineConfig config;
  std::set<std::string> seen;
  detail::for_each_line(text, [&](std::string_view raw, std::size_t n) {
    auto line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, n, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) throw ParseError(source, n, "duplicate key '" + key + "'");
    try {
      if (key == "corpus") {
        config.corpus = resolve(base_dir, value);
      } else if (key == "panel") {
        config.panel = resolve(base_dir, value);
      } else if (key == "hypotheses_simple") {
        config.hypotheses_simple = resolve(base_dir, value);
      } else if (key == "hypotheses_survey") {
        config.hypotheses_survey = resolve(base_dir, value);
      } else if (key == "gold") {
        config.gold = resolve(base_dir, value);
      } else if (key == "output_dir") {
        config.output_dir = resolve(base_dir, value);
      } else if (key == "backend") {
        auto spec = nli::parse_backend_spec(value);
        config.backend = spec.kind == nli::BackendSpec::Kind::kMock
                             ? "mock:" + resolve(base_dir, spec.target).string()
                             : std::string(value);
      } else if (key == "keywords") {
        config.keywords = split_list(value);
      } else if (key == "keyword_mode") {
        config.keyword_mode = ingest::parse_match_mode(value);
      } else if (key == "first_year") {
        config.first_year = parse_number<int>(value, key);
      } else if (key == "last_year") {
        config.last_year = parse_number<int>(value, key);
      } else if (key == "min_tokens") {
        config.min_tokens = parse_number<std::size_t>(value, key);
      } else if (key == "k_values") {
        config.k_values.clear();
        for (const auto& item : split_list(value)) config.k_values.push_back(parse_number<std::size_t>(item, key));
      } else if (key == "baseline_n") {
        config.baseline_n = parse_number<std::size_t>(value, key);
      } else if (key == "seed") {
        config.seed = parse_number<std::uint64_t>(value, key);
      } else if (key == "reverse_coded") {
        config.reverse_coded.clear();
        for (const auto& item : split_list(value)) config.reverse_coded.insert(parse_number<int>(item, key));
      } else if (key == "batch_size") {
        config.batch_size = parse_number<std::size_t>(value, key);
      } else if (key == "max_in_flight") {
        config.max_in_flight = parse_number<std::size_t>(value, key);
      } else if (key == "retries") {
        config.retries = parse_number<int>(value, key);
      } else {
        throw InvalidArgument("unknown key '" + key + "'");
      }
    } catch (const InvalidArgument& e) {
      throw ParseError(source, n, e.what());
    }
  });
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(detail::read_file(path), fs::absolute(path).parent_path(), path.string());
}

std::string canonical_config(const PipelineConfig& c) {
  auto join = [](const auto& items) {
    std::ostringstream out;
    bool first = true;
    for (const auto& item : items) {
      if (!first) out << ',';
      out << item;
      first = false;
    }
    return out.str();
  };
  std::ostringstream out;
  out << "corpus=" << c.corpus.string() << '\n'
      << "panel=" << c.panel.string() << '\n'
      << "hypotheses_simple=" << c.hypotheses_simple.string() << '\n'
      << "hypotheses_survey=" << c.hypotheses_survey.string() << '\n'
      << "gold=" << c.gold.string() << '\n'
      << "backend=" << c.backend << '\n'
      << "keywords=" << join(c.keywords) << '\n'
      << "keyword_mode=" << ingest::to_string(c.keyword_mode) << '\n'
      << "first_year=" << c.first_year << '\n'
      << "last_year=" << c.last_year << '\n'
      << "min_tokens=" << c.min_tokens << '\n'
      << "k_values=" << join(c.k_values) << '\n'
      << "baseline_n=" << c.baseline_n << '\n'
      << "seed=" << (c.seed ? std::to_string(*c.seed) : std::string("none")) << '\n'
      << "reverse_coded=" << join(c.reverse_coded) << '\n'
      << "batch_size=" << c.batch_size << '\n'
      << "max_in_flight=" << c.max_in_flight << '\n'
      << "retries=" << c.retries << '\n'
      << "output_dir=" << c.output_dir.string() << '\n';
  return out.str();
}

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::kIngest:
      return "ingest";
    case Stage::kFilter:
      return "filter";
    case Stage::kScore:
      return "score";
    case Stage::kAggregate:
      return "aggregate";
    case Stage::kBaseline:
      return "baseline";
    case Stage::kPanel:
      return "panel";
    case Stage::kEvaluate:
      return "evaluate";
  }
  return "unknown";
}

Stage parse_stage(std::string_view text) {
  for (auto stage : kAllStages) {
    if (to_string(stage) == text) return stage;
  }
  throw InvalidArgument("unknown stage '" + std::string(text) + "'");
}

StageError::StageError(Stage stage, const std::string& what)
    : Error("stage " + std::string(to_string(stage)) + ": " + what), stage_(stage) {}

MissingArtifact::MissingArtifact(Stage stage, const fs::path& artifact_path, Stage producer)
    : StageError(stage, "missing artifact " + artifact_path.string() + "; run the '" +
                            std::string(to_string(producer)) + "' stage first") {}

void validate(const PipelineConfig& config, const std::vector<Stage>& stages) {
  auto has = [&](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  auto require_file = [](const fs::path& path, const char* key) {
    if (path.empty()) throw InvalidArgument(std::string("config: '") + key + "' is not set");
    if (!fs::is_regular_file(path)) throw InvalidArgument(std::string("config: ") + key + " file " + path.string() + " does not exist");
  };
  if (config.output_dir.empty()) throw InvalidArgument("config: 'output_dir' is not set");
  if (config.first_year > config.last_year) throw InvalidArgument("config: first_year is after last_year");
  if (has(Stage::kIngest)) require_file(config.corpus, "corpus");
  if (has(Stage::kFilter) && config.keywords.empty()) throw InvalidArgument("config: 'keywords' is empty");
  if (has(Stage::kScore) || has(Stage::kAggregate)) {
    require_file(config.hypotheses_simple, "hypotheses_simple");
    require_file(config.hypotheses_survey, "hypotheses_survey");
  }
  if (has(Stage::kScore) && config.backend.rfind("mock:", 0) == 0) {
    require_file(nli::parse_backend_spec(config.backend).target, "backend");
  }
  if (has(Stage::kBaseline)) {
    if (!config.seed) throw InvalidArgument("config: 'seed' is required for the baseline stage");
    if (config.baseline_n == 0) throw InvalidArgument("config: 'baseline_n' must be positive");
  }
  if (has(Stage::kPanel)) require_file(config.panel, "panel");
  if (has(Stage::kEvaluate)) {
    require_file(config.gold, "gold");
    if (config.k_values.empty()) throw InvalidArgument("config: 'k_values' is empty");
  }
  for (auto k : config.k_values) {
    if (k == 0) throw InvalidArgument("config: k values must be positive");
  }
  if (config.batch_size == 0) throw InvalidArgument("config: 'batch_size' must be positive");
}

void run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options) {
  switch (stage) {
    case Stage::kIngest:
      return stage_ingest(config, options);
    case Stage::kFilter:
      return stage_filter(config, options);
    case Stage::kScore:
      return stage_score(config, options);
    case Stage::kAggregate:
      return stage_aggregate(config, options);
    case Stage::kBaseline:
      return stage_baseline(config, options);
    case Stage::kPanel:
      return stage_panel(config, options);
    case Stage::kEvaluate:
      return stage_evaluate(config, options);
  }
}

void run(const PipelineConfig& config, const std::vector<Stage>& stages, const RunOptions& options) {
  validate(config, stages);
  fs::create_directories(config.output_dir);
  for (auto stage : kAllStages) {
    if (std::find(stages.begin(), stages.end(), stage) == stages.end()) continue;
    try {
      run_stage(stage, config, options);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }
  write_manifest(config);
}

void write_manifest(const PipelineConfig& config) {
  ordered_json checksums = ordered_json::object();
  for (auto name : {artifacts::kClean, artifacts::kIngestStats, artifacts::kFiltered, artifacts::kScoresSimple,
                    artifacts::kScoresSurvey, artifacts::kStancesSimple, artifacts::kStancesSurvey,
                    artifacts::kBaselineAll, artifacts::kBaselineFiltered, artifacts::kBaselineMeta,
                    artifacts::kPanelScores, artifacts::kReport}) {
    const auto path = artifact(config, name);
    if (fs::exists(path)) checksums[std::string(name)] = sha256_file(path);
  }
  write_json(artifact(config, artifacts::kManifest),
             {{"config_sha256", sha256_hex(canonical_config(config))},
              {"seed", config.seed ? json(*config.seed) : json()},
              {"artifacts", std::move(checksums)}});
}

std::vector<std::pair<std::string, std::string>> annotation_pool(const PipelineConfig& config) {
  if (config.k_values.empty()) throw InvalidArgument("config: 'k_values' is empty");
  const auto k = *std::max_element(config.k_values.begin(), config.k_values.end());
  const auto clean = ingest::load_clean_tweets(require_artifact(config, Stage::kEvaluate, artifacts::kClean, Stage::kIngest));
  const auto filtered =
      ingest::load_clean_tweets(require_artifact(config, Stage::kEvaluate, artifacts::kFiltered, Stage::kFilter));
  std::map<std::string, std::string> text_of;
  for (const auto& t : clean) text_of.emplace(t.id, t.text);
  std::set<std::string> filtered_ids;
  for (const auto& t : filtered) filtered_ids.insert(t.id);

  std::set<std::string> chosen;
  for (const auto& condition : hypothesis_conditions(config)) {
    auto stances =
        stance::load_stances(require_artifact(config, Stage::kEvaluate, condition.stances, Stage::kAggregate));
    for (const auto& s : stance::rank_top_k(stances, std::min(k, stances.size()))) chosen.insert(s.tweet_id);
    std::erase_if(stances, [&](const stance::TweetStance& s) { return !filtered_ids.contains(s.tweet_id); });
    if (!stances.empty()) {
      for (const auto& s : stance::rank_top_k(stances, std::min(k, stances.size()))) chosen.insert(s.tweet_id);
    }
  }
  for (auto name : {artifacts::kBaselineAll, artifacts::kBaselineFiltered}) {
    for (const auto& t : ingest::load_clean_tweets(require_artifact(config, Stage::kEvaluate, name, Stage::kBaseline))) {
      chosen.insert(t.id);
    }
  }
  std::vector<std::pair<std::string, std::string>> pool;
  for (const auto& id : chosen) pool.emplace_back(id, text_of.at(id));
  return pool;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  std::ostringstream out;
  for (unsigned int i = 0; i < length; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return out.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(detail::read_file(path)); }

}  // namespace stancekit::pipeline
