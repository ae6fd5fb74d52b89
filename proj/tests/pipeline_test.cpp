#include <gtest/gtest.h>

#include <json.hpp>

#include "stancekit/error.hpp"
#include "stancekit/metrics.hpp"
#include "stancekit/pipeline.hpp"
#include "test_support.hpp"

namespace {

using namespace stancekit;
using namespace stancekit::pipeline;
using json = nlohmann::json;
namespace fs = std::filesystem;

PipelineConfig demo_config(const fs::path& out) {
  auto config = load_config(test_support::demo_dir() / "demo.conf");
  config.output_dir = out;
  return config;
}

TEST(Config, ParsesKeysListsAndPaths) {
  const auto config = parse_config(
      "# comment\n"
      "corpus = data/tweets.jsonl   # trailing comment\n"
      "panel = /abs/panel.csv\n"
      "backend = mock:rules.json\n"
      "keywords = vrouw,  man ,moeder\n"
      "keyword_mode = whole-word\n"
      "k_values = 5, 10\n"
      "seed = 18446744073709551615\n"
      "reverse_coded = 2,3\n"
      "first_year = 2018\n"
      "retries = 0\n",
      "/base");
  EXPECT_EQ(config.corpus, fs::path("/base/data/tweets.jsonl"));
  EXPECT_EQ(config.panel, fs::path("/abs/panel.csv"));
  EXPECT_EQ(config.backend, "mock:/base/rules.json");
  EXPECT_EQ(config.keywords, (std::vector<std::string>{"vrouw", "man", "moeder"}));
  EXPECT_EQ(config.keyword_mode, ingest::MatchMode::kWholeWord);
  EXPECT_EQ(config.k_values, (std::vector<std::size_t>{5, 10}));
  EXPECT_EQ(config.seed, 18446744073709551615ull);
  EXPECT_EQ(config.reverse_coded, (std::set<int>{2, 3}));
  EXPECT_EQ(config.first_year, 2018);
  EXPECT_EQ(config.last_year, 2021);
  EXPECT_EQ(config.retries, 0);
  EXPECT_EQ(config.batch_size, 32u);
}

TEST(Config, Defaults) {
  const PipelineConfig config;
  EXPECT_EQ(config.k_values, (std::vector<std::size_t>{10, 50, 100}));
  EXPECT_EQ(config.baseline_n, 100u);
  EXPECT_EQ(config.reverse_coded, metrics::kDefaultReverseCoded);
  EXPECT_EQ(config.keyword_mode, ingest::MatchMode::kSubstring);
  EXPECT_FALSE(config.seed.has_value());
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("colour = blue\n", "/"), ParseError);
  EXPECT_THROW(parse_config("seed = 1\nseed = 2\n", "/"), ParseError);
  EXPECT_THROW(parse_config("seed = -1\n", "/"), ParseError);
  EXPECT_THROW(parse_config("k_values = 5, x\n", "/"), ParseError);
  EXPECT_THROW(parse_config("just words\n", "/"), ParseError);
  EXPECT_THROW(parse_config("keyword_mode = fuzzy\n", "/"), ParseError);
  try {
    parse_config("seed = 1\nbatch_size = lots\n", "/", "run.conf");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.source(), "run.conf");
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Config, CanonicalFormIsStable) {
  const auto a = demo_config("/tmp/x");
  auto b = demo_config("/tmp/x");
  EXPECT_EQ(canonical_config(a), canonical_config(b));
  b.seed = 43;
  EXPECT_NE(canonical_config(a), canonical_config(b));
}

TEST(Stages, NamesRoundTrip) {
  for (auto stage : kAllStages) EXPECT_EQ(parse_stage(to_string(stage)), stage);
  EXPECT_THROW(parse_stage("train"), InvalidArgument);
}

TEST(Validate, NamesOffendingField) {
  test_support::TempDir dir;
  auto config = demo_config(dir.path());
  config.seed.reset();
  try {
    validate(config, {Stage::kBaseline});
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos);
  }
  EXPECT_NO_THROW(validate(config, {Stage::kIngest}));
  config.corpus = dir / "missing.jsonl";
  EXPECT_THROW(validate(config, {Stage::kIngest}), InvalidArgument);
  config = demo_config(dir.path());
  config.k_values = {10, 0};
  EXPECT_THROW(validate(config, {Stage::kEvaluate}), InvalidArgument);
}

TEST(Stages, MissingUpstreamArtifact) {
  test_support::TempDir dir;
  const auto config = demo_config(dir.path());
  try {
    run(config, {Stage::kEvaluate});
    FAIL() << "expected MissingArtifact";
  } catch (const MissingArtifact& e) {
    EXPECT_EQ(e.stage(), Stage::kEvaluate);
    EXPECT_NE(std::string(e.what()).find("stage evaluate"), std::string::npos);
  }
  EXPECT_THROW(run(config, {Stage::kFilter}), MissingArtifact);
  EXPECT_THROW(run(config, {Stage::kAggregate}), MissingArtifact);
}

TEST(Stages, StepwiseEqualsSingleRun) {
  test_support::TempDir a;
  test_support::TempDir b;
  run(demo_config(a.path()), {std::begin(kAllStages), std::end(kAllStages)});
  for (auto stage : kAllStages) run(demo_config(b.path()), {stage});
  for (auto name : {artifacts::kClean, artifacts::kFiltered, artifacts::kScoresSurvey, artifacts::kStancesSimple,
                    artifacts::kBaselineAll, artifacts::kPanelScores, artifacts::kReport}) {
    EXPECT_EQ(test_support::slurp(a / std::string(name)), test_support::slurp(b / std::string(name))) << name;
  }
}

class DemoRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new test_support::TempDir;
    run(demo_config(dir_->path()), {std::begin(kAllStages), std::end(kAllStages)});
  }
  static void TearDownTestSuite() { delete dir_; }
  static json read(std::string_view name) { return json::parse(test_support::slurp(dir_->path() / std::string(name))); }

  static test_support::TempDir* dir_;
};

test_support::TempDir* DemoRun::dir_ = nullptr;

TEST_F(DemoRun, IngestStats) {
  EXPECT_EQ(read(artifacts::kIngestStats),
            (json{{"input", 56}, {"kept", 52}, {"dropped", {{"year_out_of_range", 2}, {"too_few_tokens", 2}}}}));
  EXPECT_EQ(ingest::load_clean_tweets(dir_->path() / std::string(artifacts::kFiltered)).size(), 26u);
}

TEST_F(DemoRun, ReportLayout) {
  const auto report = read(artifacts::kReport);
  EXPECT_EQ(report.at("k_values"), json::array({5, 10, 20}));
  EXPECT_EQ(report.at("baseline"), (json{{"n", 20}, {"seed", 42}}));
  for (const char* block : {"all", "filtered"}) {
    const auto& b = report.at("conditions").at(block);
    for (const char* cond : {"without_survey", "with_survey"}) {
      for (const char* key : {"P5", "P10", "P20"}) {
        const auto& cell = b.at(cond).at(key);
        EXPECT_GE(cell.at("p_nonneutral").get<double>(), cell.at("p_entail").get<double>());
      }
      for (const char* key : {"rho5", "rho10", "rho20", "rho_all"}) EXPECT_TRUE(b.at(cond).contains(key));
    }
    EXPECT_EQ(b.at("random_baseline").at("n"), 20);
  }
  const auto& best = report.at("conditions").at("filtered").at("with_survey").at("P10");
  EXPECT_EQ(best.at("p_entail").get<double>(), 0.7);
  EXPECT_EQ(best.at("p_nonneutral").get<double>(), 0.8);
}

TEST_F(DemoRun, ReportTable) {
  const auto table = render_report_table(test_support::slurp(dir_->path() / std::string(artifacts::kReport)));
  EXPECT_NE(table.find("Precision_10"), std::string::npos);
  EXPECT_NE(table.find("0.70 (0.80)"), std::string::npos);
  EXPECT_NE(table.find("Spearman rho_all"), std::string::npos);
  EXPECT_THROW(render_report_table("{}"), ParseError);
}

TEST_F(DemoRun, ManifestChecksums) {
  const auto manifest = read(artifacts::kManifest);
  EXPECT_EQ(manifest.at("seed"), 42);
  EXPECT_EQ(manifest.at("config_sha256"), sha256_hex(canonical_config(demo_config(dir_->path()))));
  const auto& sums = manifest.at("artifacts");
  EXPECT_EQ(sums.size(), 12u);
  EXPECT_EQ(sums.at(std::string(artifacts::kReport)), sha256_file(dir_->path() / std::string(artifacts::kReport)));
}

TEST_F(DemoRun, PanelScoresArtifact) {
  const auto panel = read(artifacts::kPanelScores);
  EXPECT_EQ(panel.at("respondents"), 105);
  EXPECT_EQ(panel.at("reverse_coded"), json::array({1, 4, 6, 7}));
  EXPECT_EQ(panel.at("by_party").size(), 7u);
  EXPECT_EQ(panel.at("by_party")[0].at("party"), "SGP");
  EXPECT_EQ(panel.at("by_party_year").size(), 35u);
}

TEST_F(DemoRun, BaselineSamplesAreFilteredSubsets) {
  const auto filtered = ingest::load_clean_tweets(dir_->path() / std::string(artifacts::kFiltered));
  const auto sample = ingest::load_clean_tweets(dir_->path() / std::string(artifacts::kBaselineFiltered));
  EXPECT_EQ(sample.size(), 20u);
  for (const auto& t : sample) {
    EXPECT_TRUE(std::any_of(filtered.begin(), filtered.end(), [&](const auto& f) { return f == t; }));
  }
  EXPECT_EQ(read(artifacts::kBaselineMeta).at("seed"), 42);
}

TEST_F(DemoRun, AnnotationPool) {
  const auto pool = annotation_pool(demo_config(dir_->path()));
  EXPECT_TRUE(std::is_sorted(pool.begin(), pool.end()));
  EXPECT_GE(pool.size(), 20u);
  EXPECT_LE(pool.size(), 52u);
  for (const auto& [id, text] : pool) EXPECT_FALSE(text.empty()) << id;
}

TEST(Evaluate, MissingGoldIsHardFailure) {
  test_support::TempDir dir;
  auto config = demo_config(dir.path());
  run(config, {Stage::kIngest, Stage::kFilter, Stage::kScore, Stage::kAggregate, Stage::kBaseline, Stage::kPanel});
  // Drop one gold label: every P cell that reaches that tweet must fail loudly.
  const auto gold = metrics::load_gold(config.gold);
  metrics::GoldMap partial;
  for (const auto& [id, g] : gold) {
    if (id != gold.begin()->first) partial.emplace(id, g);
  }
  test_support::spit(dir / "partial_gold.jsonl", metrics::to_jsonl(partial));
  config.gold = dir / "partial_gold.jsonl";
  config.k_values = {52};
  EXPECT_THROW(run(config, {Stage::kEvaluate}), StageError);
  EXPECT_FALSE(fs::exists(dir / std::string(artifacts::kReport)));
}

TEST(Evaluate, UnmatchedPartiesGiveNullRho) {
  test_support::TempDir dir;
  auto config = demo_config(dir.path());
  test_support::spit(dir / "panel.csv",
                     "respondent_id,year,party,item_1,item_2,item_3,item_4,item_5,item_6,item_7,item_8,item_9,item_10,"
                     "item_11\nr1,2018,NOBODY,3,3,3,3,3,3,3,3,3,3,3\n");
  config.panel = dir / "panel.csv";
  run(config, {std::begin(kAllStages), std::end(kAllStages)});
  const auto report = json::parse(test_support::slurp(dir / std::string(artifacts::kReport)));
  const auto& cell = report.at("conditions").at("all").at("with_survey").at("rho_all");
  EXPECT_TRUE(cell.at("rho").is_null());
  EXPECT_TRUE(cell.at("n_pairs").is_null());
  EXPECT_NE(cell.at("note").get<std::string>().find("insufficient pairs"), std::string::npos);
}

TEST(Score, UsesScorerOverride) {
  test_support::TempDir dir;
  auto config = demo_config(dir.path());
  auto flat = nli::make_mock_scorer({}, {0.2, 0.6, 0.2});
  RunOptions options;
  options.scorer = flat.get();
  run(config, {Stage::kIngest, Stage::kScore, Stage::kAggregate}, options);
  for (const auto& s : stance::load_stances(dir / std::string(artifacts::kStancesSurvey))) {
    EXPECT_EQ(s.label, StanceLabel::kNeutral);
    EXPECT_NEAR(s.favor_prob, 0.2, 1e-15);
  }
}

TEST(Score, DeadBackendNamesStage) {
  test_support::TempDir dir;
  auto config = demo_config(dir.path());
  config.backend = "process:exit 0";
  config.retries = 0;
  run(config, {Stage::kIngest});
  try {
    run(config, {Stage::kScore});
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), Stage::kScore);
  }
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
