#include <signal.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stancekit/annostore.hpp"
#include "stancekit/ingest.hpp"
#include "stancekit/metrics.hpp"
#include "stancekit/pipeline.hpp"

namespace fs = std::filesystem;
namespace pl = stancekit::pipeline;
namespace anno = stancekit::annostore;

namespace {

// Flags mirroring PipelineConfig; anything set overrides the --config file.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> corpus, panel, hypotheses_simple, hypotheses_survey, gold, backend, keyword_mode, out;
  std::optional<std::vector<std::string>> keywords;
  std::optional<int> first_year, last_year, retries;
  std::optional<std::size_t> min_tokens, baseline_n, batch_size, max_in_flight;
  std::optional<std::vector<std::size_t>> k_values;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<int>> reverse_coded;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_path, "Declarative pipeline config file")->check(CLI::ExistingFile);
  cmd->add_option("--corpus", f.corpus, "Tweet corpus (line-delimited JSON)");
  cmd->add_option("--panel", f.panel, "Survey panel CSV");
  cmd->add_option("--hypotheses-simple", f.hypotheses_simple, "Simple hypothesis set (JSONL)");
  cmd->add_option("--hypotheses-survey", f.hypotheses_survey, "Survey-item hypothesis set (JSONL)");
  cmd->add_option("--gold", f.gold, "Gold labels (JSONL)");
  cmd->add_option("--backend", f.backend, "mock:<rules.json> | process:<command> | http://host:port");
  cmd->add_option("--keywords", f.keywords, "Keyword list")->delimiter(',');
  cmd->add_option("--keyword-mode", f.keyword_mode, "substring | whole-word");
  cmd->add_option("--first-year", f.first_year, "First year kept");
  cmd->add_option("--last-year", f.last_year, "Last year kept");
  cmd->add_option("--min-tokens", f.min_tokens, "Minimum whitespace tokens after cleaning");
  cmd->add_option("--k-values", f.k_values, "Top-k cut-offs")->delimiter(',');
  cmd->add_option("--baseline-n", f.baseline_n, "Random baseline sample size");
  cmd->add_option("--reverse-coded", f.reverse_coded, "Reverse-coded survey items (1-based)")->delimiter(',');
  cmd->add_option("--batch-size", f.batch_size, "Scoring batch size");
  cmd->add_option("--max-in-flight", f.max_in_flight, "Concurrent batches for concurrent backends");
  cmd->add_option("--retries", f.retries, "Retries on transport failure");
  cmd->add_option("--out", f.out, "Output directory for stage artifacts");
}

pl::PipelineConfig build_config(const ConfigFlags& f) {
  pl::PipelineConfig c = f.config_path.empty() ? pl::PipelineConfig{} : pl::load_config(f.config_path);
  auto path = [](const std::string& p) { return fs::absolute(p).lexically_normal(); };
  if (f.corpus) c.corpus = path(*f.corpus);
  if (f.panel) c.panel = path(*f.panel);
  if (f.hypotheses_simple) c.hypotheses_simple = path(*f.hypotheses_simple);
  if (f.hypotheses_survey) c.hypotheses_survey = path(*f.hypotheses_survey);
  if (f.gold) c.gold = path(*f.gold);
  if (f.out) c.output_dir = path(*f.out);
  if (f.backend) {
    auto spec = stancekit::nli::parse_backend_spec(*f.backend);
    c.backend = spec.kind == stancekit::nli::BackendSpec::Kind::kMock ? "mock:" + path(spec.target).string() : *f.backend;
  }
  if (f.keywords) c.keywords = *f.keywords;
  if (f.keyword_mode) c.keyword_mode = stancekit::ingest::parse_match_mode(*f.keyword_mode);
  if (f.first_year) c.first_year = *f.first_year;
  if (f.last_year) c.last_year = *f.last_year;
  if (f.min_tokens) c.min_tokens = *f.min_tokens;
  if (f.k_values) c.k_values = *f.k_values;
  if (f.baseline_n) c.baseline_n = *f.baseline_n;
  if (f.seed) c.seed = *f.seed;
  if (f.reverse_coded) c.reverse_coded = {f.reverse_coded->begin(), f.reverse_coded->end()};
  if (f.batch_size) c.batch_size = *f.batch_size;
  if (f.max_in_flight) c.max_in_flight = *f.max_in_flight;
  if (f.retries) c.retries = *f.retries;
  return c;
}

void run_stages(const ConfigFlags& flags, const std::vector<pl::Stage>& stages) {
  const auto config = build_config(flags);
  pl::RunOptions options;
  options.log = &std::cerr;
  pl::run(config, stages, options);
}

void print_panel_ranking(const pl::PipelineConfig& config) {
  std::ifstream in(config.output_dir / pl::artifacts::kPanelScores);
  const auto doc = nlohmann::json::parse(in);
  std::cout << "rank  party        score\n";
  int rank = 0;
  for (const auto& entry : doc.at("by_party")) {
    std::cout << std::left << std::setw(6) << ++rank << std::setw(13) << entry.at("party").get<std::string>()
              << std::fixed << std::setprecision(2) << entry.at("score").get<double>() << '\n';
  }
}

struct ServeFlags {
  std::string store;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir;
  std::string create_task;
  std::string task_tweets;
  bool from_run = false;
  std::vector<std::string> annotators;
  std::string export_gold;
  std::string gold_out;
  bool no_serve = false;
};

std::vector<anno::TaskTweet> read_task_tweets(const std::string& path) {
  std::vector<anno::TaskTweet> tweets;
  std::ifstream in(path);
  if (!in) throw stancekit::IoError("cannot open " + path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto record = nlohmann::json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.contains("id") || !record.contains("text")) {
      throw stancekit::ParseError(path, n, "expected a record with 'id' and 'text'");
    }
    tweets.push_back({record.at("id").get<std::string>(), record.at("text").get<std::string>()});
  }
  return tweets;
}

int serve_annotation(const ConfigFlags& config_flags, const ServeFlags& f) {
  const auto config = build_config(config_flags);
  const fs::path store_path = f.store.empty() ? config.output_dir / "annotations.jsonl" : fs::path(f.store);
  anno::AnnotationStore store(store_path);

  if (!f.create_task.empty()) {
    if (f.annotators.size() != 2) throw stancekit::InvalidArgument("--annotators needs exactly two ids");
    anno::AnnotationTask task;
    task.task_id = f.create_task;
    task.annotators = {f.annotators[0], f.annotators[1]};
    if (f.from_run) {
      for (auto& [id, text] : pl::annotation_pool(config)) task.tweets.push_back({id, text});
    } else if (!f.task_tweets.empty()) {
      task.tweets = read_task_tweets(f.task_tweets);
    } else {
      throw stancekit::InvalidArgument("--create-task needs --task-tweets or --from-run");
    }
    store.create_task(task);
    std::cerr << "created task '" << task.task_id << "' with " << task.tweets.size() << " tweets\n";
  }

  if (!f.export_gold.empty()) {
    const auto result = store.gold_labels(f.export_gold);
    const auto jsonl = stancekit::metrics::to_jsonl(result.gold);
    if (f.gold_out.empty()) {
      std::cout << jsonl;
    } else {
      std::ofstream(f.gold_out) << jsonl;
    }
    std::cerr << result.gold.size() << " gold labels, " << result.pending.size() << " pending\n";
    return result.pending.empty() ? 0 : 3;
  }
  if (f.no_serve) return 0;

  anno::ServerOptions options;
  if (!f.static_dir.empty()) options.static_dir = fs::path(f.static_dir);
  anno::AnnotationServer server(store, options);
  const int port = server.bind(f.host, f.port);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::cerr << "annotation API on http://" << f.host << ':' << port << " (store " << store_path.string() << ")\n";
  server.listen();
  pthread_kill(waiter.native_handle(), SIGTERM);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stancekit: zero-shot stance detection via textual entailment"};
  app.require_subcommand(1);

  struct StageCommand {
    const char* name;
    const char* help;
    std::vector<pl::Stage> stages;
  };
  const std::vector<StageCommand> stage_commands = {
      {"ingest", "Load and clean the tweet corpus", {pl::Stage::kIngest}},
      {"filter", "Keep tweets matching the target keywords", {pl::Stage::kFilter}},
      {"score", "Score tweets against both hypothesis sets", {pl::Stage::kScore}},
      {"aggregate", "Map scores to stances and aggregate per tweet", {pl::Stage::kAggregate}},
      {"evaluate", "Compute top-k precision and party-level correlation", {pl::Stage::kEvaluate}},
  };

  std::vector<ConfigFlags> flags(stage_commands.size());
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < stage_commands.size(); ++i) {
    auto* cmd = app.add_subcommand(stage_commands[i].name, stage_commands[i].help);
    add_config_flags(cmd, flags[i]);
    commands.push_back(cmd);
  }

  ConfigFlags baseline_flags;
  auto* baseline = app.add_subcommand("baseline", "Draw the seeded random baseline samples");
  add_config_flags(baseline, baseline_flags);
  baseline->add_option("--seed", baseline_flags.seed, "Sampling seed")->required();

  ConfigFlags panel_flags;
  auto* panel = app.add_subcommand("panel-rank", "Score and rank parties from the survey panel");
  add_config_flags(panel, panel_flags);

  ConfigFlags run_flags;
  std::vector<std::string> run_stage_names;
  auto* run = app.add_subcommand("run", "Run several stages in pipeline order");
  add_config_flags(run, run_flags);
  run->add_option("--seed", run_flags.seed, "Sampling seed for the baseline stage");
  run->add_option("--stages", run_stage_names, "Subset of ingest,filter,score,aggregate,baseline,panel,evaluate")
      ->delimiter(',');

  ConfigFlags report_flags;
  bool report_json = false;
  auto* report = app.add_subcommand("report", "Print the evaluation report");
  add_config_flags(report, report_flags);
  report->add_flag("--json", report_json, "Print report.json instead of the table");

  ConfigFlags serve_config;
  ServeFlags serve_flags;
  auto* serve = app.add_subcommand("serve-annotation", "Serve the annotation HTTP API");
  add_config_flags(serve, serve_config);
  serve->add_option("--store", serve_flags.store, "Event log (default <out>/annotations.jsonl)");
  serve->add_option("--host", serve_flags.host, "Bind address");
  serve->add_option("--port", serve_flags.port, "Port (0 picks a free one)");
  serve->add_option("--static-dir", serve_flags.static_dir, "Static UI assets served at /");
  serve->add_option("--create-task", serve_flags.create_task, "Create a task with this id first");
  serve->add_option("--task-tweets", serve_flags.task_tweets, "JSONL of {id, text} for --create-task");
  serve->add_flag("--from-run", serve_flags.from_run, "Build the task from the run's top-k sets and baselines");
  serve->add_option("--annotators", serve_flags.annotators, "The two annotator ids")->delimiter(',');
  serve->add_option("--export-gold", serve_flags.export_gold, "Write gold labels of this task and exit");
  serve->add_option("--gold-out", serve_flags.gold_out, "Destination for --export-gold (default stdout)");
  serve->add_flag("--no-serve", serve_flags.no_serve, "Exit after creating the task");

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < commands.size(); ++i) {
      if (*commands[i]) {
        run_stages(flags[i], stage_commands[i].stages);
        return 0;
      }
    }
    if (*baseline) {
      run_stages(baseline_flags, {pl::Stage::kBaseline});
    } else if (*panel) {
      run_stages(panel_flags, {pl::Stage::kPanel});
      print_panel_ranking(build_config(panel_flags));
    } else if (*run) {
      std::vector<pl::Stage> stages;
      if (run_stage_names.empty()) {
        stages.assign(std::begin(pl::kAllStages), std::end(pl::kAllStages));
      } else {
        for (const auto& name : run_stage_names) stages.push_back(pl::parse_stage(name));
      }
      run_stages(run_flags, stages);
    } else if (*report) {
      const auto config = build_config(report_flags);
      const auto path = config.output_dir / pl::artifacts::kReport;
      if (!fs::exists(path)) throw pl::MissingArtifact(pl::Stage::kEvaluate, path, pl::Stage::kEvaluate);
      std::ifstream in(path);
      const std::string text(std::istreambuf_iterator<char>(in), {});
      std::cout << (report_json ? text : pl::render_report_table(text));
    } else if (*serve) {
      return serve_annotation(serve_config, serve_flags);
    }
  } catch (const stancekit::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
