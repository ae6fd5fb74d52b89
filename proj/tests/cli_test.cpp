#include <gtest/gtest.h>

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <regex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "test_support.hpp"

namespace {

using json = nlohmann::json;

struct Outcome {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + STANCEKIT_CLI + "' " + args + " 2>&1";
  Outcome outcome;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return outcome;
  char buffer[4096];
  while (const auto n = std::fread(buffer, 1, sizeof buffer, pipe)) outcome.output.append(buffer, n);
  const int status = ::pclose(pipe);
  outcome.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return outcome;
}

std::string demo_flags(const std::filesystem::path& out) {
  return "--config '" + (test_support::demo_dir() / "demo.conf").string() + "' --out '" + out.string() + "'";
}

TEST(Cli, StageByStage) {
  test_support::TempDir dir;
  const auto flags = demo_flags(dir.path());
  for (const char* stage : {"ingest", "filter", "score", "aggregate"}) {
    const auto r = run_cli(std::string(stage) + " " + flags);
    EXPECT_EQ(r.exit_code, 0) << stage << ": " << r.output;
  }
  auto r = run_cli("baseline " + flags + " --seed 42");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  r = run_cli("panel-rank " + flags);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("1     SGP"), std::string::npos) << r.output;
  r = run_cli("evaluate " + flags);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  r = run_cli("report " + flags);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.output.find("0.70 (0.80)"), std::string::npos) << r.output;
  r = run_cli("report --json " + flags);
  EXPECT_EQ(json::parse(r.output).at("k_values"), json::array({5, 10, 20}));
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
}

TEST(Cli, FlagsOverrideConfig) {
  test_support::TempDir dir;
  const auto r = run_cli("run " + demo_flags(dir.path()) + " --stages ingest,filter --keywords moeder --min-tokens 3");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto filtered = test_support::slurp(dir / "filtered.jsonl");
  EXPECT_EQ(std::count(filtered.begin(), filtered.end(), '\n'), 10);
  const auto stats = json::parse(test_support::slurp(dir / "ingest_stats.json"));
  EXPECT_EQ(stats.at("kept"), 53);
}

TEST(Cli, BaselineRequiresSeed) {
  test_support::TempDir dir;
  const auto r = run_cli("baseline --corpus x --out '" + dir.path().string() + "'");
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.output.find("--seed"), std::string::npos) << r.output;
}

TEST(Cli, MissingArtifactNamesStage) {
  test_support::TempDir dir;
  const auto r = run_cli("evaluate " + demo_flags(dir.path()));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("stage evaluate"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("filter"), std::string::npos) << r.output;
}

TEST(Cli, InvalidConfigIsUsageError) {
  test_support::TempDir dir;
  auto r = run_cli("ingest --corpus '" + (dir / "nope.jsonl").string() + "' --out '" + dir.path().string() + "'");
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_NE(r.output.find("corpus"), std::string::npos);
  r = run_cli("frobnicate");
  EXPECT_NE(r.exit_code, 0);
}

TEST(Cli, AnnotationTaskLifecycle) {
  test_support::TempDir dir;
  ASSERT_EQ(run_cli("run " + demo_flags(dir.path())).exit_code, 0);
  const auto store = (dir / "annotations.jsonl").string();
  auto r = run_cli("serve-annotation " + demo_flags(dir.path()) +
                   " --create-task round1 --from-run --annotators ann,bob --no-serve");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(store));

  // Exporting an unlabelled task reports everything as pending.
  r = run_cli("serve-annotation " + demo_flags(dir.path()) + " --export-gold round1 --gold-out '" +
              (dir / "gold.jsonl").string() + "'");
  EXPECT_EQ(r.exit_code, 3) << r.output;
  EXPECT_NE(r.output.find("0 gold labels"), std::string::npos) << r.output;

  test_support::spit(dir / "tweets.jsonl", "{\"id\": \"x1\", \"text\": \"hallo\"}\n");
  r = run_cli("serve-annotation --store '" + store +
              "' --create-task round2 --task-tweets '" + (dir / "tweets.jsonl").string() +
              "' --annotators ann,bob --no-serve");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  r = run_cli("serve-annotation --store '" + store + "' --create-task round2 --task-tweets '" +
              (dir / "tweets.jsonl").string() + "' --annotators ann,bob --no-serve");
  EXPECT_EQ(r.exit_code, 1) << r.output;
  r = run_cli("serve-annotation --store '" + store + "' --create-task round3 --annotators ann --no-serve");
  EXPECT_EQ(r.exit_code, 2) << r.output;
}

TEST(Cli, ServesAnnotationApi) {
  test_support::TempDir dir;
  test_support::spit(dir / "tweets.jsonl", "{\"id\": \"x1\", \"text\": \"hallo\"}\n");
  const std::string cmd = std::string("exec '") + STANCEKIT_CLI + "' serve-annotation --store '" +
                          (dir / "events.jsonl").string() + "' --create-task t --task-tweets '" +
                          (dir / "tweets.jsonl").string() + "' --annotators ann,bob --port 0 > '" +
                          (dir / "server.log").string() + "' 2>&1";
  pid_t pid = 0;
  const char* argv[] = {"/bin/sh", "-c", cmd.c_str(), nullptr};
  ASSERT_EQ(::posix_spawn(&pid, "/bin/sh", nullptr, nullptr, const_cast<char**>(argv), environ), 0);

  // The server reports the port it picked once it is bound.
  const std::regex announced(R"(http://127\.0\.0\.1:(\d+))");
  std::smatch m;
  std::string log;
  for (int i = 0; i < 400; ++i) {
    log = test_support::slurp(dir / "server.log");
    if (std::regex_search(log, m, announced)) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  ASSERT_FALSE(m.empty()) << log;
  httplib::Client client("127.0.0.1", std::stoi(m[1].str()));
  auto res = client.Get("/tasks/t/next?annotator=ann");
  ASSERT_TRUE(res) << test_support::slurp(dir / "server.log");
  EXPECT_EQ(json::parse(res->body).at("tweet_id"), "x1");
  ::kill(pid, SIGTERM);
  // The server shuts down cleanly on SIGTERM.
  int status = 0;
  bool exited = false;
  for (int i = 0; i < 400 && !exited; ++i) {
    exited = ::waitpid(pid, &status, WNOHANG) == pid;
    if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  if (!exited) {
    ::kill(pid, SIGKILL);
    ::waitpid(pid, &status, 0);
  }
  EXPECT_TRUE(exited);
  EXPECT_TRUE(WIFEXITED(status) && WEXITSTATUS(status) == 0);
}

}  // namespace
