#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stancekit/error.hpp"
#include "stancekit/labels.hpp"
#include "stancekit/metrics.hpp"

namespace stancekit::annostore {

class NotFound : public Error {
 public:
  using Error::Error;
};

// Annotator is not assigned to the task.
class NotAuthorized : public Error {
 public:
  using Error::Error;
};

// Request is well-formed but conflicts with the current state.
class Conflict : public Error {
 public:
  using Error::Error;
};

struct TaskTweet {
  std::string id;
  std::string text;

  friend bool operator==(const TaskTweet&, const TaskTweet&) = default;
};

struct AnnotationTask {
  std::string task_id;
  std::vector<TaskTweet> tweets;
  std::array<std::string, 2> annotators;

  friend bool operator==(const AnnotationTask&, const AnnotationTask&) = default;
};

struct AnnotationRecord {
  std::uint64_t seq = 0;
  std::string tweet_id;
  std::string annotator_id;
  StanceLabel label = StanceLabel::kNeutral;
  std::string timestamp;

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

struct AdjudicationRecord {
  std::uint64_t seq = 0;
  std::string tweet_id;
  StanceLabel final_label = StanceLabel::kNeutral;
  std::vector<std::string> resolved_by;
  std::string timestamp;

  friend bool operator==(const AdjudicationRecord&, const AdjudicationRecord&) = default;
};

// Current labels of one tweet, indexed like AnnotationTask::annotators.
struct TweetStatus {
  std::string tweet_id;
  std::array<std::optional<StanceLabel>, 2> current;
  bool adjudicated = false;

  bool complete() const noexcept { return current[0] && current[1]; }
  bool disagreement() const noexcept { return complete() && *current[0] != *current[1]; }
};

struct Disagreement {
  std::string tweet_id;
  std::string text;
  std::array<StanceLabel, 2> labels;
};

struct GoldResult {
  metrics::GoldMap gold;
  std::vector<std::string> pending;  // task order
};

struct Progress {
  std::size_t total = 0;
  std::size_t labelled = 0;  // by the requesting annotator
  std::size_t remaining = 0;
  std::size_t disagreements = 0;  // unresolved
};

// Returns an ISO-8601 timestamp for new events.
using Clock = std::function<std::string()>;
std::string utc_now();

// Append-only event log of task, label and adjudication events; the state is a
// fold over the log. Writes are serialized; reads see an immutable snapshot.
//
// Relabelling and re-adjudication are last-write-wins with full history. An
// adjudication only holds while the labels it resolved are unchanged: any
// later label on that tweet voids it.
class AnnotationStore {
 public:
  // Opens (or creates) the log at `path` and replays it. Throws ParseError on
  // a corrupt log.
  explicit AnnotationStore(std::filesystem::path path, Clock clock = utc_now);
  ~AnnotationStore();
  AnnotationStore(AnnotationStore&&) noexcept;
  AnnotationStore& operator=(AnnotationStore&&) noexcept;

  const std::filesystem::path& path() const noexcept;

  void create_task(const AnnotationTask& task);

  TweetStatus submit_label(const std::string& task_id, const std::string& annotator_id,
                           const std::string& tweet_id, StanceLabel label);

  // Tweets where both annotators labelled, labels differ, and no valid
  // adjudication exists.
  std::vector<Disagreement> disagreements(const std::string& task_id) const;

  // Requires the two current labels to differ. Throws Conflict otherwise.
  AdjudicationRecord adjudicate(const std::string& task_id, const std::string& tweet_id, StanceLabel final_label);

  GoldResult gold_labels(const std::string& task_id) const;

  // Next tweet in task order the annotator has not labelled yet.
  std::optional<TaskTweet> next_for(const std::string& task_id, const std::string& annotator_id) const;

  Progress progress(const std::string& task_id, const std::string& annotator_id) const;

  AnnotationTask task(const std::string& task_id) const;
  std::vector<std::string> task_ids() const;
  TweetStatus status(const std::string& task_id, const std::string& tweet_id) const;
  std::vector<AnnotationRecord> label_history(const std::string& task_id, const std::string& tweet_id) const;
  std::vector<AdjudicationRecord> adjudication_history(const std::string& task_id,
                                                       const std::string& tweet_id) const;

  std::uint64_t last_seq() const;

  // Canonical JSON rendering of the folded state, including history.
  std::string dump_state() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct ServerOptions {
  // Static UI assets mounted at `/`, if set.
  std::optional<std::filesystem::path> static_dir;
};

// HTTP API over a store:
//   POST /tasks                              {task_id, annotators, tweets:[{id,text}]}
//   GET  /tasks/{id}/next?annotator=
//   GET  /tasks/{id}/progress?annotator=
//   POST /tasks/{id}/labels                  {annotator_id, tweet_id, label}
//   GET  /tasks/{id}/disagreements
//   POST /tasks/{id}/adjudications           {tweet_id, final_label}
//   GET  /tasks/{id}/gold
class AnnotationServer {
 public:
  explicit AnnotationServer(AnnotationStore& store, ServerOptions options = {});
  ~AnnotationServer();

  // Returns the bound port; blocks in listen() until stop().
  int bind(const std::string& host, int port);
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace stancekit::annostore
