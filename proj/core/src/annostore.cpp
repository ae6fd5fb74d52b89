#include "stancekit/annostore.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "io_util.hpp"

namespace stancekit::annostore {

namespace {

using detail::json;

struct TaskState {
  AnnotationTask task;
  std::unordered_map<std::string, std::size_t> tweet_index;
  std::vector<TweetStatus> status;
  std::vector<std::vector<AnnotationRecord>> labels;
  std::vector<std::vector<AdjudicationRecord>> adjudications;
  // Adjudication currently in force for each tweet; cleared by any relabel.
  std::vector<std::optional<AdjudicationRecord>> active;

  int annotator_index(const std::string& id) const {
    for (int i = 0; i < 2; ++i) {
      if (task.annotators[static_cast<std::size_t>(i)] == id) return i;
    }
    return -1;
  }

  std::size_t tweet(const std::string& tweet_id) const {
    auto it = tweet_index.find(tweet_id);
    if (it == tweet_index.end()) {
      throw NotFound("tweet '" + tweet_id + "' is not part of task '" + task.task_id + "'");
    }
    return it->second;
  }
};

struct State {
  std::map<std::string, TaskState> tasks;
  std::uint64_t last_seq = 0;

  const TaskState& task(const std::string& id) const {
    auto it = tasks.find(id);
    if (it == tasks.end()) throw NotFound("unknown task '" + id + "'");
    return it->second;
  }
  TaskState& task(const std::string& id) {
    auto it = tasks.find(id);
    if (it == tasks.end()) throw NotFound("unknown task '" + id + "'");
    return it->second;
  }
};

StanceLabel label_field(const json& event, const char* field) {
  auto it = event.find(field);
  if (it == event.end() || !it->is_string()) throw InvalidArgument(std::string("missing label field '") + field + "'");
  auto label = parse_stance_label(it->get<std::string>());
  if (!label) throw InvalidArgument("invalid label '" + it->get<std::string>() + "'");
  return *label;
}

std::string string_field(const json& event, const char* field) {
  auto it = event.find(field);
  if (it == event.end() || !it->is_string()) throw InvalidArgument(std::string("missing string field '") + field + "'");
  return it->get<std::string>();
}

void apply_task(State& state, const json& event) {
  AnnotationTask task;
  task.task_id = string_field(event, "task_id");
  if (task.task_id.empty()) throw InvalidArgument("empty task id");
  if (state.tasks.contains(task.task_id)) throw Conflict("task '" + task.task_id + "' already exists");
  const auto& annotators = event.at("annotators");
  if (!annotators.is_array() || annotators.size() != 2) throw InvalidArgument("a task needs exactly two annotators");
  for (std::size_t i = 0; i < 2; ++i) {
    if (!annotators[i].is_string() || annotators[i].get<std::string>().empty()) {
      throw InvalidArgument("annotator ids must be non-empty strings");
    }
    task.annotators[i] = annotators[i].get<std::string>();
  }
  if (task.annotators[0] == task.annotators[1]) throw InvalidArgument("the two annotators must differ");

  TaskState ts;
  const auto& tweets = event.at("tweets");
  if (!tweets.is_array() || tweets.empty()) throw InvalidArgument("a task needs at least one tweet");
  for (const auto& t : tweets) {
    if (!t.is_object()) throw InvalidArgument("task tweets must be objects");
    TaskTweet tweet{string_field(t, "id"), string_field(t, "text")};
    if (tweet.id.empty()) throw InvalidArgument("empty tweet id");
    if (!ts.tweet_index.emplace(tweet.id, task.tweets.size()).second) {
      throw InvalidArgument("duplicate tweet '" + tweet.id + "' in task");
    }
    task.tweets.push_back(std::move(tweet));
  }
  const auto n = task.tweets.size();
  ts.status.resize(n);
  for (std::size_t i = 0; i < n; ++i) ts.status[i].tweet_id = task.tweets[i].id;
  ts.labels.resize(n);
  ts.adjudications.resize(n);
  ts.active.resize(n);
  ts.task = std::move(task);
  state.tasks.emplace(ts.task.task_id, std::move(ts));
}

void apply_label(State& state, const json& event, std::uint64_t seq) {
  auto& ts = state.task(string_field(event, "task_id"));
  const auto annotator = string_field(event, "annotator_id");
  const int a = ts.annotator_index(annotator);
  if (a < 0) throw NotAuthorized("annotator '" + annotator + "' is not assigned to task '" + ts.task.task_id + "'");
  const auto tweet_id = string_field(event, "tweet_id");
  const auto i = ts.tweet(tweet_id);
  const auto label = label_field(event, "label");
  ts.status[i].current[static_cast<std::size_t>(a)] = label;
  ts.labels[i].push_back(AnnotationRecord{seq, tweet_id, annotator, label, string_field(event, "timestamp")});
  ts.active[i].reset();
  ts.status[i].adjudicated = false;
}

void apply_adjudication(State& state, const json& event, std::uint64_t seq) {
  auto& ts = state.task(string_field(event, "task_id"));
  const auto tweet_id = string_field(event, "tweet_id");
  const auto i = ts.tweet(tweet_id);
  const auto label = label_field(event, "final_label");
  if (!ts.status[i].disagreement()) {
    throw Conflict("tweet '" + tweet_id + "' has no disagreement to adjudicate");
  }
  AdjudicationRecord record{seq, tweet_id, label, {}, string_field(event, "timestamp")};
  for (const auto& who : event.at("resolved_by")) record.resolved_by.push_back(who.get<std::string>());
  ts.adjudications[i].push_back(record);
  ts.active[i] = std::move(record);
  ts.status[i].adjudicated = true;
}

void apply_event(State& state, const json& event) {
  if (!event.is_object()) throw InvalidArgument("event is not an object");
  auto seq_it = event.find("seq");
  if (seq_it == event.end() || !seq_it->is_number_unsigned()) throw InvalidArgument("event lacks a sequence number");
  const auto seq = seq_it->get<std::uint64_t>();
  if (seq <= state.last_seq) {
    throw InvalidArgument("sequence number " + std::to_string(seq) + " does not increase past " +
                          std::to_string(state.last_seq));
  }
  const auto type = string_field(event, "type");
  if (type == "task") {
    apply_task(state, event);
  } else if (type == "label") {
    apply_label(state, event, seq);
  } else if (type == "adjudication") {
    apply_adjudication(state, event, seq);
  } else {
    throw InvalidArgument("unknown event type '" + type + "'");
  }
  state.last_seq = seq;
}

json label_or_null(const std::optional<StanceLabel>& label) {
  return label ? json(std::string(to_string(*label))) : json(nullptr);
}

json to_json(const AnnotationRecord& r) {
  return {{"seq", r.seq},
          {"tweet_id", r.tweet_id},
          {"annotator_id", r.annotator_id},
          {"label", to_string(r.label)},
          {"timestamp", r.timestamp}};
}

json to_json(const AdjudicationRecord& r) {
  return {{"seq", r.seq},
          {"tweet_id", r.tweet_id},
          {"final_label", to_string(r.final_label)},
          {"resolved_by", r.resolved_by},
          {"timestamp", r.timestamp}};
}

}  // namespace

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  ::gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct AnnotationStore::Impl {
  std::filesystem::path path;
  Clock clock;
  std::mutex write_mutex;
  mutable std::mutex snapshot_mutex;
  std::shared_ptr<const State> state = std::make_shared<State>();
  std::ofstream log;

  std::shared_ptr<const State> snapshot() const {
    std::lock_guard lock(snapshot_mutex);
    return state;
  }

  // Validates `event` against a copy of the state, appends it, then publishes.
  std::shared_ptr<const State> commit(json event) {
    std::lock_guard lock(write_mutex);
    auto next = std::make_shared<State>(*snapshot());
    event["seq"] = next->last_seq + 1;
    event["timestamp"] = clock();
    apply_event(*next, event);
    log << event.dump() << '\n';
    log.flush();
    if (!log) throw IoError("cannot append to " + path.string());
    std::lock_guard publish(snapshot_mutex);
    state = next;
    return next;
  }
};

AnnotationStore::AnnotationStore(std::filesystem::path path, Clock clock) : impl_(std::make_unique<Impl>()) {
  impl_->path = std::move(path);
  impl_->clock = std::move(clock);
  auto state = std::make_shared<State>();
  if (std::filesystem::exists(impl_->path)) {
    const auto source = impl_->path.string();
    detail::for_each_line(detail::read_file(impl_->path), [&](std::string_view line, std::size_t n) {
      const auto event = detail::parse_json_line(line, source, n);
      try {
        apply_event(*state, event);
      } catch (const std::exception& e) {
        throw ParseError(source, n, std::string("invalid event: ") + e.what());
      }
    });
  } else if (impl_->path.has_parent_path()) {
    std::filesystem::create_directories(impl_->path.parent_path());
  }
  impl_->state = std::move(state);
  impl_->log.open(impl_->path, std::ios::app | std::ios::binary);
  if (!impl_->log) throw IoError("cannot open event log " + impl_->path.string());
}

AnnotationStore::~AnnotationStore() = default;
AnnotationStore::AnnotationStore(AnnotationStore&&) noexcept = default;
AnnotationStore& AnnotationStore::operator=(AnnotationStore&&) noexcept = default;

const std::filesystem::path& AnnotationStore::path() const noexcept { return impl_->path; }

void AnnotationStore::create_task(const AnnotationTask& task) {
  json tweets = json::array();
  for (const auto& t : task.tweets) tweets.push_back({{"id", t.id}, {"text", t.text}});
  impl_->commit({{"type", "task"},
                 {"task_id", task.task_id},
                 {"annotators", {task.annotators[0], task.annotators[1]}},
                 {"tweets", std::move(tweets)}});
}

TweetStatus AnnotationStore::submit_label(const std::string& task_id, const std::string& annotator_id,
                                          const std::string& tweet_id, StanceLabel label) {
  auto state = impl_->commit({{"type", "label"},
                              {"task_id", task_id},
                              {"annotator_id", annotator_id},
                              {"tweet_id", tweet_id},
                              {"label", to_string(label)}});
  const auto& ts = state->task(task_id);
  return ts.status[ts.tweet(tweet_id)];
}

std::vector<Disagreement> AnnotationStore::disagreements(const std::string& task_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  std::vector<Disagreement> out;
  for (std::size_t i = 0; i < ts.status.size(); ++i) {
    const auto& s = ts.status[i];
    if (s.disagreement() && !ts.active[i]) {
      out.push_back({s.tweet_id, ts.task.tweets[i].text, {*s.current[0], *s.current[1]}});
    }
  }
  return out;
}

AdjudicationRecord AnnotationStore::adjudicate(const std::string& task_id, const std::string& tweet_id,
                                               StanceLabel final_label) {
  const auto before = impl_->snapshot();
  const auto& annotators = before->task(task_id).task.annotators;
  auto state = impl_->commit({{"type", "adjudication"},
                              {"task_id", task_id},
                              {"tweet_id", tweet_id},
                              {"final_label", to_string(final_label)},
                              {"resolved_by", {annotators[0], annotators[1]}}});
  const auto& ts = state->task(task_id);
  return *ts.active[ts.tweet(tweet_id)];
}

GoldResult AnnotationStore::gold_labels(const std::string& task_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  GoldResult result;
  for (std::size_t i = 0; i < ts.status.size(); ++i) {
    const auto& s = ts.status[i];
    if (s.complete() && !s.disagreement()) {
      result.gold.emplace(s.tweet_id, metrics::GoldLabel{s.tweet_id, *s.current[0], metrics::GoldOrigin::kAgreed});
    } else if (ts.active[i]) {
      result.gold.emplace(s.tweet_id,
                          metrics::GoldLabel{s.tweet_id, ts.active[i]->final_label, metrics::GoldOrigin::kAdjudicated});
    } else {
      result.pending.push_back(s.tweet_id);
    }
  }
  return result;
}

std::optional<TaskTweet> AnnotationStore::next_for(const std::string& task_id, const std::string& annotator_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  const int a = ts.annotator_index(annotator_id);
  if (a < 0) throw NotAuthorized("annotator '" + annotator_id + "' is not assigned to task '" + task_id + "'");
  for (std::size_t i = 0; i < ts.status.size(); ++i) {
    if (!ts.status[i].current[static_cast<std::size_t>(a)]) return ts.task.tweets[i];
  }
  return std::nullopt;
}

Progress AnnotationStore::progress(const std::string& task_id, const std::string& annotator_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  const int a = ts.annotator_index(annotator_id);
  if (a < 0) throw NotAuthorized("annotator '" + annotator_id + "' is not assigned to task '" + task_id + "'");
  Progress p;
  p.total = ts.status.size();
  for (std::size_t i = 0; i < ts.status.size(); ++i) {
    if (ts.status[i].current[static_cast<std::size_t>(a)]) ++p.labelled;
    if (ts.status[i].disagreement() && !ts.active[i]) ++p.disagreements;
  }
  p.remaining = p.total - p.labelled;
  return p;
}

AnnotationTask AnnotationStore::task(const std::string& task_id) const { return impl_->snapshot()->task(task_id).task; }

std::vector<std::string> AnnotationStore::task_ids() const {
  const auto state = impl_->snapshot();
  std::vector<std::string> ids;
  for (const auto& [id, ts] : state->tasks) ids.push_back(id);
  return ids;
}

TweetStatus AnnotationStore::status(const std::string& task_id, const std::string& tweet_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  return ts.status[ts.tweet(tweet_id)];
}

std::vector<AnnotationRecord> AnnotationStore::label_history(const std::string& task_id,
                                                             const std::string& tweet_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  return ts.labels[ts.tweet(tweet_id)];
}

std::vector<AdjudicationRecord> AnnotationStore::adjudication_history(const std::string& task_id,
                                                                      const std::string& tweet_id) const {
  const auto state = impl_->snapshot();
  const auto& ts = state->task(task_id);
  return ts.adjudications[ts.tweet(tweet_id)];
}

std::uint64_t AnnotationStore::last_seq() const { return impl_->snapshot()->last_seq; }

std::string AnnotationStore::dump_state() const {
  const auto state = impl_->snapshot();
  json tasks = json::object();
  for (const auto& [id, ts] : state->tasks) {
    json tweets = json::array();
    for (std::size_t i = 0; i < ts.status.size(); ++i) {
      json labels = json::array();
      for (const auto& r : ts.labels[i]) labels.push_back(to_json(r));
      json adjudications = json::array();
      for (const auto& r : ts.adjudications[i]) adjudications.push_back(to_json(r));
      tweets.push_back({{"id", ts.task.tweets[i].id},
                        {"text", ts.task.tweets[i].text},
                        {"current", {label_or_null(ts.status[i].current[0]), label_or_null(ts.status[i].current[1])}},
                        {"active_adjudication", ts.active[i] ? to_json(*ts.active[i]) : json(nullptr)},
                        {"label_history", std::move(labels)},
                        {"adjudication_history", std::move(adjudications)}});
    }
    tasks[id] = {{"annotators", {ts.task.annotators[0], ts.task.annotators[1]}}, {"tweets", std::move(tweets)}};
  }
  return json{{"last_seq", state->last_seq}, {"tasks", std::move(tasks)}}.dump(2);
}

}  // namespace stancekit::annostore
