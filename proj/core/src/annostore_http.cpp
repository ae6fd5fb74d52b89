#include <httplib.h>
#include <json.hpp>

#include "stancekit/annostore.hpp"

namespace stancekit::annostore {

namespace {

using json = nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw InvalidArgument("request body must be a JSON object");
  return body;
}

std::string body_string(const json& body, const char* field) {
  auto it = body.find(field);
  if (it == body.end() || !it->is_string()) throw InvalidArgument(std::string("missing string field '") + field + "'");
  return it->get<std::string>();
}

StanceLabel body_label(const json& body, const char* field) {
  const auto text = body_string(body, field);
  auto label = parse_stance_label(text);
  if (!label) throw InvalidArgument("invalid label '" + text + "'");
  return *label;
}

std::string annotator_param(const httplib::Request& req) {
  if (!req.has_param("annotator")) throw InvalidArgument("missing query parameter 'annotator'");
  return req.get_param_value("annotator");
}

json status_json(const AnnotationTask& task, const TweetStatus& status) {
  json labels = json::object();
  json pending = json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    labels[task.annotators[i]] = status.current[i] ? json(std::string(to_string(*status.current[i]))) : json(nullptr);
    if (!status.current[i]) pending.push_back(task.annotators[i]);
  }
  return {{"tweet_id", status.tweet_id},
          {"labels", std::move(labels)},
          {"pending_for", std::move(pending)},
          {"disagreement", status.disagreement()},
          {"adjudicated", status.adjudicated}};
}

// Runs `handler`, mapping library errors onto HTTP status codes.
template <typename Handler>
httplib::Server::Handler guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const NotFound& e) {
      reply(res, 404, {{"error", e.what()}});
    } catch (const NotAuthorized& e) {
      reply(res, 403, {{"error", e.what()}});
    } catch (const Conflict& e) {
      reply(res, 409, {{"error", e.what()}});
    } catch (const InvalidArgument& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  };
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationStore& store;
  httplib::Server server;

  explicit Impl(AnnotationStore& s) : store(s) {}
};

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : impl_(std::make_unique<Impl>(store)) {
  auto& server = impl_->server;
  auto& st = impl_->store;

  server.Post("/tasks", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                AnnotationTask task;
                task.task_id = body_string(body, "task_id");
                const auto& annotators = body.at("annotators");
                if (!annotators.is_array() || annotators.size() != 2) {
                  throw InvalidArgument("a task needs exactly two annotators");
                }
                task.annotators = {annotators[0].get<std::string>(), annotators[1].get<std::string>()};
                for (const auto& t : body.at("tweets")) {
                  task.tweets.push_back({body_string(t, "id"), body_string(t, "text")});
                }
                st.create_task(task);
                reply(res, 201, {{"task_id", task.task_id}, {"tweets", task.tweets.size()}});
              }));

  server.Get(R"(/tasks/([^/]+)/next)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
               const std::string task_id = req.matches[1];
               const auto next = st.next_for(task_id, annotator_param(req));
               if (!next) {
                 reply(res, 200, {{"task_id", task_id}, {"done", true}});
                 return;
               }
               reply(res, 200, {{"task_id", task_id}, {"done", false}, {"tweet_id", next->id}, {"text", next->text}});
             }));

  server.Get(R"(/tasks/([^/]+)/progress)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
               const auto p = st.progress(req.matches[1], annotator_param(req));
               reply(res, 200,
                     {{"total", p.total},
                      {"labelled", p.labelled},
                      {"remaining", p.remaining},
                      {"disagreements", p.disagreements}});
             }));

  server.Post(R"(/tasks/([^/]+)/labels)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                const std::string task_id = req.matches[1];
                const auto body = parse_body(req);
                const auto status = st.submit_label(task_id, body_string(body, "annotator_id"),
                                                    body_string(body, "tweet_id"), body_label(body, "label"));
                reply(res, 200, status_json(st.task(task_id), status));
              }));

  server.Get(R"(/tasks/([^/]+)/disagreements)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
               const std::string task_id = req.matches[1];
               const auto task = st.task(task_id);
               json out = json::array();
               for (const auto& d : st.disagreements(task_id)) {
                 out.push_back({{"tweet_id", d.tweet_id},
                                {"text", d.text},
                                {"labels",
                                 {{task.annotators[0], to_string(d.labels[0])},
                                  {task.annotators[1], to_string(d.labels[1])}}}});
               }
               reply(res, 200, out);
             }));

  server.Post(R"(/tasks/([^/]+)/adjudications)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
                const auto body = parse_body(req);
                const auto record =
                    st.adjudicate(req.matches[1], body_string(body, "tweet_id"), body_label(body, "final_label"));
                reply(res, 201,
                      {{"tweet_id", record.tweet_id},
                       {"final_label", to_string(record.final_label)},
                       {"resolved_by", record.resolved_by},
                       {"timestamp", record.timestamp},
                       {"seq", record.seq}});
              }));

  server.Get(R"(/tasks/([^/]+)/gold)", guarded([&st](const httplib::Request& req, httplib::Response& res) {
               const auto result = st.gold_labels(req.matches[1]);
               json gold = json::array();
               for (const auto& [id, g] : result.gold) {
                 gold.push_back({{"tweet_id", id}, {"label", to_string(g.label)}, {"origin", to_string(g.origin)}});
               }
               reply(res, 200, {{"gold", std::move(gold)}, {"pending", result.pending}});
             }));

  if (options.static_dir) {
    if (!server.set_mount_point("/", options.static_dir->string())) {
      throw IoError("cannot serve static assets from " + options.static_dir->string());
    }
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind to " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace stancekit::annostore
