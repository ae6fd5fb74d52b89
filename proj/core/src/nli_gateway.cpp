#include "stancekit/nli_gateway.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "io_util.hpp"

namespace stancekit::nli {

namespace {

using detail::json;

std::string quote(std::string_view s) {
  return json(std::string(s)).dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string number(double v) { return json(v).dump(); }

json parse_object(std::string_view line, const char* what) {
  json record = json::parse(line, nullptr, false);
  if (record.is_discarded()) throw ProtocolError(std::string("malformed JSON in ") + what);
  if (!record.is_object()) throw ProtocolError(std::string(what) + " is not a JSON object");
  return record;
}

double probability_field(const json& record, const char* field) {
  auto it = record.find(field);
  if (it == record.end()) throw ProtocolError(std::string("response missing field '") + field + "'");
  if (!it->is_number()) throw ProtocolError(std::string("response field '") + field + "' is not a number");
  return it->get<double>();
}

EntailmentDistribution distribution_from_json(const json& record, const std::string& where) {
  EntailmentDistribution d;
  for (auto [field, slot] : {std::pair{"entailment", &d.entailment}, std::pair{"neutral", &d.neutral},
                             std::pair{"contradiction", &d.contradiction}}) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_number()) {
      throw InvalidArgument(where + ": '" + field + "' must be a number");
    }
    *slot = it->get<double>();
  }
  return d;
}

std::string describe(const EntailmentDistribution& d) {
  std::ostringstream out;
  out << '(' << d.entailment << ", " << d.neutral << ", " << d.contradiction << ')';
  return out.str();
}

bool contains(std::string_view haystack, const std::optional<std::string>& needle) {
  return !needle || haystack.find(*needle) != std::string_view::npos;
}

}  // namespace

bool is_valid(const EntailmentDistribution& d, double tolerance) noexcept {
  for (double v : {d.entailment, d.neutral, d.contradiction}) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return std::abs(d.neutral + (d.entailment + d.contradiction) - 1.0) <= tolerance;
}

EntailmentDistribution admit(double entailment, double neutral, double contradiction) {
  for (double v : {entailment, neutral, contradiction}) {
    if (!std::isfinite(v)) throw ProtocolError("non-finite probability");
    if (v < 0.0) throw ProtocolError("negative probability " + number(v));
  }
  // Symmetric in (entailment, contradiction) so swapping them is exact.
  const double sum = neutral + (entailment + contradiction);
  const double deviation = std::abs(sum - 1.0);
  if (deviation > kRenormalizeTolerance) {
    throw ProtocolError("probabilities sum to " + number(sum) + "; deviation " + number(deviation) +
                        " exceeds " + number(kRenormalizeTolerance));
  }
  if (deviation == 0.0) return {entailment, neutral, contradiction};
  return {entailment / sum, neutral / sum, contradiction / sum};
}

std::string encode_request(const ScoreRequest& request) {
  return R"({"id": )" + quote(request.id) + R"(, "premise": )" + quote(request.premise) + R"(, "hypothesis": )" +
         quote(request.hypothesis) + "}";
}

ScoreRequest decode_request(std::string_view line) {
  const auto record = parse_object(line, "request");
  ScoreRequest request;
  for (auto [field, slot] : {std::pair{"id", &request.id}, std::pair{"premise", &request.premise},
                             std::pair{"hypothesis", &request.hypothesis}}) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_string()) {
      throw ProtocolError(std::string("request field '") + field + "' missing or not a string");
    }
    *slot = it->get<std::string>();
  }
  return request;
}

std::string encode_response(const RawScore& score) {
  return R"({"id": )" + quote(score.id) + R"(, "entailment": )" + number(score.entailment) + R"(, "neutral": )" +
         number(score.neutral) + R"(, "contradiction": )" + number(score.contradiction) + "}";
}

RawScore decode_response(std::string_view line) {
  const auto record = parse_object(line, "response");
  if (auto err = record.find("error"); err != record.end()) {
    throw ProtocolError("backend reported error: " + (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  auto id = record.find("id");
  if (id == record.end() || !id->is_string()) throw ProtocolError("response field 'id' missing or not a string");
  RawScore score;
  score.id = id->get<std::string>();
  score.entailment = probability_field(record, "entailment");
  score.neutral = probability_field(record, "neutral");
  score.contradiction = probability_field(record, "contradiction");
  for (double v : {score.entailment, score.neutral, score.contradiction}) {
    if (v < 0.0) throw ProtocolError("negative probability in response '" + score.id + "'");
  }
  return score;
}

std::string encode_handshake(const Handshake& handshake) {
  return R"({"protocol": )" + std::to_string(handshake.protocol) + R"(, "concurrent": )" +
         (handshake.concurrent ? "true" : "false") + "}";
}

Handshake decode_handshake(std::string_view line) {
  const auto record = parse_object(line, "handshake");
  auto protocol = record.find("protocol");
  auto concurrent = record.find("concurrent");
  if (protocol == record.end() || !protocol->is_number_integer()) {
    throw ProtocolError("handshake field 'protocol' missing or not an integer");
  }
  if (concurrent == record.end() || !concurrent->is_boolean()) {
    throw ProtocolError("handshake field 'concurrent' missing or not a boolean");
  }
  Handshake handshake{protocol->get<int>(), concurrent->get<bool>()};
  if (handshake.protocol != kProtocolVersion) {
    throw ProtocolError("unsupported protocol version " + std::to_string(handshake.protocol));
  }
  return handshake;
}

std::string encode_error_response(const std::optional<std::string>& id, std::string_view message) {
  return R"({"id": )" + (id ? quote(*id) : std::string("null")) + R"(, "error": )" + quote(message) + "}";
}

MockScorer::MockScorer(std::vector<MockRule> rules, EntailmentDistribution fallback)
    : rules_(std::move(rules)), fallback_(fallback) {}

EntailmentDistribution MockScorer::lookup(std::string_view premise, std::string_view hypothesis) const {
  for (const auto& rule : rules_) {
    if (contains(premise, rule.premise_contains) && contains(hypothesis, rule.hypothesis_contains)) {
      return rule.distribution;
    }
  }
  return fallback_;
}

std::vector<RawScore> MockScorer::score(std::span<const ScoreRequest> batch) {
  std::vector<RawScore> out;
  out.reserve(batch.size());
  for (const auto& request : batch) {
    const auto d = lookup(request.premise, request.hypothesis);
    out.push_back(RawScore{request.id, d.entailment, d.neutral, d.contradiction});
  }
  return out;
}

std::unique_ptr<MockScorer> make_mock_scorer(std::vector<MockRule> rules, EntailmentDistribution fallback) {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (!is_valid(rules[i].distribution)) {
      throw InvalidArgument("mock rule " + std::to_string(i) + " has invalid distribution " +
                            describe(rules[i].distribution));
    }
  }
  if (!is_valid(fallback)) throw InvalidArgument("mock default distribution " + describe(fallback) + " is invalid");
  return std::make_unique<MockScorer>(std::move(rules), fallback);
}

std::unique_ptr<MockScorer> parse_mock_scorer(std::string_view text, const std::string& source) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError(source, 0, "expected a JSON object");
  std::vector<MockRule> rules;
  try {
    if (auto it = doc.find("rules"); it != doc.end()) {
      if (!it->is_array()) throw ParseError(source, 0, "'rules' must be an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& r = (*it)[i];
        const auto where = "rule " + std::to_string(i);
        if (!r.is_object()) throw ParseError(source, 0, where + " is not an object");
        MockRule rule;
        for (auto [field, slot] : {std::pair{"premise_contains", &rule.premise_contains},
                                   std::pair{"hypothesis_contains", &rule.hypothesis_contains}}) {
          if (auto f = r.find(field); f != r.end()) {
            if (!f->is_string()) throw ParseError(source, 0, where + ": '" + field + "' must be a string");
            *slot = f->get<std::string>();
          }
        }
        rule.distribution = distribution_from_json(r, where);
        rules.push_back(std::move(rule));
      }
    }
    EntailmentDistribution fallback{0.0, 1.0, 0.0};
    if (auto it = doc.find("default"); it != doc.end()) {
      if (!it->is_object()) throw ParseError(source, 0, "'default' must be an object");
      fallback = distribution_from_json(*it, "default");
    }
    return make_mock_scorer(std::move(rules), fallback);
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
}

std::unique_ptr<MockScorer> load_mock_scorer(const std::filesystem::path& path) {
  return parse_mock_scorer(detail::read_file(path), path.string());
}

BackendSpec parse_backend_spec(std::string_view text) {
  if (text.rfind("mock:", 0) == 0 && text.size() > 5) return {BackendSpec::Kind::kMock, std::string(text.substr(5))};
  if (text.rfind("process:", 0) == 0 && text.size() > 8) {
    return {BackendSpec::Kind::kProcess, std::string(text.substr(8))};
  }
  if (text.rfind("http://", 0) == 0) return {BackendSpec::Kind::kHttp, std::string(text)};
  throw InvalidArgument("backend must be 'mock:<rules file>', 'process:<command>' or an http:// URL, got '" +
                        std::string(text) + "'");
}

std::unique_ptr<Scorer> make_scorer(const BackendSpec& spec) {
  switch (spec.kind) {
    case BackendSpec::Kind::kMock:
      return load_mock_scorer(spec.target);
    case BackendSpec::Kind::kProcess:
      return std::make_unique<ProcessScorer>(spec.target);
    case BackendSpec::Kind::kHttp:
      return std::make_unique<HttpScorer>(spec.target);
  }
  throw InvalidArgument("unknown backend kind");
}

namespace {

void admit_batch(std::span<const ScoreRequest> requests, std::vector<RawScore> raw, std::size_t offset,
                 std::vector<EntailmentDistribution>& out) {
  if (raw.size() != requests.size()) {
    throw ProtocolError("backend returned " + std::to_string(raw.size()) + " scores for " +
                        std::to_string(requests.size()) + " requests");
  }
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < requests.size(); ++i) position.emplace(requests[i].id, i);
  std::vector<bool> seen(requests.size(), false);
  for (const auto& score : raw) {
    auto it = position.find(score.id);
    if (it == position.end()) throw ProtocolError("response for unknown id '" + score.id + "'");
    if (seen[it->second]) throw ProtocolError("duplicate response for id '" + score.id + "'");
    seen[it->second] = true;
    try {
      out[offset + it->second] = admit(score.entailment, score.neutral, score.contradiction);
    } catch (const ProtocolError& e) {
      throw ProtocolError("response '" + score.id + "': " + e.what());
    }
  }
}

}  // namespace

std::vector<EntailmentDistribution> score_batch(std::span<const PremiseHypothesisPair> pairs, Scorer& scorer,
                                                const GatewayOptions& options) {
  if (options.batch_size == 0) throw InvalidArgument("batch size must be positive");
  if (options.retries < 0) throw InvalidArgument("retries must be non-negative");
  std::vector<ScoreRequest> requests;
  requests.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& pair = pairs[i];
    if (pair.premise.empty() || pair.hypothesis.empty()) {
      throw InvalidArgument("pair " + std::to_string(i) + " (" + pair.tweet_id + ", " + pair.hypothesis_id +
                            ") has empty text");
    }
    requests.push_back(ScoreRequest{std::to_string(i), pair.premise, pair.hypothesis});
  }

  std::vector<EntailmentDistribution> out(pairs.size());
  const std::size_t n_batches = (requests.size() + options.batch_size - 1) / options.batch_size;

  auto run_batch = [&](std::size_t b) {
    const std::size_t offset = b * options.batch_size;
    const auto batch = std::span<const ScoreRequest>(requests).subspan(
        offset, std::min(options.batch_size, requests.size() - offset));
    std::string last_error;
    for (int attempt = 0; attempt <= options.retries; ++attempt) {
      try {
        std::vector<RawScore> raw;
        if (scorer.concurrent()) {
          raw = scorer.score(batch);
        } else {
          std::lock_guard lock(scorer.access_mutex());
          raw = scorer.score(batch);
        }
        admit_batch(batch, std::move(raw), offset, out);
        return;
      } catch (const TransportError& e) {
        last_error = e.what();
        if (attempt == options.retries) break;
        std::this_thread::sleep_for(options.backoff * (1 << attempt));
        std::lock_guard lock(scorer.access_mutex());
        try {
          scorer.reset();
        } catch (const TransportError& reset_error) {
          last_error = reset_error.what();
        }
      }
    }
    throw TransportError("backend failed after " + std::to_string(options.retries + 1) + " attempts: " + last_error);
  };

  const std::size_t workers = scorer.concurrent() ? std::min(options.max_in_flight, n_batches) : 1;
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_batches; ++b) run_batch(b);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        for (std::size_t b = next++; b < n_batches && !failed; b = next++) {
          try {
            run_batch(b);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace stancekit::nli
