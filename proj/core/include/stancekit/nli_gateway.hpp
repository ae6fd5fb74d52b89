#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stancekit/error.hpp"

namespace stancekit::nli {

// Three-way entailment probabilities for one (premise, hypothesis) pair.
struct EntailmentDistribution {
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;

  friend bool operator==(const EntailmentDistribution&, const EntailmentDistribution&) = default;
};

// Raw backend outputs within this distance of unit sum are renormalized;
// anything further off is rejected.
inline constexpr double kRenormalizeTolerance = 1e-3;
inline constexpr double kUnitSumTolerance = 1e-6;

// Finite, non-negative, and summing to one within `tolerance`.
bool is_valid(const EntailmentDistribution& d, double tolerance = kUnitSumTolerance) noexcept;

struct PremiseHypothesisPair {
  std::string tweet_id;
  std::string hypothesis_id;
  std::string premise;
  std::string hypothesis;
};

// Wire-level records.
struct ScoreRequest {
  std::string id;
  std::string premise;
  std::string hypothesis;

  friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

struct RawScore {
  std::string id;
  double entailment = 0.0;
  double neutral = 0.0;
  double contradiction = 0.0;
};

struct Handshake {
  int protocol = 1;
  bool concurrent = false;
};

inline constexpr int kProtocolVersion = 1;

// Backend could not be reached or stopped responding. Retried by the gateway.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Backend replied with something that violates the wire contract. Not retried.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Checks a raw triple and returns it as an admitted distribution. Throws
// ProtocolError on negative or non-finite values or when the sum is more than
// kRenormalizeTolerance away from one.
EntailmentDistribution admit(double entailment, double neutral, double contradiction);

std::string encode_request(const ScoreRequest& request);
ScoreRequest decode_request(std::string_view line);
std::string encode_response(const RawScore& score);
// Throws ProtocolError on malformed lines, missing fields, negative values
// and `{"id": null, "error": ...}` replies.
RawScore decode_response(std::string_view line);
std::string encode_handshake(const Handshake& handshake);
Handshake decode_handshake(std::string_view line);
// `{"id": <id or null>, "error": <message>}`
std::string encode_error_response(const std::optional<std::string>& id, std::string_view message);

// A scorer handle. Implementations need not be thread-safe unless
// concurrent() returns true; the gateway serializes access otherwise.
class Scorer {
 public:
  virtual ~Scorer() = default;
  Scorer() = default;
  Scorer(const Scorer&) = delete;
  Scorer& operator=(const Scorer&) = delete;

  // One RawScore per request; order may differ, ids must match.
  virtual std::vector<RawScore> score(std::span<const ScoreRequest> batch) = 0;
  virtual bool concurrent() const noexcept { return false; }
  // Called before a retry after a TransportError.
  virtual void reset() {}

  std::mutex& access_mutex() noexcept { return access_mutex_; }

 private:
  std::mutex access_mutex_;
};

struct MockRule {
  std::optional<std::string> premise_contains;
  std::optional<std::string> hypothesis_contains;
  EntailmentDistribution distribution;
};

// Deterministic rule-table scorer. The first rule whose substrings all occur
// wins; `fallback` applies otherwise.
class MockScorer final : public Scorer {
 public:
  MockScorer(std::vector<MockRule> rules, EntailmentDistribution fallback);

  std::vector<RawScore> score(std::span<const ScoreRequest> batch) override;
  bool concurrent() const noexcept override { return true; }

  EntailmentDistribution lookup(std::string_view premise, std::string_view hypothesis) const;

  const std::vector<MockRule>& rules() const noexcept { return rules_; }
  const EntailmentDistribution& fallback() const noexcept { return fallback_; }

 private:
  std::vector<MockRule> rules_;
  EntailmentDistribution fallback_;
};

// Throws InvalidArgument when any rule or the fallback is not a valid distribution.
std::unique_ptr<MockScorer> make_mock_scorer(std::vector<MockRule> rules, EntailmentDistribution fallback);

// JSON document {"rules": [{"premise_contains"?, "hypothesis_contains"?,
// "entailment", "neutral", "contradiction"}...], "default": {...}}.
std::unique_ptr<MockScorer> load_mock_scorer(const std::filesystem::path& path);
std::unique_ptr<MockScorer> parse_mock_scorer(std::string_view json, const std::string& source = "<memory>");

struct ProcessOptions {
  std::chrono::milliseconds timeout{30'000};
};

// Child process speaking line-delimited JSON over stdin/stdout. The command
// runs through /bin/sh. The handshake line is read on construction.
class ProcessScorer final : public Scorer {
 public:
  explicit ProcessScorer(std::string command, ProcessOptions options = {});
  ~ProcessScorer() override;

  std::vector<RawScore> score(std::span<const ScoreRequest> batch) override;
  bool concurrent() const noexcept override { return handshake_.concurrent; }
  void reset() override;

  const Handshake& handshake() const noexcept { return handshake_; }

 private:
  void start();
  void stop() noexcept;
  std::string read_line(std::chrono::steady_clock::time_point deadline);

  std::string command_;
  ProcessOptions options_;
  Handshake handshake_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct HttpOptions {
  std::chrono::milliseconds timeout{30'000};
  bool concurrent = false;
};

// POSTs the batch as a JSON array to `<url>/score`; expects an array of
// response objects back.
class HttpScorer final : public Scorer {
 public:
  explicit HttpScorer(std::string url, HttpOptions options = {});

  std::vector<RawScore> score(std::span<const ScoreRequest> batch) override;
  bool concurrent() const noexcept override { return options_.concurrent; }

 private:
  std::string scheme_host_port_;
  std::string base_path_;
  HttpOptions options_;
};

// Backend selector as written in configs: `mock:<rules.json>`,
// `process:<command>`, or an `http://` URL.
struct BackendSpec {
  enum class Kind { kMock, kProcess, kHttp };
  Kind kind = Kind::kMock;
  std::string target;
};

BackendSpec parse_backend_spec(std::string_view text);
std::unique_ptr<Scorer> make_scorer(const BackendSpec& spec);

struct GatewayOptions {
  std::size_t batch_size = 32;
  // Upper bound on batches in flight; only used when the scorer is concurrent.
  std::size_t max_in_flight = 4;
  int retries = 2;
  std::chrono::milliseconds backoff{100};
};

// One admitted distribution per pair, in input order.
std::vector<EntailmentDistribution> score_batch(std::span<const PremiseHypothesisPair> pairs, Scorer& scorer,
                                                const GatewayOptions& options = {});

}  // namespace stancekit::nli
