#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "stancekit/ingest.hpp"
#include "stancekit/labels.hpp"
#include "stancekit/stance.hpp"

namespace stancekit::metrics {

enum class GoldOrigin { kAgreed, kAdjudicated };

std::string_view to_string(GoldOrigin origin) noexcept;

struct GoldLabel {
  std::string tweet_id;
  StanceLabel label = StanceLabel::kNeutral;
  GoldOrigin origin = GoldOrigin::kAgreed;

  friend bool operator==(const GoldLabel&, const GoldLabel&) = default;
};

using GoldMap = std::map<std::string, GoldLabel>;

// Line-delimited {tweet_id, label, origin}; duplicate tweet ids are rejected.
GoldMap parse_gold(std::string_view jsonl, const std::string& source = "<memory>");
GoldMap load_gold(const std::filesystem::path& path);
std::string to_jsonl(const GoldMap& gold);

struct PrecisionReport {
  std::size_t k = 0;
  double p_entail = 0.0;      // share of gold favor
  double p_nonneutral = 0.0;  // share of gold favor or against
  bool survey = false;
  bool filtered = false;
};

// Throws InvalidArgument when |topk| != k or any tweet lacks a gold label
// (the message names the tweet).
PrecisionReport topk_precision(std::span<const stance::TweetStance> topk, const GoldMap& gold, std::size_t k);

// Same counting rule over a plain id list; used for the random baselines.
PrecisionReport precision_of(std::span<const std::string> tweet_ids, const GoldMap& gold);

// Uniform sample without replacement via a partial Fisher-Yates shuffle driven
// by a seeded 64-bit Mersenne Twister. Fully specified, so identical seeds give
// identical samples on every platform.
std::vector<ingest::CleanTweet> sample_baseline(std::span<const ingest::CleanTweet> corpus, std::size_t n,
                                                std::uint64_t seed);

enum class Grouping { kByParty, kByPartyYear };

struct PartyScore {
  std::string party;
  std::optional<int> year;  // nullopt: all years pooled
  double score = 0.0;

  friend bool operator==(const PartyScore&, const PartyScore&) = default;
};

inline const std::set<int> kDefaultReverseCoded{1, 4, 6, 7};

// Mean Likert value per group after mapping reverse-coded items x -> 6 - x.
// Sorted by party, then year.
std::vector<PartyScore> panel_scores(std::span<const ingest::PanelResponse> responses,
                                     const std::set<int>& reverse_coded = kDefaultReverseCoded,
                                     Grouping grouping = Grouping::kByParty);

// Highest score first; ties by party name, then year.
std::vector<PartyScore> rank_parties(std::vector<PartyScore> scores);

// Average ranks for tied values (1-based).
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Throws InvalidArgument on length
// mismatch, fewer than two points, or constant input.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

struct CorrelationReport {
  std::optional<std::size_t> k;  // nullopt: all tweets
  double rho = 0.0;
  std::size_t n_pairs = 0;
};

// Restrict to the top-k tweets (or all), average favor_prob per group, pair
// with the matching score and correlate. Groups are (party, year) when the
// scores carry years and party otherwise. Throws InvalidArgument when fewer
// than two groups match.
CorrelationReport party_level_eval(std::span<const stance::TweetStance> stances,
                                   std::span<const PartyScore> party_scores, std::optional<std::size_t> k);

}  // namespace stancekit::metrics
