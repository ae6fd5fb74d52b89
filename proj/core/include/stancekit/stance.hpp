#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stancekit/hypothesis.hpp"
#include "stancekit/ingest.hpp"
#include "stancekit/labels.hpp"
#include "stancekit/nli_gateway.hpp"

namespace stancekit::stance {

struct StanceDistribution {
  double favor = 0.0;
  double against = 0.0;
  double neutral = 0.0;

  friend bool operator==(const StanceDistribution&, const StanceDistribution&) = default;
};

bool is_valid(const StanceDistribution& d, double tolerance = nli::kUnitSumTolerance) noexcept;

struct TweetStance {
  std::string tweet_id;
  std::string party;
  int year = 0;
  std::map<std::string, StanceDistribution> per_hypothesis;
  StanceDistribution aggregated;
  StanceLabel label = StanceLabel::kNeutral;
  double favor_prob = 0.0;

  friend bool operator==(const TweetStance&, const TweetStance&) = default;
};

// pro_target: (favor, against, neutral) = (entail, contra, neutral)
// anti_target: (favor, against, neutral) = (contra, entail, neutral)
StanceDistribution to_stance_space(const nli::EntailmentDistribution& d, hypothesis::Polarity polarity);

// Componentwise mean. Summation order is canonical, so any permutation of
// `dists` gives a bit-identical result. Throws InvalidArgument on empty input.
StanceDistribution aggregate(std::span<const StanceDistribution> dists);

// Argmax; exact ties prefer neutral, then against, then favor.
StanceLabel classify(const StanceDistribution& d) noexcept;

// Builds per-tweet stances from entailment scores laid out tweet-major:
// scores[t * set.size() + h] belongs to (tweets[t], set.hypotheses[h]).
std::vector<TweetStance> assemble(std::span<const ingest::CleanTweet> tweets, const hypothesis::HypothesisSet& set,
                                  std::span<const nli::EntailmentDistribution> scores);

// Premise/hypothesis pairs in the layout assemble() expects.
std::vector<nli::PremiseHypothesisPair> make_pairs(std::span<const ingest::CleanTweet> tweets,
                                                   const hypothesis::HypothesisSet& set);

// The k stances with highest favor_prob, descending; ties by ascending tweet_id.
// Throws InvalidArgument when k is zero or exceeds the input size.
std::vector<TweetStance> rank_top_k(std::span<const TweetStance> stances, std::size_t k);

std::string to_jsonl(std::span<const TweetStance> stances);
std::vector<TweetStance> parse_stances(std::string_view jsonl, const std::string& source = "<memory>");
std::vector<TweetStance> load_stances(const std::filesystem::path& path);

}  // namespace stancekit::stance
