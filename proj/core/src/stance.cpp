#include "stancekit/stance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "io_util.hpp"
#include "stancekit/error.hpp"

namespace stancekit::stance {

namespace {

using detail::json;

json to_json(const StanceDistribution& d) {
  return json{{"favor", d.favor}, {"against", d.against}, {"neutral", d.neutral}};
}

StanceDistribution distribution_from_json(const json& j, const std::string& source, std::size_t line) {
  if (!j.is_object()) throw ParseError(source, line, "stance distribution must be an object");
  return {detail::require_number(j, "favor", source, line), detail::require_number(j, "against", source, line),
          detail::require_number(j, "neutral", source, line)};
}

// Mean of `values` summed in ascending order, clamped into [min, max].
double canonical_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  const double sum = std::accumulate(values.begin(), values.end(), 0.0);
  const double mean = sum / static_cast<double>(values.size());
  return std::clamp(mean, values.front(), values.back());
}

}  // namespace

bool is_valid(const StanceDistribution& d, double tolerance) noexcept {
  for (double v : {d.favor, d.against, d.neutral}) {
    if (!std::isfinite(v) || v < 0.0) return false;
  }
  return std::abs(d.neutral + (d.favor + d.against) - 1.0) <= tolerance;
}

StanceDistribution to_stance_space(const nli::EntailmentDistribution& d, hypothesis::Polarity polarity) {
  if (!nli::is_valid(d)) throw InvalidArgument("entailment distribution is not a valid probability distribution");
  if (polarity == hypothesis::Polarity::kProTarget) return {d.entailment, d.contradiction, d.neutral};
  return {d.contradiction, d.entailment, d.neutral};
}

StanceDistribution aggregate(std::span<const StanceDistribution> dists) {
  if (dists.empty()) throw InvalidArgument("cannot aggregate an empty list of stance distributions");
  std::vector<double> favor;
  std::vector<double> against;
  std::vector<double> neutral;
  favor.reserve(dists.size());
  against.reserve(dists.size());
  neutral.reserve(dists.size());
  for (const auto& d : dists) {
    if (!is_valid(d)) throw InvalidArgument("stance distribution is not a valid probability distribution");
    favor.push_back(d.favor);
    against.push_back(d.against);
    neutral.push_back(d.neutral);
  }
  return {canonical_mean(favor), canonical_mean(against), canonical_mean(neutral)};
}

StanceLabel classify(const StanceDistribution& d) noexcept {
  // Preference order on exact ties: neutral, against, favor.
  StanceLabel best = StanceLabel::kNeutral;
  double best_value = d.neutral;
  if (d.against > best_value) {
    best = StanceLabel::kAgainst;
    best_value = d.against;
  }
  if (d.favor > best_value) best = StanceLabel::kFavor;
  return best;
}

std::vector<nli::PremiseHypothesisPair> make_pairs(std::span<const ingest::CleanTweet> tweets,
                                                   const hypothesis::HypothesisSet& set) {
  std::vector<nli::PremiseHypothesisPair> pairs;
  pairs.reserve(tweets.size() * set.hypotheses.size());
  for (const auto& tweet : tweets) {
    for (const auto& h : set.hypotheses) pairs.push_back({tweet.id, h.id, tweet.text, h.text});
  }
  return pairs;
}

std::vector<TweetStance> assemble(std::span<const ingest::CleanTweet> tweets, const hypothesis::HypothesisSet& set,
                                  std::span<const nli::EntailmentDistribution> scores) {
  hypothesis::validate(set);
  const auto per_tweet = set.hypotheses.size();
  if (scores.size() != tweets.size() * per_tweet) {
    throw InvalidArgument("expected " + std::to_string(tweets.size() * per_tweet) + " scores, got " +
                          std::to_string(scores.size()));
  }
  std::vector<TweetStance> out;
  out.reserve(tweets.size());
  std::vector<StanceDistribution> mapped(per_tweet);
  for (std::size_t t = 0; t < tweets.size(); ++t) {
    TweetStance stance;
    stance.tweet_id = tweets[t].id;
    stance.party = tweets[t].party;
    stance.year = tweets[t].year;
    for (std::size_t h = 0; h < per_tweet; ++h) {
      mapped[h] = to_stance_space(scores[t * per_tweet + h], set.hypotheses[h].polarity);
      stance.per_hypothesis.emplace(set.hypotheses[h].id, mapped[h]);
    }
    stance.aggregated = aggregate(mapped);
    stance.label = classify(stance.aggregated);
    stance.favor_prob = stance.aggregated.favor;
    out.push_back(std::move(stance));
  }
  return out;
}

std::vector<TweetStance> rank_top_k(std::span<const TweetStance> stances, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k > stances.size()) {
    throw InvalidArgument("k = " + std::to_string(k) + " exceeds the " + std::to_string(stances.size()) +
                          " available tweets");
  }
  std::vector<std::size_t> order(stances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto& x = stances[a];
                      const auto& y = stances[b];
                      if (x.favor_prob != y.favor_prob) return x.favor_prob > y.favor_prob;
                      if (x.tweet_id != y.tweet_id) return x.tweet_id < y.tweet_id;
                      return a < b;
                    });
  std::vector<TweetStance> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(stances[order[i]]);
  return out;
}

std::string to_jsonl(std::span<const TweetStance> stances) {
  std::string out;
  for (const auto& s : stances) {
    json per_hypothesis = json::object();
    for (const auto& [id, d] : s.per_hypothesis) per_hypothesis[id] = to_json(d);
    json record = {{"tweet_id", s.tweet_id},
                   {"party", s.party},
                   {"year", s.year},
                   {"per_hypothesis", std::move(per_hypothesis)},
                   {"aggregated", to_json(s.aggregated)},
                   {"label", to_string(s.label)},
                   {"favor_prob", s.favor_prob}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<TweetStance> parse_stances(std::string_view jsonl, const std::string& source) {
  std::vector<TweetStance> out;
  detail::for_each_line(jsonl, [&](std::string_view line, std::size_t n) {
    const auto record = detail::parse_json_line(line, source, n);
    TweetStance s;
    s.tweet_id = detail::require_string(record, "tweet_id", source, n);
    s.party = detail::require_string(record, "party", source, n);
    s.year = detail::require_int(record, "year", source, n);
    auto per = record.find("per_hypothesis");
    if (per == record.end() || !per->is_object()) throw ParseError(source, n, "missing object 'per_hypothesis'");
    for (const auto& [id, d] : per->items()) s.per_hypothesis.emplace(id, distribution_from_json(d, source, n));
    auto agg = record.find("aggregated");
    if (agg == record.end()) throw ParseError(source, n, "missing field 'aggregated'");
    s.aggregated = distribution_from_json(*agg, source, n);
    const auto label = detail::require_string(record, "label", source, n);
    auto parsed = parse_stance_label(label);
    if (!parsed) throw ParseError(source, n, "unknown label '" + label + "'");
    s.label = *parsed;
    s.favor_prob = detail::require_number(record, "favor_prob", source, n);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<TweetStance> load_stances(const std::filesystem::path& path) {
  return parse_stances(detail::read_file(path), path.string());
}

}  // namespace stancekit::stance
