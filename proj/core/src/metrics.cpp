#include "stancekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "io_util.hpp"
#include "stancekit/error.hpp"

namespace stancekit::metrics {

namespace {

using detail::json;

// Unbiased integer in [0, bound) by rejection.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine();
  while (x >= limit) x = engine();
  return x % bound;
}

PrecisionReport count_precision(std::size_t k, std::size_t favor, std::size_t nonneutral) {
  PrecisionReport report;
  report.k = k;
  report.p_entail = static_cast<double>(favor) / static_cast<double>(k);
  report.p_nonneutral = static_cast<double>(nonneutral) / static_cast<double>(k);
  return report;
}

using GroupKey = std::pair<std::string, int>;

}  // namespace

std::string_view to_string(GoldOrigin origin) noexcept {
  return origin == GoldOrigin::kAgreed ? "agreed" : "adjudicated";
}

GoldMap parse_gold(std::string_view jsonl, const std::string& source) {
  GoldMap gold;
  detail::for_each_line(jsonl, [&](std::string_view line, std::size_t n) {
    const auto record = detail::parse_json_line(line, source, n);
    GoldLabel g;
    g.tweet_id = detail::require_string(record, "tweet_id", source, n);
    const auto label = detail::require_string(record, "label", source, n);
    auto parsed = parse_stance_label(label);
    if (!parsed) throw ParseError(source, n, "unknown label '" + label + "'");
    g.label = *parsed;
    if (record.contains("origin")) {
      const auto origin = detail::require_string(record, "origin", source, n);
      if (origin == "agreed") {
        g.origin = GoldOrigin::kAgreed;
      } else if (origin == "adjudicated") {
        g.origin = GoldOrigin::kAdjudicated;
      } else {
        throw ParseError(source, n, "unknown origin '" + origin + "'");
      }
    }
    auto id = g.tweet_id;
    if (!gold.emplace(id, std::move(g)).second) throw ParseError(source, n, "duplicate gold label for '" + id + "'");
  });
  return gold;
}

GoldMap load_gold(const std::filesystem::path& path) { return parse_gold(detail::read_file(path), path.string()); }

std::string to_jsonl(const GoldMap& gold) {
  std::string out;
  for (const auto& [id, g] : gold) {
    out += json{{"tweet_id", id}, {"label", to_string(g.label)}, {"origin", to_string(g.origin)}}.dump();
    out += '\n';
  }
  return out;
}

PrecisionReport precision_of(std::span<const std::string> tweet_ids, const GoldMap& gold) {
  if (tweet_ids.empty()) throw InvalidArgument("cannot compute precision over zero tweets");
  std::size_t favor = 0;
  std::size_t nonneutral = 0;
  for (const auto& id : tweet_ids) {
    auto it = gold.find(id);
    if (it == gold.end()) throw InvalidArgument("no gold label for tweet '" + id + "'");
    if (it->second.label == StanceLabel::kFavor) ++favor;
    if (it->second.label != StanceLabel::kNeutral) ++nonneutral;
  }
  return count_precision(tweet_ids.size(), favor, nonneutral);
}

PrecisionReport topk_precision(std::span<const stance::TweetStance> topk, const GoldMap& gold, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be positive");
  if (topk.size() != k) {
    throw InvalidArgument("expected " + std::to_string(k) + " top-k tweets, got " + std::to_string(topk.size()));
  }
  std::vector<std::string> ids;
  ids.reserve(topk.size());
  for (const auto& s : topk) ids.push_back(s.tweet_id);
  return precision_of(ids, gold);
}

std::vector<ingest::CleanTweet> sample_baseline(std::span<const ingest::CleanTweet> corpus, std::size_t n,
                                                std::uint64_t seed) {
  if (n > corpus.size()) {
    throw InvalidArgument("cannot sample " + std::to_string(n) + " tweets from a corpus of " +
                          std::to_string(corpus.size()));
  }
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> index(corpus.size());
  std::iota(index.begin(), index.end(), std::size_t{0});
  std::vector<ingest::CleanTweet> sample;
  sample.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto j = i + static_cast<std::size_t>(bounded(engine, corpus.size() - i));
    std::swap(index[i], index[j]);
    sample.push_back(corpus[index[i]]);
  }
  return sample;
}

std::vector<PartyScore> panel_scores(std::span<const ingest::PanelResponse> responses,
                                     const std::set<int>& reverse_coded, Grouping grouping) {
  if (responses.empty()) throw InvalidArgument("no panel responses");
  for (int item : reverse_coded) {
    if (item < 1 || item > static_cast<int>(ingest::kSurveyItemCount)) {
      throw InvalidArgument("reverse-coded item " + std::to_string(item) + " outside 1..11");
    }
  }
  std::map<GroupKey, std::pair<std::int64_t, std::int64_t>> groups;  // key -> (sum, count)
  for (const auto& r : responses) {
    const GroupKey key{r.party, grouping == Grouping::kByPartyYear ? r.year : 0};
    auto& [sum, count] = groups[key];
    for (std::size_t i = 0; i < ingest::kSurveyItemCount; ++i) {
      const int value = r.item_responses[i];
      if (value < 1 || value > 5) {
        throw InvalidArgument("respondent '" + r.respondent_id + "' has Likert value outside [1,5]");
      }
      sum += reverse_coded.contains(static_cast<int>(i + 1)) ? 6 - value : value;
      ++count;
    }
  }
  std::vector<PartyScore> out;
  out.reserve(groups.size());
  for (const auto& [key, totals] : groups) {
    PartyScore score;
    score.party = key.first;
    if (grouping == Grouping::kByPartyYear) score.year = key.second;
    score.score = static_cast<double>(totals.first) / static_cast<double>(totals.second);
    out.push_back(std::move(score));
  }
  return out;
}

std::vector<PartyScore> rank_parties(std::vector<PartyScore> scores) {
  std::sort(scores.begin(), scores.end(), [](const PartyScore& a, const PartyScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.party, a.year) < std::tie(b.party, b.year);
  });
  return scores;
}

std::vector<double> average_ranks(std::span<const double> values) {
  for (double v : values) {
    if (std::isnan(v)) throw InvalidArgument("cannot rank NaN");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start;
    while (end + 1 < order.size() && values[order[end + 1]] == values[order[start]]) ++end;
    const double rank = (static_cast<double>(start) + static_cast<double>(end)) / 2.0 + 1.0;
    for (std::size_t i = start; i <= end; ++i) ranks[order[i]] = rank;
    start = end + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("length mismatch: " + std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw InvalidArgument("need at least two observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw InvalidArgument("xs are constant");
  if (syy == 0.0) throw InvalidArgument("ys are constant");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationReport party_level_eval(std::span<const stance::TweetStance> stances,
                                   std::span<const PartyScore> party_scores, std::optional<std::size_t> k) {
  if (party_scores.empty()) throw InvalidArgument("no party scores");
  const bool by_year = party_scores.front().year.has_value();
  std::map<GroupKey, double> reference;
  for (const auto& s : party_scores) {
    if (s.year.has_value() != by_year) throw InvalidArgument("party scores mix per-year and all-year entries");
    if (!reference.emplace(GroupKey{s.party, s.year.value_or(0)}, s.score).second) {
      throw InvalidArgument("duplicate party score for '" + s.party + "'");
    }
  }

  std::vector<stance::TweetStance> restricted;
  std::span<const stance::TweetStance> pool = stances;
  if (k) {
    restricted = stance::rank_top_k(stances, *k);
    pool = restricted;
  }

  std::map<GroupKey, std::pair<double, std::size_t>> groups;
  for (const auto& s : pool) {
    auto& [sum, count] = groups[GroupKey{s.party, by_year ? s.year : 0}];
    sum += s.favor_prob;
    ++count;
  }

  std::vector<double> predicted;
  std::vector<double> observed;
  for (const auto& [key, totals] : groups) {
    auto it = reference.find(key);
    if (it == reference.end()) continue;
    predicted.push_back(totals.first / static_cast<double>(totals.second));
    observed.push_back(it->second);
  }
  if (predicted.size() < 2) {
    throw InvalidArgument("insufficient pairs: " + std::to_string(predicted.size()) +
                          " group(s) matched a party score, need at least 2");
  }
  CorrelationReport report;
  report.k = k;
  report.rho = spearman_rho(predicted, observed);
  report.n_pairs = predicted.size();
  return report;
}

}  // namespace stancekit::metrics
