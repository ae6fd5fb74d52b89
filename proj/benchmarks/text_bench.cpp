#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "stancekit/ingest.hpp"

namespace {

const std::string kTweet =
    "Moeders horen thuis bij de KINDEREN, zegt @kamerlid 🙂 https://t.co/AbCdEf12 #debat www.voorbeeld.nl/x "
    "crème brûlée en één gezin!!";

void BM_CleanText(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stancekit::ingest::clean_text(kTweet));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * kTweet.size()));
}
BENCHMARK(BM_CleanText);

void BM_KeywordFilter(benchmark::State& state) {
  const auto mode = state.range(0) ? stancekit::ingest::MatchMode::kWholeWord : stancekit::ingest::MatchMode::kSubstring;
  std::vector<stancekit::ingest::CleanTweet> tweets(1000);
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    tweets[i] = {std::to_string(i), "P", 2019, stancekit::ingest::clean_text(kTweet), 12};
  }
  const std::vector<std::string> keywords{"vrouw", "man", "moeder", "vader", "jongen", "meisje"};
  for (auto _ : state) benchmark::DoNotOptimize(stancekit::ingest::filter_by_keywords(tweets, keywords, mode));
}
BENCHMARK(BM_KeywordFilter)->Arg(0)->Arg(1);

}  // namespace
