#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace stancekit::ingest {

// Calendar date-time as written in the record. A trailing `Z` or UTC offset
// is validated but not applied: the year a tweet counts towards is the
// poster's local year.
struct Timestamp {
  int year = 0;
  unsigned month = 0;
  unsigned day = 0;
  unsigned hour = 0;
  unsigned minute = 0;
  unsigned second = 0;

  friend bool operator==(const Timestamp&, const Timestamp&) = default;
};

// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS[.fff]]` (space also allowed as
// separator) with an optional `Z` or `±HH:MM` suffix. Throws InvalidArgument.
Timestamp parse_timestamp(std::string_view text);

struct RawTweet {
  std::string id;
  std::string account;
  std::string party;
  Timestamp timestamp;
  std::string text;
};

struct CleanTweet {
  std::string id;
  std::string party;
  int year = 0;
  std::string text;
  std::size_t token_count = 0;

  friend bool operator==(const CleanTweet&, const CleanTweet&) = default;
};

struct CleaningRules {
  int first_year = 2017;
  int last_year = 2021;
  std::size_t min_tokens = 5;
  // Punctuation kept in addition to letters, digits and whitespace.
  std::string kept_punctuation = ".,!?'-";
};

enum class DropReason { kYearOutOfRange, kTooFewTokens };

std::string_view to_string(DropReason reason) noexcept;

struct CleaningResult {
  std::vector<CleanTweet> kept;
  std::map<DropReason, std::size_t> dropped;

  std::size_t dropped_total() const noexcept;
};

// Lowercase, strip URLs (`http://`, `https://`, `www.` up to whitespace),
// remove characters outside letters, digits, whitespace and the kept
// punctuation, then collapse whitespace. Idempotent.
std::string clean_text(std::string_view text, const CleaningRules& rules = {});

// Reads line-delimited JSON records {id, account, party, timestamp, text}.
// Blank lines are skipped. Throws IoError, ParseError (with line number).
std::vector<RawTweet> load_tweets(const std::filesystem::path& path);
std::vector<RawTweet> parse_tweets(std::string_view jsonl, const std::string& source = "<memory>");

CleaningResult clean_corpus(const std::vector<RawTweet>& raw, const CleaningRules& rules = {});

enum class MatchMode { kSubstring, kWholeWord };

std::string_view to_string(MatchMode mode) noexcept;
MatchMode parse_match_mode(std::string_view text);

// Tweets whose text matches at least one keyword, order preserved. Keywords are
// lowercased before matching. Throws InvalidArgument on an empty list or an
// empty keyword.
std::vector<CleanTweet> filter_by_keywords(const std::vector<CleanTweet>& tweets,
                                           const std::vector<std::string>& keywords,
                                           MatchMode mode = MatchMode::kSubstring);

inline constexpr std::size_t kSurveyItemCount = 11;

struct PanelResponse {
  std::string respondent_id;
  int year = 0;
  std::string party;
  std::array<int, kSurveyItemCount> item_responses{};

  friend bool operator==(const PanelResponse&, const PanelResponse&) = default;
};

// CSV with header `respondent_id,year,party,item_1..item_11` (any column
// order). Likert values must be integers in [1,5].
std::vector<PanelResponse> load_panel(const std::filesystem::path& path);
std::vector<PanelResponse> parse_panel(std::string_view csv, const std::string& source = "<memory>");

// Round-trip helpers for the clean corpus artifact.
std::string to_jsonl(const std::vector<CleanTweet>& tweets);
std::vector<CleanTweet> parse_clean_tweets(std::string_view jsonl, const std::string& source = "<memory>");
std::vector<CleanTweet> load_clean_tweets(const std::filesystem::path& path);

}  // namespace stancekit::ingest
