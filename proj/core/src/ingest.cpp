#include "stancekit/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <unordered_map>

#include "io_util.hpp"
#include "stancekit/error.hpp"
#include "stancekit/text.hpp"
#include "text_internal.hpp"

namespace stancekit::ingest {

namespace {

using detail::json;
namespace tx = text::detail;

template <typename T>
bool parse_digits(std::string_view s, std::size_t pos, std::size_t count, T& out) {
  if (pos + count > s.size()) return false;
  auto field = s.substr(pos, count);
  if (!std::all_of(field.begin(), field.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc{} && ptr == field.data() + field.size();
}

constexpr std::u32string_view kUrlPrefixes[] = {U"https://", U"http://", U"www."};

// Replaces every URL span (prefix up to the next whitespace) with one space.
std::u32string remove_urls(const std::u32string& in) {
  std::u32string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    bool matched = false;
    for (auto prefix : kUrlPrefixes) {
      if (std::u32string_view(in).substr(i, prefix.size()) == prefix) {
        matched = true;
        break;
      }
    }
    if (!matched) {
      out.push_back(in[i++]);
      continue;
    }
    while (i < in.size() && !tx::is_space(in[i])) ++i;
    out.push_back(U' ');
  }
  return out;
}

std::string clean_once(std::string_view input, const std::u32string& kept_punctuation) {
  auto codepoints = tx::decode(tx::nfc(input));
  for (auto& c : codepoints) c = tx::lower(c);
  codepoints = remove_urls(codepoints);

  std::u32string stripped;
  stripped.reserve(codepoints.size());
  for (char32_t c : codepoints) {
    if (tx::is_letter(c) || tx::is_digit(c) || tx::is_space(c) ||
        kept_punctuation.find(c) != std::u32string::npos) {
      stripped.push_back(c);
    }
  }
  // Stripping can splice a new `www.` together.
  stripped = remove_urls(stripped);

  std::u32string collapsed;
  collapsed.reserve(stripped.size());
  bool pending_space = false;
  for (char32_t c : stripped) {
    if (tx::is_space(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(U' ');
    pending_space = false;
    collapsed.push_back(c);
  }
  return tx::nfc(tx::encode(collapsed));
}

CleanTweet clean_tweet_from_json(const json& record, const std::string& source, std::size_t line) {
  CleanTweet tweet;
  tweet.id = detail::require_string(record, "id", source, line);
  tweet.party = detail::require_string(record, "party", source, line);
  tweet.year = detail::require_int(record, "year", source, line);
  tweet.text = detail::require_string(record, "text", source, line);
  tweet.token_count = text::count_tokens(tweet.text);
  return tweet;
}

std::vector<std::string> split_csv_row(std::string_view line, const std::string& source, std::size_t line_number) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError(source, line_number, "unterminated quoted field");
  fields.push_back(std::move(field));
  for (auto& f : fields) {
    auto first = f.find_first_not_of(" \t");
    auto last = f.find_last_not_of(" \t");
    f = first == std::string::npos ? std::string{} : f.substr(first, last - first + 1);
  }
  return fields;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  auto fail = [&]() -> Timestamp { throw InvalidArgument("unparseable timestamp '" + std::string(s) + "'"); };
  Timestamp ts;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return fail();
  if (!parse_digits(s, 0, 4, ts.year) || !parse_digits(s, 5, 2, ts.month) || !parse_digits(s, 8, 2, ts.day)) {
    return fail();
  }
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    ++pos;
    if (pos + 5 > s.size() || s[pos + 2] != ':') return fail();
    if (!parse_digits(s, pos, 2, ts.hour) || !parse_digits(s, pos + 3, 2, ts.minute)) return fail();
    pos += 5;
    if (pos < s.size() && s[pos] == ':') {
      if (!parse_digits(s, pos + 1, 2, ts.second)) return fail();
      pos += 3;
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const auto digits_start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == digits_start) return fail();
      }
    }
    if (pos < s.size() && s[pos] == 'Z') {
      ++pos;
    } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      unsigned oh = 0;
      unsigned om = 0;
      if (!parse_digits(s, pos + 1, 2, oh)) return fail();
      pos += 3;
      if (pos < s.size() && s[pos] == ':') ++pos;
      if (!parse_digits(s, pos, 2, om)) return fail();
      pos += 2;
      if (oh > 23 || om > 59) return fail();
    }
  }
  if (pos != s.size()) return fail();
  const std::chrono::year_month_day date{std::chrono::year{ts.year}, std::chrono::month{ts.month},
                                         std::chrono::day{ts.day}};
  if (!date.ok() || ts.hour > 23 || ts.minute > 59 || ts.second > 60) return fail();
  return ts;
}

std::string_view to_string(DropReason reason) noexcept {
  switch (reason) {
    case DropReason::kYearOutOfRange:
      return "year_out_of_range";
    case DropReason::kTooFewTokens:
      return "too_few_tokens";
  }
  return "unknown";
}

std::size_t CleaningResult::dropped_total() const noexcept {
  std::size_t total = 0;
  for (const auto& [reason, count] : dropped) total += count;
  return total;
}

std::string clean_text(std::string_view text, const CleaningRules& rules) {
  const auto punctuation = tx::decode(rules.kept_punctuation);
  std::string current = clean_once(text, punctuation);
  // NFC recomposition after stripping can expose one more change; iterate to
  // the fixed point so the function is idempotent.
  for (int pass = 0; pass < 8; ++pass) {
    std::string next = clean_once(current, punctuation);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::vector<RawTweet> parse_tweets(std::string_view jsonl, const std::string& source) {
  std::vector<RawTweet> tweets;
  std::unordered_map<std::string, std::size_t> first_seen;
  detail::for_each_line(jsonl, [&](std::string_view line, std::size_t line_number) {
    const auto record = detail::parse_json_line(line, source, line_number);
    RawTweet tweet;
    tweet.id = detail::require_string(record, "id", source, line_number);
    tweet.account = detail::require_string(record, "account", source, line_number);
    tweet.party = detail::require_string(record, "party", source, line_number);
    const auto timestamp = detail::require_string(record, "timestamp", source, line_number);
    tweet.text = detail::require_string(record, "text", source, line_number);
    if (tweet.id.empty()) throw ParseError(source, line_number, "empty id");
    try {
      tweet.timestamp = parse_timestamp(timestamp);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_number, e.what());
    }
    auto [it, inserted] = first_seen.emplace(tweet.id, line_number);
    if (!inserted) {
      throw ParseError(source, line_number,
                       "duplicate id '" + tweet.id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    tweets.push_back(std::move(tweet));
  });
  return tweets;
}

std::vector<RawTweet> load_tweets(const std::filesystem::path& path) {
  return parse_tweets(detail::read_file(path), path.string());
}

CleaningResult clean_corpus(const std::vector<RawTweet>& raw, const CleaningRules& rules) {
  CleaningResult result;
  for (const auto& tweet : raw) {
    const int year = tweet.timestamp.year;
    if (year < rules.first_year || year > rules.last_year) {
      ++result.dropped[DropReason::kYearOutOfRange];
      continue;
    }
    auto cleaned = clean_text(tweet.text, rules);
    const auto tokens = text::count_tokens(cleaned);
    if (tokens < rules.min_tokens) {
      ++result.dropped[DropReason::kTooFewTokens];
      continue;
    }
    result.kept.push_back(CleanTweet{tweet.id, tweet.party, year, std::move(cleaned), tokens});
  }
  return result;
}

std::string_view to_string(MatchMode mode) noexcept {
  return mode == MatchMode::kSubstring ? "substring" : "whole-word";
}

MatchMode parse_match_mode(std::string_view text) {
  if (text == "substring") return MatchMode::kSubstring;
  if (text == "whole-word" || text == "whole_word") return MatchMode::kWholeWord;
  throw InvalidArgument("unknown keyword match mode '" + std::string(text) + "'");
}

std::vector<CleanTweet> filter_by_keywords(const std::vector<CleanTweet>& tweets,
                                           const std::vector<std::string>& keywords, MatchMode mode) {
  if (keywords.empty()) throw InvalidArgument("keyword list is empty");
  std::vector<std::string> lowered;
  lowered.reserve(keywords.size());
  for (const auto& keyword : keywords) {
    auto k = text::to_lower(keyword);
    if (k.empty()) throw InvalidArgument("empty keyword");
    lowered.push_back(std::move(k));
  }
  std::vector<CleanTweet> out;
  for (const auto& tweet : tweets) {
    const bool match = std::any_of(lowered.begin(), lowered.end(), [&](const std::string& k) {
      return mode == MatchMode::kSubstring ? tweet.text.find(k) != std::string::npos
                                           : text::contains_whole_word(tweet.text, k);
    });
    if (match) out.push_back(tweet);
  }
  return out;
}

std::vector<PanelResponse> parse_panel(std::string_view csv, const std::string& source) {
  std::vector<PanelResponse> responses;
  bool have_header = false;
  std::size_t col_respondent = 0;
  std::size_t col_year = 0;
  std::size_t col_party = 0;
  std::array<std::size_t, kSurveyItemCount> col_items{};
  std::size_t column_count = 0;
  std::size_t row = 0;

  detail::for_each_line(csv, [&](std::string_view line, std::size_t line_number) {
    auto fields = split_csv_row(line, source, line_number);
    if (!have_header) {
      have_header = true;
      column_count = fields.size();
      std::unordered_map<std::string, std::size_t> index;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (!index.emplace(fields[i], i).second) {
          throw ParseError(source, line_number, "duplicate column '" + fields[i] + "'");
        }
      }
      auto require = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw ParseError(source, line_number, "missing column '" + name + "'");
        return it->second;
      };
      col_respondent = require("respondent_id");
      col_year = require("year");
      col_party = require("party");
      std::size_t item_columns = 0;
      for (const auto& name : fields) {
        if (name.rfind("item_", 0) == 0) ++item_columns;
      }
      for (std::size_t i = 0; i < kSurveyItemCount; ++i) col_items[i] = require("item_" + std::to_string(i + 1));
      if (item_columns != kSurveyItemCount) {
        throw ParseError(source, line_number,
                         "expected exactly " + std::to_string(kSurveyItemCount) + " item columns, found " +
                             std::to_string(item_columns));
      }
      return;
    }
    ++row;
    const std::string where = "row " + std::to_string(row) + ": ";
    if (fields.size() != column_count) {
      throw ParseError(source, line_number,
                       where + "expected " + std::to_string(column_count) + " fields, found " +
                           std::to_string(fields.size()));
    }
    PanelResponse response;
    response.respondent_id = fields[col_respondent];
    response.party = fields[col_party];
    if (response.respondent_id.empty()) throw ParseError(source, line_number, where + "empty respondent_id");
    if (response.party.empty()) throw ParseError(source, line_number, where + "empty party");
    if (!parse_int(fields[col_year], response.year)) {
      throw ParseError(source, line_number, where + "year '" + fields[col_year] + "' is not an integer");
    }
    for (std::size_t i = 0; i < kSurveyItemCount; ++i) {
      const auto& value = fields[col_items[i]];
      int likert = 0;
      if (!parse_int(value, likert) || likert < 1 || likert > 5) {
        throw ParseError(source, line_number,
                         where + "item_" + std::to_string(i + 1) + " value '" + value + "' outside Likert range [1,5]");
      }
      response.item_responses[i] = likert;
    }
    responses.push_back(std::move(response));
  });
  if (!have_header) throw ParseError(source, 0, "empty panel file");
  return responses;
}

std::vector<PanelResponse> load_panel(const std::filesystem::path& path) {
  return parse_panel(detail::read_file(path), path.string());
}

std::string to_jsonl(const std::vector<CleanTweet>& tweets) {
  std::string out;
  for (const auto& t : tweets) {
    json record = {{"id", t.id}, {"party", t.party}, {"year", t.year}, {"text", t.text}, {"token_count", t.token_count}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<CleanTweet> parse_clean_tweets(std::string_view jsonl, const std::string& source) {
  std::vector<CleanTweet> tweets;
  detail::for_each_line(jsonl, [&](std::string_view line, std::size_t line_number) {
    tweets.push_back(clean_tweet_from_json(detail::parse_json_line(line, source, line_number), source, line_number));
  });
  return tweets;
}

std::vector<CleanTweet> load_clean_tweets(const std::filesystem::path& path) {
  return parse_clean_tweets(detail::read_file(path), path.string());
}

}  // namespace stancekit::ingest
