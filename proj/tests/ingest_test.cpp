#include <gtest/gtest.h>

#include "stancekit/error.hpp"
#include "stancekit/ingest.hpp"
#include "stancekit/text.hpp"
#include "test_support.hpp"

namespace {

using namespace stancekit;
using namespace stancekit::ingest;

RawTweet raw(std::string id, int year, std::string text, std::string party = "SGP") {
  RawTweet t;
  t.id = std::move(id);
  t.account = "acct";
  t.party = std::move(party);
  t.timestamp.year = year;
  t.timestamp.month = 6;
  t.timestamp.day = 1;
  t.text = std::move(text);
  return t;
}

TEST(ParseTimestamp, AcceptsSupportedForms) {
  EXPECT_EQ(parse_timestamp("2019-03-14"), (Timestamp{2019, 3, 14, 0, 0, 0}));
  EXPECT_EQ(parse_timestamp("2019-03-14T09:15"), (Timestamp{2019, 3, 14, 9, 15, 0}));
  EXPECT_EQ(parse_timestamp("2019-03-14 09:15:42"), (Timestamp{2019, 3, 14, 9, 15, 42}));
  EXPECT_EQ(parse_timestamp("2019-03-14T09:15:42.123Z"), (Timestamp{2019, 3, 14, 9, 15, 42}));
  EXPECT_EQ(parse_timestamp("2019-03-14T09:15:42+01:00"), (Timestamp{2019, 3, 14, 9, 15, 42}));
  EXPECT_EQ(parse_timestamp("2019-03-14T09:15:42-0530"), (Timestamp{2019, 3, 14, 9, 15, 42}));
}

TEST(ParseTimestamp, OffsetIsNotApplied) {
  // 23:30 at -05:00 is already next year in UTC; the tweet still counts for 2021.
  EXPECT_EQ(parse_timestamp("2021-12-31T23:30:00-05:00").year, 2021);
}

TEST(ParseTimestamp, RejectsMalformedInput) {
  for (const char* bad : {"", "2019", "2019/03/14", "2019-13-01", "2019-02-30", "2019-03-14T25:00", "2019-03-14T09",
                          "2019-03-14T09:15:00+", "2019-03-14Z", "2019-03-14T09:15:00 junk", "20x9-03-14"}) {
    EXPECT_THROW(parse_timestamp(bad), InvalidArgument) << bad;
  }
}

TEST(CleanText, StripsUrlsAndSymbols) {
  EXPECT_EQ(clean_text("Kijk HIER: https://t.co/abc123 #debat @SGPnieuws"), "kijk hier debat sgpnieuws");
  EXPECT_EQ(clean_text("zie www.example.nl/pagina?x=1 en http://a.b"), "zie en");
  EXPECT_EQ(clean_text("Goed zo!! 👍🏽  Echt...  ja?"), "goed zo!! echt... ja?");
  EXPECT_EQ(clean_text("rock'n'roll — top-10, toch?"), "rock'n'roll top-10, toch?");
}

TEST(CleanText, UrlGluedToTextIsRemovedUpToWhitespace) {
  EXPECT_EQ(clean_text("lees:https://x.y/z meer"), "lees meer");
}

TEST(CleanText, StrippingCannotSpliceAUrl) {
  const auto once = clean_text("ww#w.example.nl kijk hier");
  EXPECT_EQ(once.find("www."), std::string::npos);
  EXPECT_EQ(clean_text(once), once);
}

TEST(CleanText, KeepsAccentedLettersAndNormalizesToNfc) {
  // "e" followed by a combining acute accent composes to a single é.
  EXPECT_EQ(clean_text("Cre\xCC\x80" "che en CAFÉ"), "crèche en café");
  EXPECT_EQ(clean_text("ĲSSELMEER"), "ĳsselmeer");
}

TEST(CleanText, IsIdempotentOnAwkwardInputs) {
  for (const char* input : {"  a  b ", "http:/ /x", "wwww.x y", "\xff\xfe broken", "é\xCC\x81", "HTTPS://X.NL/A b",
                            "a b c", "ww\xCC\x81w.nl"}) {
    const auto once = clean_text(input);
    EXPECT_EQ(clean_text(once), once) << input;
  }
}

TEST(CleanText, CustomPunctuation) {
  CleaningRules rules;
  rules.kept_punctuation = "#";
  EXPECT_EQ(clean_text("Hoi, #nl!", rules), "hoi #nl");
}

TEST(CleanCorpus, DropsByYearAndLength) {
  const std::vector<RawTweet> input = {
      raw("a", 2016, "een twee drie vier vijf"),
      raw("b", 2017, "een twee drie vier vijf"),
      raw("c", 2021, "Een twee drie vier vijf zes"),
      raw("d", 2022, "een twee drie vier vijf"),
      raw("e", 2019, "een twee drie https://t.co/x vier"),
  };
  const auto result = clean_corpus(input);
  ASSERT_EQ(result.kept.size(), 2u);
  EXPECT_EQ(result.kept[0], (CleanTweet{"b", "SGP", 2017, "een twee drie vier vijf", 5}));
  EXPECT_EQ(result.kept[1].id, "c");
  EXPECT_EQ(result.kept[1].token_count, 6u);
  EXPECT_EQ(result.dropped.at(DropReason::kYearOutOfRange), 2u);
  EXPECT_EQ(result.dropped.at(DropReason::kTooFewTokens), 1u);
  EXPECT_EQ(result.dropped_total(), 3u);
}

TEST(ParseTweets, RejectsDuplicateIds) {
  const std::string line = R"({"id":"1","account":"a","party":"CDA","timestamp":"2018-01-02","text":"hoi"})";
  EXPECT_THROW(parse_tweets(line + "\n" + line), ParseError);
}

TEST(ParseTweets, ReportsLineNumbers) {
  const std::string good = R"({"id":"1","account":"a","party":"CDA","timestamp":"2018-01-02","text":"hoi"})";
  const auto tweets = parse_tweets(good + "\n\n" + R"({"id":"1b","account":"a","party":"CDA","timestamp":"2018-01-02","text":"hoi"})");
  EXPECT_EQ(tweets.size(), 2u);
  try {
    parse_tweets(good + "\n" + R"({"id":"2","account":"a","party":"CDA","text":"x"})", "corpus.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.source(), "corpus.jsonl");
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_tweets("{not json"), ParseError);
  EXPECT_THROW(parse_tweets(R"({"id":"1","account":"a","party":"CDA","timestamp":"yesterday","text":"x"})"),
               ParseError);
}

TEST(LoadTweets, MissingFileIsIoError) {
  EXPECT_THROW(load_tweets("/nonexistent/tweets.jsonl"), IoError);
}

TEST(FilterByKeywords, SubstringAndWholeWord) {
  const std::vector<CleanTweet> tweets = {
      {"1", "P", 2018, "de vrouwen van nederland", 4},
      {"2", "P", 2018, "een andere manier", 3},
      {"3", "P", 2018, "de man, de vrouw", 4},
      {"4", "P", 2018, "niets hier", 2},
  };
  const auto sub = filter_by_keywords(tweets, {"Vrouw", "man"});
  ASSERT_EQ(sub.size(), 3u);
  EXPECT_EQ(sub[0].id, "1");
  EXPECT_EQ(sub[1].id, "2");
  EXPECT_EQ(sub[2].id, "3");

  const auto whole = filter_by_keywords(tweets, {"vrouw", "man"}, MatchMode::kWholeWord);
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_EQ(whole[0].id, "3");

  EXPECT_THROW(filter_by_keywords(tweets, {}), InvalidArgument);
  EXPECT_THROW(filter_by_keywords(tweets, {"man", ""}), InvalidArgument);
}

TEST(MatchMode, ParsesBothSpellings) {
  EXPECT_EQ(parse_match_mode("substring"), MatchMode::kSubstring);
  EXPECT_EQ(parse_match_mode("whole-word"), MatchMode::kWholeWord);
  EXPECT_EQ(parse_match_mode("whole_word"), MatchMode::kWholeWord);
  EXPECT_THROW(parse_match_mode("regex"), InvalidArgument);
}

TEST(Text, Helpers) {
  EXPECT_EQ(text::count_tokens("  a\tb　c\n"), 3u);
  EXPECT_EQ(text::to_lower("ÉÉN"), "één");
  EXPECT_TRUE(text::contains_whole_word("de man.", "man"));
  EXPECT_FALSE(text::contains_whole_word("mannen", "man"));
  EXPECT_FALSE(text::contains_whole_word("vrouwé", "vrouw"));
}

constexpr const char* kPanelHeader = "respondent_id,year,party,item_1,item_2,item_3,item_4,item_5,item_6,item_7,item_8,"
                                     "item_9,item_10,item_11\n";

TEST(ParsePanel, ReadsRows) {
  const auto rows = parse_panel(std::string(kPanelHeader) + "r1,2018,SGP,1,2,3,4,5,1,2,3,4,5,1\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].respondent_id, "r1");
  EXPECT_EQ(rows[0].year, 2018);
  EXPECT_EQ(rows[0].party, "SGP");
  EXPECT_EQ(rows[0].item_responses, (std::array<int, 11>{1, 2, 3, 4, 5, 1, 2, 3, 4, 5, 1}));
}

TEST(ParsePanel, AnyColumnOrder) {
  const auto rows = parse_panel(
      "item_11,item_10,item_9,item_8,item_7,item_6,item_5,item_4,item_3,item_2,item_1,party,year,respondent_id\n"
      "1,2,3,4,5,1,2,3,4,5,1,VVD,2020,x\n");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].item_responses[0], 1);
  EXPECT_EQ(rows[0].item_responses[10], 1);
  EXPECT_EQ(rows[0].item_responses[1], 5);
  EXPECT_EQ(rows[0].party, "VVD");
}

TEST(ParsePanel, RejectsBadRows) {
  const std::string header = kPanelHeader;
  EXPECT_THROW(parse_panel(header + "r1,2018,SGP,1,2,3,4,5,1,2,3,4,5,6\n"), ParseError);
  EXPECT_THROW(parse_panel(header + "r1,2018,SGP,1,2,3,4,5,1,2,3,4,5,0\n"), ParseError);
  EXPECT_THROW(parse_panel(header + "r1,2018,SGP,1,2,3,4,5,1,2,3,4,5\n"), ParseError);
  EXPECT_THROW(parse_panel(header + "r1,2018,SGP,1,2,3,4,5,1,2,3,4,5,2.5\n"), ParseError);
  EXPECT_THROW(parse_panel("respondent_id,year,party,item_1\nr1,2018,SGP,3\n"), ParseError);
  try {
    parse_panel(header + "r1,2018,SGP,1,2,3,4,5,1,2,3,4,5,1\nr2,20x8,SGP,1,2,3,4,5,1,2,3,4,5,1\n", "panel.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(CleanTweets, JsonlRoundTrip) {
  const std::vector<CleanTweet> tweets = {{"1", "SGP", 2018, "één twee drie vier vijf", 5},
                                          {"2", "D66", 2021, "quote \" and backslash \\ ok", 6}};
  EXPECT_EQ(parse_clean_tweets(to_jsonl(tweets)), tweets);
}

TEST(DemoCorpus, LoadsAndCleans) {
  const auto raw_tweets = load_tweets(test_support::demo_dir() / "tweets.jsonl");
  EXPECT_EQ(raw_tweets.size(), 56u);
  const auto result = clean_corpus(raw_tweets);
  EXPECT_EQ(result.kept.size(), 52u);
  EXPECT_EQ(result.dropped.at(DropReason::kYearOutOfRange), 2u);
  EXPECT_EQ(result.dropped.at(DropReason::kTooFewTokens), 2u);
  const auto panel = load_panel(test_support::demo_dir() / "panel.csv");
  EXPECT_EQ(panel.size(), 105u);
}

}  // namespace
