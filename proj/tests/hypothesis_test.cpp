#include <gtest/gtest.h>

#include "stancekit/error.hpp"
#include "stancekit/hypothesis.hpp"
#include "test_support.hpp"

namespace {

using namespace stancekit;
using namespace stancekit::hypothesis;

TEST(BuildSimple, WrapsStatement) {
  const auto set = build_simple("de traditionele rolverdeling tussen mannen en vrouwen", "gender_roles");
  ASSERT_EQ(set.hypotheses.size(), 1u);
  const auto& h = set.hypotheses[0];
  EXPECT_EQ(h.id, "simple");
  EXPECT_EQ(h.text, "Ik ben voorstander van de traditionele rolverdeling tussen mannen en vrouwen.");
  EXPECT_EQ(h.polarity, Polarity::kProTarget);
  EXPECT_EQ(h.source, Source::kSimple);
  EXPECT_EQ(h.target_id, "gender_roles");
  EXPECT_EQ(set.target_id, "gender_roles");
}

TEST(BuildSimple, KeepsExistingFullStopAndTrims) {
  EXPECT_EQ(build_simple("  kernenergie.  ").hypotheses[0].text, "Ik ben voorstander van kernenergie.");
  EXPECT_THROW(build_simple("   "), InvalidArgument);
}

TEST(Validate, RejectsBrokenSets) {
  EXPECT_THROW(validate(HypothesisSet{"t", {}}), InvalidArgument);
  const Hypothesis a{"a", "tekst", Polarity::kProTarget, Source::kSurveyItem, "t"};
  auto dup = a;
  EXPECT_THROW(validate(HypothesisSet{"t", {a, dup}}), InvalidArgument);
  auto blank = a;
  blank.id = "b";
  blank.text = " \t";
  EXPECT_THROW(validate(HypothesisSet{"t", {a, blank}}), InvalidArgument);
  auto other = a;
  other.id = "c";
  other.target_id = "other";
  EXPECT_THROW(validate(HypothesisSet{"t", {a, other}}), InvalidArgument);
  EXPECT_NO_THROW(validate(HypothesisSet{"t", {a}}));
}

TEST(ParseSet, RoundTrip) {
  const HypothesisSet set{"t",
                          {{"q1", "Eerste stelling.", Polarity::kAntiTarget, Source::kSurveyItem, "t"},
                           {"q2", "Tweede \"stelling\".", Polarity::kProTarget, Source::kSurveyItem, "t"}}};
  EXPECT_EQ(parse_set(to_jsonl(set)), set);
}

TEST(ParseSet, Errors) {
  EXPECT_THROW(parse_set(R"({"id":"a","text":"x","polarity":"sideways","source":"simple","target_id":"t"})"),
               ParseError);
  EXPECT_THROW(parse_set(R"({"id":"a","text":"x","polarity":"pro_target","source":"tweet","target_id":"t"})"),
               ParseError);
  EXPECT_THROW(parse_set(R"({"id":"a","text":"x","polarity":"pro_target","source":"simple"})"), ParseError);
  EXPECT_THROW(parse_set(""), ParseError);
  const std::string line = R"({"id":"a","text":"x","polarity":"pro_target","source":"simple","target_id":"t"})";
  try {
    parse_set(line + "\n" + line, "bank.jsonl");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ShippedBanks, SurveyItemsMatchReverseCoding) {
  const auto survey = load_survey_set(test_support::hypotheses_dir() / "liss_gender_roles_11.jsonl");
  ASSERT_EQ(survey.hypotheses.size(), 11u);
  EXPECT_EQ(survey.target_id, "gender_roles");
  for (std::size_t i = 0; i < survey.hypotheses.size(); ++i) {
    const auto& h = survey.hypotheses[i];
    const int item = static_cast<int>(i) + 1;
    EXPECT_EQ(h.id, "q" + std::to_string(item));
    EXPECT_EQ(h.source, Source::kSurveyItem);
    const bool reverse = item == 1 || item == 4 || item == 6 || item == 7;
    EXPECT_EQ(h.polarity, reverse ? Polarity::kAntiTarget : Polarity::kProTarget) << h.id;
  }
  EXPECT_EQ(survey.hypotheses[4].text,
            "De man moet het geld verdienen, de vrouw moet voor het huishouden en het gezin zorgen.");

  const auto simple = load_set(test_support::hypotheses_dir() / "simple_gender_roles.jsonl");
  EXPECT_EQ(simple, build_simple("de traditionele rolverdeling tussen mannen en vrouwen", "gender_roles"));
}

}  // namespace
