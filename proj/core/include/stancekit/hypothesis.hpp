#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stancekit::hypothesis {

// Whether entailing the hypothesis means favouring or opposing the target.
enum class Polarity { kProTarget, kAntiTarget };
enum class Source { kSimple, kSurveyItem };

std::string_view to_string(Polarity polarity) noexcept;
std::string_view to_string(Source source) noexcept;
std::optional<Polarity> parse_polarity(std::string_view text) noexcept;
std::optional<Source> parse_source(std::string_view text) noexcept;

struct Hypothesis {
  std::string id;
  std::string text;
  Polarity polarity = Polarity::kProTarget;
  Source source = Source::kSimple;
  std::string target_id;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct HypothesisSet {
  std::string target_id;
  std::vector<Hypothesis> hypotheses;

  friend bool operator==(const HypothesisSet&, const HypothesisSet&) = default;
};

// Throws InvalidArgument unless the set is non-empty, ids are unique, texts
// are non-empty and every hypothesis shares the set's target_id.
void validate(const HypothesisSet& set);

// "Ik ben voorstander van <statement>." as a single pro-target hypothesis.
HypothesisSet build_simple(std::string_view target_statement, std::string target_id = "target");

// Line-delimited JSON, one {id, text, polarity, source, target_id} per line.
HypothesisSet load_set(const std::filesystem::path& path);
HypothesisSet parse_set(std::string_view jsonl, const std::string& source = "<memory>");
std::string to_jsonl(const HypothesisSet& set);

// Same as load_set; kept as the entry point for survey-item banks.
inline HypothesisSet load_survey_set(const std::filesystem::path& path) { return load_set(path); }

}  // namespace stancekit::hypothesis
