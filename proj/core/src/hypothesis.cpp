#include "stancekit/hypothesis.hpp"

#include <unordered_set>

#include "io_util.hpp"
#include "stancekit/error.hpp"

namespace stancekit::hypothesis {

namespace {

using detail::json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view to_string(Polarity polarity) noexcept {
  return polarity == Polarity::kProTarget ? "pro_target" : "anti_target";
}

std::string_view to_string(Source source) noexcept { return source == Source::kSimple ? "simple" : "survey_item"; }

std::optional<Polarity> parse_polarity(std::string_view text) noexcept {
  if (text == "pro_target") return Polarity::kProTarget;
  if (text == "anti_target") return Polarity::kAntiTarget;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view text) noexcept {
  if (text == "simple") return Source::kSimple;
  if (text == "survey_item") return Source::kSurveyItem;
  return std::nullopt;
}

void validate(const HypothesisSet& set) {
  if (set.hypotheses.empty()) throw InvalidArgument("hypothesis set '" + set.target_id + "' is empty");
  std::unordered_set<std::string> ids;
  for (const auto& h : set.hypotheses) {
    if (h.id.empty()) throw InvalidArgument("hypothesis with empty id");
    if (!ids.insert(h.id).second) throw InvalidArgument("duplicate hypothesis id '" + h.id + "'");
    if (trim(h.text).empty()) throw InvalidArgument("hypothesis '" + h.id + "' has empty text");
    if (h.target_id != set.target_id) {
      throw InvalidArgument("hypothesis '" + h.id + "' targets '" + h.target_id + "', set targets '" +
                            set.target_id + "'");
    }
  }
}

HypothesisSet build_simple(std::string_view target_statement, std::string target_id) {
  auto statement = trim(target_statement);
  if (statement.empty()) throw InvalidArgument("target statement is empty");
  std::string text = "Ik ben voorstander van ";
  text += statement;
  if (text.back() != '.') text += '.';
  HypothesisSet set{target_id, {Hypothesis{"simple", std::move(text), Polarity::kProTarget, Source::kSimple, target_id}}};
  validate(set);
  return set;
}

HypothesisSet parse_set(std::string_view jsonl, const std::string& source) {
  HypothesisSet set;
  std::unordered_set<std::string> ids;
  detail::for_each_line(jsonl, [&](std::string_view line, std::size_t line_number) {
    const auto record = detail::parse_json_line(line, source, line_number);
    Hypothesis h;
    h.id = detail::require_string(record, "id", source, line_number);
    h.text = detail::require_string(record, "text", source, line_number);
    h.target_id = detail::require_string(record, "target_id", source, line_number);
    const auto polarity = detail::require_string(record, "polarity", source, line_number);
    auto parsed_polarity = parse_polarity(polarity);
    if (!parsed_polarity) throw ParseError(source, line_number, "unknown polarity '" + polarity + "'");
    h.polarity = *parsed_polarity;
    const auto origin = detail::require_string(record, "source", source, line_number);
    auto parsed_source = parse_source(origin);
    if (!parsed_source) throw ParseError(source, line_number, "unknown source '" + origin + "'");
    h.source = *parsed_source;

    if (!ids.insert(h.id).second) throw ParseError(source, line_number, "duplicate hypothesis id '" + h.id + "'");
    if (set.hypotheses.empty()) set.target_id = h.target_id;
    set.hypotheses.push_back(std::move(h));
  });
  try {
    validate(set);
  } catch (const InvalidArgument& e) {
    throw ParseError(source, 0, e.what());
  }
  return set;
}

HypothesisSet load_set(const std::filesystem::path& path) { return parse_set(detail::read_file(path), path.string()); }

std::string to_jsonl(const HypothesisSet& set) {
  std::string out;
  for (const auto& h : set.hypotheses) {
    json record = {{"id", h.id},
                   {"text", h.text},
                   {"polarity", to_string(h.polarity)},
                   {"source", to_string(h.source)},
                   {"target_id", h.target_id}};
    out += record.dump();
    out += '\n';
  }
  return out;
}

}  // namespace stancekit::hypothesis
