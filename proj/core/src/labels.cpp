#include "stancekit/labels.hpp"

namespace stancekit {

std::string_view to_string(StanceLabel label) noexcept {
  switch (label) {
    case StanceLabel::kFavor:
      return "favor";
    case StanceLabel::kAgainst:
      return "against";
    case StanceLabel::kNeutral:
      return "neutral";
  }
  return "neutral";
}

std::optional<StanceLabel> parse_stance_label(std::string_view text) noexcept {
  if (text == "favor") return StanceLabel::kFavor;
  if (text == "against") return StanceLabel::kAgainst;
  if (text == "neutral") return StanceLabel::kNeutral;
  return std::nullopt;
}

}  // namespace stancekit
