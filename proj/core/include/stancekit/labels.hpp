#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace stancekit {

enum class StanceLabel { kFavor, kAgainst, kNeutral };

std::string_view to_string(StanceLabel label) noexcept;

// Accepts "favor", "against" and "neutral".
std::optional<StanceLabel> parse_stance_label(std::string_view text) noexcept;

}  // namespace stancekit
