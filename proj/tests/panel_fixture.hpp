#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "stancekit/ingest.hpp"

namespace panel_fixture {

// Party means of the 11-item gender-role scale, highest first.
inline const std::vector<std::pair<std::string, double>> kPartyMeans = {
    {"SGP", 2.86}, {"DENK", 2.56}, {"PVV", 2.47},  {"PLUS50", 2.38}, {"CU", 2.35},   {"CDA", 2.28},       {"FVD", 2.26},
    {"SP", 2.16},  {"VVD", 2.14},  {"PVDD", 2.03}, {"PVDA", 1.98},   {"D66", 1.96}, {"GROENLINKS", 1.83},
};

inline constexpr int kRespondentsPerParty = 100;

// Synthetic respondents whose coded item values average exactly to each
// party's mean. Coded values are spread over respondents and items in a
// shuffled order, then reverse-coded items are written back as raw answers.
inline std::vector<stancekit::ingest::PanelResponse> synthetic_panel(unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::vector<stancekit::ingest::PanelResponse> out;
  int next_id = 0;
  for (const auto& [party, mean] : kPartyMeans) {
    const int cells = kRespondentsPerParty * 11;
    const long total = std::lround(mean * cells);
    const int base = static_cast<int>(total / cells);
    const int high = static_cast<int>(total % cells);
    std::vector<int> coded(cells, base);
    for (int i = 0; i < high; ++i) coded[i] = base + 1;
    std::shuffle(coded.begin(), coded.end(), rng);
    for (int r = 0; r < kRespondentsPerParty; ++r) {
      stancekit::ingest::PanelResponse response;
      response.respondent_id = "r" + std::to_string(++next_id);
      response.party = party;
      response.year = 2017 + r % 5;
      for (int i = 0; i < 11; ++i) {
        const int value = coded[r * 11 + i];
        const int item = i + 1;
        const bool reverse = item == 1 || item == 4 || item == 6 || item == 7;
        response.item_responses[i] = reverse ? 6 - value : value;
      }
      out.push_back(std::move(response));
    }
  }
  return out;
}

}  // namespace panel_fixture
