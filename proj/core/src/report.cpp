#include <iomanip>
#include <sstream>

#include "io_util.hpp"
#include "stancekit/pipeline.hpp"

namespace stancekit::pipeline {

namespace {

using detail::json;

std::string fixed2(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

std::string precision_text(const json& cell) {
  return fixed2(cell.at("p_entail").get<double>()) + " (" + fixed2(cell.at("p_nonneutral").get<double>()) + ")";
}

std::string rho_text(const json& cell) {
  if (cell.at("rho").is_null()) return "n/a";
  return fixed2(cell.at("rho").get<double>()) + " [n=" + std::to_string(cell.at("n_pairs").get<std::size_t>()) + "]";
}

}  // namespace

std::string render_report_table(std::string_view report_json) {
  const auto report = json::parse(report_json, nullptr, false);
  if (report.is_discarded() || !report.contains("conditions")) throw ParseError("report", 0, "not a report document");
  const auto& conditions = report.at("conditions");
  constexpr int kLabelWidth = 18;
  constexpr int kCellWidth = 17;

  std::ostringstream out;
  out << std::left << std::setw(kLabelWidth) << "" << "| " << std::setw(kCellWidth * 3) << "All tweets"
      << "| " << "Filtered tweets" << '\n';
  out << std::setw(kLabelWidth) << "";
  for (int block = 0; block < 2; ++block) {
    out << "| " << std::setw(kCellWidth) << "Without survey" << std::setw(kCellWidth) << "With survey"
        << std::setw(kCellWidth) << "Random baseline";
  }
  out << '\n' << std::string(kLabelWidth + 2 * (2 + 3 * kCellWidth), '-') << '\n';

  const char* blocks[] = {"all", "filtered"};
  for (const auto& k : report.at("k_values")) {
    const auto key = "P" + std::to_string(k.get<std::size_t>());
    out << std::setw(kLabelWidth) << ("Precision_" + std::to_string(k.get<std::size_t>()));
    for (const char* block : blocks) {
      const auto& b = conditions.at(block);
      out << "| " << std::setw(kCellWidth) << precision_text(b.at("without_survey").at(key)) << std::setw(kCellWidth)
          << precision_text(b.at("with_survey").at(key)) << std::setw(kCellWidth)
          << precision_text(b.at("random_baseline"));
    }
    out << '\n';
  }
  out << std::string(kLabelWidth + 2 * (2 + 3 * kCellWidth), '-') << '\n';

  std::vector<std::pair<std::string, std::string>> rho_rows;
  for (const auto& k : report.at("k_values")) {
    const auto n = std::to_string(k.get<std::size_t>());
    rho_rows.emplace_back("Spearman rho_" + n, "rho" + n);
  }
  rho_rows.emplace_back("Spearman rho_all", "rho_all");
  for (const auto& [label, key] : rho_rows) {
    out << std::setw(kLabelWidth) << label;
    for (const char* block : blocks) {
      const auto& b = conditions.at(block);
      out << "| " << std::setw(kCellWidth) << rho_text(b.at("without_survey").at(key)) << std::setw(kCellWidth)
          << rho_text(b.at("with_survey").at(key)) << std::setw(kCellWidth) << "-";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace stancekit::pipeline
