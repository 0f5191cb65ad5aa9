#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aero {

struct SummaryRow {
  std::string scenario;
  std::string approach;
  std::size_t runs{0};
  double error_rate{0.0};
  double mean_completion_ms{0.0};
  double mean_dmr{0.0};
};

std::vector<SummaryRow> parse_summary_csv(const std::string& csv);

// Three comparison tables (error rate, completion time, DMR), scenarios as
// columns, approaches as rows.
std::string render_report(const std::vector<SummaryRow>& rows);

// Grouped bar chart per metric, one SVG file each; returns the file names.
std::vector<std::string> write_report_svgs(const std::vector<SummaryRow>& rows,
                                           const std::filesystem::path& out_dir);

}  // namespace aero
