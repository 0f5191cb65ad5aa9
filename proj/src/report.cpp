#include "aero/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace aero {

namespace {

std::string fmt(double v, int prec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct Grid {
  std::vector<std::string> scenarios;   // column order
  std::vector<std::string> approaches;  // row order
  std::map<std::pair<std::string, std::string>, const SummaryRow*> cells;
};

Grid make_grid(const std::vector<SummaryRow>& rows) {
  Grid g;
  for (const auto& r : rows) {
    if (std::find(g.scenarios.begin(), g.scenarios.end(), r.scenario) ==
        g.scenarios.end()) {
      g.scenarios.push_back(r.scenario);
    }
    if (std::find(g.approaches.begin(), g.approaches.end(), r.approach) ==
        g.approaches.end()) {
      g.approaches.push_back(r.approach);
    }
    g.cells[{r.scenario, r.approach}] = &r;
  }
  return g;
}

std::string render_table(const Grid& g, const std::string& title,
                         double (*pick)(const SummaryRow&), int prec) {
  std::ostringstream out;
  out << title << "\n";
  out << "approach";
  for (const auto& s : g.scenarios) out << "\tS" << s;
  out << "\n";
  for (const auto& a : g.approaches) {
    out << a;
    for (const auto& s : g.scenarios) {
      auto it = g.cells.find({s, a});
      out << '\t' << (it == g.cells.end() ? "-" : fmt(pick(*it->second), prec));
    }
    out << "\n";
  }
  out << "\n";
  return out.str();
}

std::string render_svg(const Grid& g, const std::string& title,
                       double (*pick)(const SummaryRow&)) {
  constexpr int kBarWidth = 18;
  constexpr int kGroupGap = 24;
  constexpr int kHeight = 220;
  constexpr int kPlotHeight = 160;
  constexpr int kLeft = 50;

  double max_v = 0.0;
  for (const auto& [key, row] : g.cells) max_v = std::max(max_v, pick(*row));
  if (max_v <= 0.0) max_v = 1.0;

  const char* palette[] = {"#4878cf", "#d65f5f", "#6acc65", "#b47cc7"};
  const int group_w =
      static_cast<int>(g.approaches.size()) * kBarWidth + kGroupGap;
  const int width = kLeft + group_w * static_cast<int>(g.scenarios.size()) + 20;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << kHeight << "\">\n";
  svg << "<text x=\"" << kLeft << "\" y=\"16\" font-size=\"13\" "
      << "font-family=\"sans-serif\">" << title << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << 30 + kPlotHeight << "\" x2=\""
      << width - 10 << "\" y2=\"" << 30 + kPlotHeight
      << "\" stroke=\"#333\"/>\n";

  int gx = kLeft;
  for (const auto& s : g.scenarios) {
    int bx = gx;
    std::size_t ai = 0;
    for (const auto& a : g.approaches) {
      auto it = g.cells.find({s, a});
      const double v = it == g.cells.end() ? 0.0 : pick(*it->second);
      const int h = static_cast<int>(v / max_v * kPlotHeight);
      svg << "<rect x=\"" << bx << "\" y=\"" << 30 + kPlotHeight - h
          << "\" width=\"" << kBarWidth - 2 << "\" height=\"" << h
          << "\" fill=\"" << palette[ai % 4] << "\"><title>" << a << " S" << s
          << ": " << fmt(v, 6) << "</title></rect>\n";
      bx += kBarWidth;
      ++ai;
    }
    svg << "<text x=\"" << gx << "\" y=\"" << 30 + kPlotHeight + 16
        << "\" font-size=\"11\" font-family=\"sans-serif\">S" << s
        << "</text>\n";
    gx += group_w;
  }
  int ly = 40;
  std::size_t ai = 0;
  for (const auto& a : g.approaches) {
    svg << "<rect x=\"" << width - 110 << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << palette[ai % 4]
        << "\"/>\n";
    svg << "<text x=\"" << width - 96 << "\" y=\"" << ly
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << a
        << "</text>\n";
    ly += 14;
    ++ai;
  }
  svg << "</svg>\n";
  return svg.str();
}

double pick_error(const SummaryRow& r) { return r.error_rate; }
double pick_completion(const SummaryRow& r) { return r.mean_completion_ms; }
double pick_dmr(const SummaryRow& r) { return r.mean_dmr; }

}  // namespace

std::vector<SummaryRow> parse_summary_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) ||
      line.rfind("scenario,approach,runs,error_rate", 0) != 0) {
    throw std::runtime_error("not a sweep summary CSV");
  }
  std::vector<SummaryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = split(line, ',');
    if (f.size() != 6) throw std::runtime_error("bad summary row: " + line);
    SummaryRow r;
    r.scenario = f[0];
    r.approach = f[1];
    r.runs = static_cast<std::size_t>(std::stoul(f[2]));
    r.error_rate = std::stod(f[3]);
    r.mean_completion_ms = std::stod(f[4]);
    r.mean_dmr = std::stod(f[5]);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::runtime_error("summary CSV has no rows");
  return rows;
}

std::string render_report(const std::vector<SummaryRow>& rows) {
  Grid g = make_grid(rows);
  std::string out;
  out += render_table(g, "Update error rate", pick_error, 4);
  out += render_table(g, "Mean update completion time (ms)", pick_completion, 3);
  out += render_table(g, "Deadline miss rate", pick_dmr, 4);
  return out;
}

std::vector<std::string> write_report_svgs(const std::vector<SummaryRow>& rows,
                                           const std::filesystem::path& out_dir) {
  Grid g = make_grid(rows);
  std::filesystem::create_directories(out_dir);
  const std::vector<std::pair<std::string, double (*)(const SummaryRow&)>> charts =
      {{"error_rate", pick_error},
       {"completion_time", pick_completion},
       {"deadline_miss_rate", pick_dmr}};
  std::vector<std::string> files;
  for (const auto& [name, pick] : charts) {
    const auto path = out_dir / (name + ".svg");
    std::ofstream out(path);
    out << render_svg(g, name, pick);
    files.push_back(path.string());
  }
  return files;
}

}  // namespace aero
