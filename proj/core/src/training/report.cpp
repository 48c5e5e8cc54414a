#include "eegclip/training/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "eegclip/error.hpp"

namespace eegclip::train {

std::string format_fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

std::string results_csv(std::span<const FoldResult> folds) {
  std::ostringstream out;
  out << "protocol,fold_id,arm,subject,train_session,test_session,n_shot,n_train,n_adapt,n_test,accuracy,epochs,"
         "best_epoch,best_val_acc\n";
  for (const auto& f : folds) {
    out << f.protocol << ',' << f.fold_id << ',' << f.arm << ',' << f.subject << ',' << f.train_session << ','
        << f.test_session << ',' << f.n_shot << ',' << f.n_train << ',' << f.n_adapt << ',' << f.n_test << ','
        << format_fixed(f.accuracy) << ',' << f.epochs << ',' << f.best_epoch << ',' << format_fixed(f.best_val_acc)
        << '\n';
  }
  return out.str();
}

std::string ablation_table_csv(const ExperimentResult& ablation) {
  std::map<std::string, std::vector<double>> arms;
  for (const auto& f : ablation.folds) arms[f.arm].push_back(f.accuracy);
  std::ostringstream out;
  out << "method,ACC(%),STD(%)\n";
  for (const char* arm : {kArmLinear, kArmMatching}) {
    const Metrics m = aggregate(arms[arm]);
    out << arm << ',' << format_fixed(100.0 * m.mean) << ',' << format_fixed(100.0 * m.std) << '\n';
  }
  return out.str();
}

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size()) {
        throw Error(ErrorCode::kInvalidArgument, "csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                                     std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw Error(ErrorCode::kInvalidArgument, "csv: missing header");
  return t;
}

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

/// Frame, title and a 0..1 y axis with gridlines.
void open_chart(std::ostringstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << escape(title) << "</text>\n";
  const double plot_h = kHeight - kTop - kBottom;
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    const double y = kTop + plot_h * (1.0 - v);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kWidth - kRight << "\" y2=\"" << num(y)
        << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"11\">" << num(v) << "</text>\n";
  }
  out << "<text x=\"14\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 14 " << kTop + plot_h / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">accuracy</text>\n";
}

}  // namespace

std::string bar_chart_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& bars) {
  std::ostringstream out;
  open_chart(out, title);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const double slot = bars.empty() ? plot_w : plot_w / static_cast<double>(bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& [label, value] = bars[i];
    const double h = plot_h * std::clamp(value, 0.0, 1.0);
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    out << "<rect class=\"bar\" x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h - h) << "\" width=\""
        << num(slot * 0.7) << "\" height=\"" << num(h) << "\" fill=\"#4a78b5\" data-label=\"" << escape(label)
        << "\" data-value=\"" << format_fixed(value) << "\"/>\n";
    out << "<text x=\"" << num(x + slot * 0.35) << "\" y=\"" << num(kTop + plot_h + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::vector<std::pair<double, double>>& points) {
  std::ostringstream out;
  open_chart(out, title);
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  // Points are spaced evenly by rank, not by value.
  const double step = points.size() > 1 ? plot_w / static_cast<double>(points.size() - 1) : 0.0;
  std::ostringstream path;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = kLeft + step * static_cast<double>(i);
    const double y = kTop + plot_h * (1.0 - std::clamp(points[i].second, 0.0, 1.0));
    path << (i ? " " : "") << num(x) << ',' << num(y);
  }
  out << "<polyline fill=\"none\" stroke=\"#4a78b5\" stroke-width=\"2\" points=\"" << path.str() << "\"/>\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double x = kLeft + step * static_cast<double>(i);
    const double y = kTop + plot_h * (1.0 - std::clamp(points[i].second, 0.0, 1.0));
    char xs[32];
    std::snprintf(xs, sizeof xs, "%g", points[i].first);
    out << "<circle class=\"point\" cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"4\" fill=\"#4a78b5\" data-x=\""
        << xs << "\" data-value=\"" << format_fixed(points[i].second) << "\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 16)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << xs << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(x_label) << "</text>\n";
  out << "</svg>\n";
  return out.str();
}

ReportCharts render_report(const CsvTable& table) {
  const int acc = table.column("accuracy");
  if (acc < 0) throw Error(ErrorCode::kInvalidArgument, "report: csv has no accuracy column");
  auto value = [&](const std::vector<std::string>& row, int col) {
    try {
      return std::stod(row[static_cast<std::size_t>(col)]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "report: non-numeric cell \"" + row[static_cast<std::size_t>(col)] + "\"");
    }
  };
  ReportCharts charts;
  if (const int subj = table.column("subject"); subj >= 0) {
    std::map<double, std::pair<std::string, std::vector<double>>> groups;
    for (const auto& row : table.rows) {
      auto& g = groups[value(row, subj)];
      g.first = row[static_cast<std::size_t>(subj)];
      g.second.push_back(value(row, acc));
    }
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& [_, g] : groups) bars.emplace_back(g.first, aggregate(g.second).mean);
    charts.per_subject = bar_chart_svg("Accuracy per subject", bars);
  }
  if (const int shot = table.column("n_shot"); shot >= 0) {
    std::map<double, std::vector<double>> groups;
    for (const auto& row : table.rows) groups[value(row, shot)].push_back(value(row, acc));
    if (groups.size() >= 2) {
      std::vector<std::pair<double, double>> points;
      for (const auto& [n, accs] : groups) points.emplace_back(n, aggregate(accs).mean);
      charts.nshot_curve = line_chart_svg("Accuracy versus shots per class", "N", points);
    }
  }
  return charts;
}

}  // namespace eegclip::train
