#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eegclip/training/experiments.hpp"

namespace eegclip::train {

/// Fixed "%.6f" formatting so equal runs give equal bytes.
std::string format_fixed(double value);

/// One row per fold.
std::string results_csv(std::span<const FoldResult> folds);

/// Two-row table of both ablation arms: method, ACC(%), STD(%).
std::string ablation_table_csv(const ExperimentResult& ablation);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index or -1.
  int column(const std::string& name) const;
};

/// Plain comma-separated values without quoting.
CsvTable parse_csv(const std::string& text);

std::string bar_chart_svg(const std::string& title, const std::vector<std::pair<std::string, double>>& bars);
std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::vector<std::pair<double, double>>& points);

struct ReportCharts {
  /// Mean accuracy per subject; needs "subject" and "accuracy" columns.
  std::optional<std::string> per_subject;
  /// Mean accuracy per N; needs "n_shot" with at least two distinct values.
  std::optional<std::string> nshot_curve;
};

ReportCharts render_report(const CsvTable& table);

}  // namespace eegclip::train
