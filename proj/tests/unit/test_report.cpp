#include <gtest/gtest.h>

#include <regex>

#include "eegclip/error.hpp"
#include "eegclip/training/report.hpp"

using namespace eegclip;
using namespace eegclip::train;

namespace {

FoldResult fold(std::uint32_t subject, std::size_t n_shot, double acc, const char* arm = kArmMatching) {
  FoldResult f;
  f.protocol = "nshot";
  f.fold_id = "s" + std::to_string(subject);
  f.arm = arm;
  f.subject = subject;
  f.test_session = 1;
  f.n_shot = n_shot;
  f.n_test = 10;
  f.accuracy = acc;
  return f;
}

/// data-value attributes of every element with the given class, in order.
std::vector<std::pair<std::string, double>> tagged(const std::string& svg, const std::string& cls,
                                                   const std::string& key_attr) {
  std::vector<std::pair<std::string, double>> out;
  const std::regex element("<[a-z]+ class=\"" + cls + "\"[^>]*>");
  const std::regex key(key_attr + "=\"([^\"]*)\"");
  const std::regex value("data-value=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), element); it != std::sregex_iterator(); ++it) {
    const std::string e = it->str();
    std::smatch k, v;
    std::regex_search(e, k, key);
    std::regex_search(e, v, value);
    out.emplace_back(k[1], std::stod(v[1]));
  }
  return out;
}

}  // namespace

TEST(ResultsCsv, HeaderAndFixedFormatting) {
  const std::vector<FoldResult> folds = {fold(1, 0, 1.0 / 3.0), fold(2, 4, 0.5)};
  const auto csv = results_csv(folds);
  const auto table = parse_csv(csv);
  EXPECT_EQ(table.header.front(), "protocol");
  ASSERT_GE(table.column("accuracy"), 0);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0][static_cast<std::size_t>(table.column("accuracy"))], "0.333333");
  EXPECT_EQ(table.rows[1][static_cast<std::size_t>(table.column("n_shot"))], "4");
  EXPECT_EQ(csv, results_csv(folds));
  EXPECT_EQ(format_fixed(0.1), "0.100000");
}

TEST(ResultsCsv, ParseRejectsRaggedRows) {
  EXPECT_THROW(parse_csv("a,b\n1\n"), Error);
  EXPECT_THROW(parse_csv(""), Error);
  EXPECT_EQ(parse_csv("a,b\n1,2\n").column("c"), -1);
}

TEST(AblationTable, TwoRowsInPercent) {
  ExperimentResult r;
  r.protocol = "ablation";
  r.folds = {fold(1, 0, 0.9), fold(2, 0, 0.7), fold(1, 0, 0.6, kArmLinear), fold(2, 0, 0.6, kArmLinear)};
  const auto t = parse_csv(ablation_table_csv(r));
  EXPECT_EQ(t.header, (std::vector<std::string>{"method", "ACC(%)", "STD(%)"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], kArmLinear);
  EXPECT_EQ(t.rows[0][1], "60.000000");
  EXPECT_EQ(t.rows[0][2], "0.000000");
  EXPECT_EQ(t.rows[1][0], kArmMatching);
  EXPECT_EQ(t.rows[1][1], "80.000000");
  EXPECT_NEAR(std::stod(t.rows[1][2]), 14.142136, 1e-6);
}

TEST(Charts, BarValuesParseBackToTheCsvMeans) {
  const std::vector<FoldResult> folds = {fold(1, 0, 0.5), fold(1, 4, 0.7), fold(2, 0, 0.25), fold(2, 4, 1.0),
                                         fold(10, 0, 0.4)};
  const auto charts = render_report(parse_csv(results_csv(folds)));
  ASSERT_TRUE(charts.per_subject.has_value());
  const auto bars = tagged(*charts.per_subject, "bar", "data-label");
  ASSERT_EQ(bars.size(), 3u);
  EXPECT_EQ(bars[0].first, "1");
  EXPECT_NEAR(bars[0].second, 0.6, 1e-6);
  EXPECT_EQ(bars[1].first, "2");
  EXPECT_NEAR(bars[1].second, 0.625, 1e-6);
  EXPECT_EQ(bars[2].first, "10");  // numeric, not lexicographic, order
  EXPECT_NEAR(bars[2].second, 0.4, 1e-6);

  ASSERT_TRUE(charts.nshot_curve.has_value());
  const auto points = tagged(*charts.nshot_curve, "point", "data-x");
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(points[0].first, "0");
  EXPECT_NEAR(points[0].second, (0.5 + 0.25 + 0.4) / 3.0, 1e-6);
  EXPECT_EQ(points[1].first, "4");
  EXPECT_NEAR(points[1].second, 0.85, 1e-6);
}

TEST(Charts, SingleShotValueGivesNoCurve) {
  const std::vector<FoldResult> folds = {fold(1, 0, 0.5), fold(2, 0, 0.7)};
  const auto charts = render_report(parse_csv(results_csv(folds)));
  EXPECT_TRUE(charts.per_subject.has_value());
  EXPECT_FALSE(charts.nshot_curve.has_value());
  EXPECT_THROW(render_report(parse_csv("x,y\n1,2\n")), Error);
}

TEST(Charts, WellFormedSvg) {
  const auto svg = line_chart_svg("t <&>", "N", {{0, 0.1}, {1, 0.9}});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("t &lt;&amp;&gt;"), std::string::npos);
  EXPECT_EQ(bar_chart_svg("x", {}).find("class=\"bar\""), std::string::npos);
}
