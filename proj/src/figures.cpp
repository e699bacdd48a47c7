#include <array>
#include <sstream>

#include "escape/analytic_model.hpp"
#include "escape/scenario.hpp"
#include "escape/text.hpp"

namespace escape::scenario {

namespace {

using analytic::DetectionParams;
using analytic::GrowthModel;
using analytic::LogisticGrowth;
using analytic::Mobility;
using analytic::StaticGrowth;

// Parameter grids for the figure scenarios. Host count and the N=7 case are
// taken from the published scenarios; the sweeps and logistic parameters are
// our own choices and are printed in every output header.
constexpr int kHosts = 20;
constexpr int kFig6Attackers = 7;
constexpr std::array kDetectionTimes{0.05, 0.1, 0.5, 1.0, 2.0, 5.0};
constexpr std::array kLogisticRates{0.1, 0.3, 0.5, 1.0};
constexpr double kLogisticN0 = 2.0;
constexpr double kLogisticMu = 15.0;
constexpr double kFig9Rate = 0.5;
constexpr int kTimeFirst = 2;
constexpr int kTimeLast = 100;

struct Column {
  std::string name;
  Mobility mode;
  GrowthModel growth;
  DetectionParams detection;
};

std::vector<double> time_grid() {
  std::vector<double> grid;
  for (int t = kTimeFirst; t <= kTimeLast; ++t) {
    grid.push_back(t);
  }
  return grid;
}

std::string join(auto const& values) {
  std::string s;
  for (const double v : values) {
    s += (s.empty() ? "" : ",") + text::format_real(v);
  }
  return s;
}

std::string render(std::string_view figure, const std::vector<std::string>& comments,
                   const std::vector<Column>& columns) {
  const auto grid = time_grid();
  std::vector<analytic::SurvivalCurve> curves;
  curves.reserve(columns.size());
  for (const auto& c : columns) {
    curves.push_back(analytic::survival_curve(c.mode, c.growth, kHosts, c.detection, grid));
  }
  std::ostringstream out;
  out << "# figure=" << figure << " model=analytic\n";
  for (const auto& line : comments) {
    out << "# " << line << '\n';
  }
  out << "# t_grid=" << kTimeFirst << ".." << kTimeLast << " step=1\n";
  out << 't';
  for (const auto& c : columns) {
    out << ',' << c.name;
  }
  out << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << text::format_csv(grid[i]);
    for (const auto& curve : curves) {
      out << ',' << text::format_csv(curve.points[i].p);
    }
    out << '\n';
  }
  return std::move(out).str();
}

std::string fig5() {
  std::vector<Column> cols;
  for (int n = 1; n < kHosts; ++n) {
    const GrowthModel g = StaticGrowth{static_cast<double>(n)};
    cols.push_back({"p_static_N" + std::to_string(n), Mobility::Static, g,
                    DetectionParams::disabled()});
    cols.push_back({"p_mobile_N" + std::to_string(n), Mobility::Mobile, g,
                    DetectionParams::disabled()});
  }
  return render("fig5",
                {"V=" + std::to_string(kHosts) + " N=1..19 growth=static detection=disabled"},
                cols);
}

std::string fig6() {
  std::vector<Column> cols;
  for (const double td : kDetectionTimes) {
    cols.push_back({"p_mobile_td" + text::format_real(td), Mobility::Mobile,
                    StaticGrowth{kFig6Attackers}, DetectionParams::with_time(td)});
  }
  return render("fig6",
                {"V=" + std::to_string(kHosts) + " N=" + std::to_string(kFig6Attackers) +
                     " growth=static mode=mobile",
                 "td_grid=" + join(kDetectionTimes) + " (chosen grid)"},
                cols);
}

std::string fig8() {
  std::vector<Column> cols;
  for (const double k : kLogisticRates) {
    const GrowthModel g = LogisticGrowth{kLogisticN0, k, kLogisticMu};
    cols.push_back({"p_static_k" + text::format_real(k), Mobility::Static, g,
                    DetectionParams::disabled()});
    cols.push_back({"p_mobile_k" + text::format_real(k), Mobility::Mobile, g,
                    DetectionParams::disabled()});
  }
  return render("fig8",
                {"V=" + std::to_string(kHosts) + " growth=logistic n0=" +
                     text::format_real(kLogisticN0) + " mu=" + text::format_real(kLogisticMu) +
                     " detection=disabled (n0 and mu are chosen defaults)",
                 "k_grid=" + join(kLogisticRates) + " (chosen grid)"},
                cols);
}

std::string fig9() {
  std::vector<Column> cols;
  const GrowthModel g = LogisticGrowth{kLogisticN0, kFig9Rate, kLogisticMu};
  for (const double td : kDetectionTimes) {
    cols.push_back({"p_mobile_td" + text::format_real(td), Mobility::Mobile, g,
                    DetectionParams::with_time(td)});
  }
  return render("fig9",
                {"V=" + std::to_string(kHosts) + " growth=logistic n0=" +
                     text::format_real(kLogisticN0) + " k=" + text::format_real(kFig9Rate) +
                     " mu=" + text::format_real(kLogisticMu) +
                     " mode=mobile (n0, k and mu are chosen defaults)",
                 "td_grid=" + join(kDetectionTimes) + " (chosen grid)"},
                cols);
}

}  // namespace

Figure parse_figure(std::string_view name) {
  for (const auto f : {Figure::Fig5, Figure::Fig6, Figure::Fig8, Figure::Fig9}) {
    if (to_string(f) == name) {
      return f;
    }
  }
  throw SpecError("unknown figure '" + std::string(name) +
                  "' (expected fig5, fig6, fig8 or fig9)");
}

std::string to_string(Figure figure) {
  switch (figure) {
    case Figure::Fig5:
      return "fig5";
    case Figure::Fig6:
      return "fig6";
    case Figure::Fig8:
      return "fig8";
    case Figure::Fig9:
      return "fig9";
  }
  return "?";
}

std::string run_figure(Figure figure) {
  switch (figure) {
    case Figure::Fig5:
      return fig5();
    case Figure::Fig6:
      return fig6();
    case Figure::Fig8:
      return fig8();
    case Figure::Fig9:
      return fig9();
  }
  return {};
}

}  // namespace escape::scenario
