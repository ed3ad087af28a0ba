#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dynmatch/format.hpp"
#include "dynmatch/io.hpp"
#include "dynmatch/simulation.hpp"

namespace dynmatch {

inline std::string cell_csv_name(const NoiseSpec& n) { return "cell_" + n.label() + ".csv"; }

// month,mechanism,seed,<metrics...>; seed is "mean" for the average over
// replications, which comes after the per-seed rows of each month/mechanism.
inline std::string cell_csv(const CellResult& cell, const std::vector<std::uint64_t>& seeds) {
  std::ostringstream out;
  out << "month,mechanism,seed";
  for (auto name : kMetricNames) out << ',' << name;
  out << '\n';
  const auto months = cell.mean.empty() ? 0 : cell.mean.front().months();
  auto row = [&](std::size_t month, MechanismKind k, const std::string& seed, const MetricsReport& r) {
    out << month + 1 << ',' << to_string(k) << ',' << seed;
    for (std::size_t i = 0; i < MetricsReport::kSeries; ++i) out << ',' << format_fixed(metric_series(r, i)[month]);
    out << '\n';
  };
  for (std::size_t month = 0; month < months; ++month)
    for (std::size_t m = 0; m < cell.mechanisms.size(); ++m) {
      for (std::size_t s = 0; s < seeds.size(); ++s)
        row(month, cell.mechanisms[m], std::to_string(seeds[s]), cell.by_seed[m][s]);
      row(month, cell.mechanisms[m], "mean", cell.mean[m]);
    }
  return out.str();
}

struct SummaryMetric {
  std::string name;
  std::size_t series;
  bool last_month;  // report the value at the last reported month instead of the window mean
};

inline const std::vector<SummaryMetric>& summary_metrics() {
  static const std::vector<SummaryMetric> m{
      {"placements", 0, false},        {"teen_placed", 5, false},    {"high_needs_placed", 6, false},
      {"waste", 4, false},             {"envy_share", 3, false},     {"waiting_cost", 2, false},
      {"waiting_cost_final", 2, true}, {"non_disruption", 7, false},
  };
  return m;
}

// Table layout: one row per (noise family, metric, mechanism), one column per
// noise level. The noiseless cell is level 0 of every family; levels a family
// lacks are left empty.
inline std::string summary_csv(const ExperimentResult& r) {
  const auto months = r.config.report_months;
  std::map<NoiseSpec::Kind, std::map<long, const CellResult*>> families;
  std::set<long> levels;
  const CellResult* none = nullptr;
  for (const auto& c : r.cells) {
    const long pct = std::lround(c.noise.k * 100);
    if (c.noise.kind == NoiseSpec::Kind::None) {
      none = &c;
    } else {
      families[c.noise.kind][pct] = &c;
      levels.insert(pct);
    }
  }
  if (none) {
    if (families.empty()) families[NoiseSpec::Kind::None] = {};
    for (auto& [kind, cols] : families) cols[0] = none;
    levels.insert(0);
  }

  std::ostringstream out;
  out << "table,metric,mechanism";
  for (long pct : levels) out << ",k_" << pct;
  out << '\n';
  for (const auto& [kind, cols] : families) {
    const char* table = kind == NoiseSpec::Kind::Bias ? "bias" : kind == NoiseSpec::Kind::Variance ? "variance" : "none";
    for (const auto& metric : summary_metrics())
      for (auto k : r.config.mechanisms) {
        out << table << ',' << metric.name << ',' << to_string(k);
        for (long pct : levels) {
          out << ',';
          auto cell_it = cols.find(pct);
          if (cell_it == cols.end()) continue;
          const auto* cell = cell_it->second;
          auto it = std::find(cell->mechanisms.begin(), cell->mechanisms.end(), k);
          const auto& series =
              metric_series(cell->mean[static_cast<std::size_t>(it - cell->mechanisms.begin())], metric.series);
          double v = 0.0;
          if (metric.last_month)
            v = series.empty() ? 0.0 : series[std::min(months, series.size()) - 1];
          else
            v = window_mean(series, months);
          out << format_fixed(v);
        }
        out << '\n';
      }
  }
  return out.str();
}

inline std::vector<std::filesystem::path> write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& c : r.cells) {
    written.push_back(dir / cell_csv_name(c.noise));
    write_text_file(written.back(), cell_csv(c, r.config.seeds));
  }
  written.push_back(dir / "summary.csv");
  write_text_file(written.back(), summary_csv(r));
  return written;
}

}  // namespace dynmatch
