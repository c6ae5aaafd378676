#pragma once
// Positioning error statistics (RMS, max, sub-threshold percentages), CDF
// export and side-by-side run comparison.

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oori/csv.hpp"
#include "oori/errors.hpp"
#include "oori/geometry.hpp"

namespace oori {

inline constexpr std::array<double, 3> kErrorThresholds{2.0, 1.0, 0.3};

struct ErrorStats {
  double rms{0.0};
  double max{0.0};
  double pct_sub_2m{0.0};
  double pct_sub_1m{0.0};
  double pct_sub_30cm{0.0};
  std::size_t n{0};

  [[nodiscard]] std::array<double, 5> values() const {
    return {rms, max, pct_sub_2m, pct_sub_1m, pct_sub_30cm};
  }
};

inline constexpr std::array<const char*, 5> kStatNames{"RMS", "Max", "sub 2 m", "sub 1 m",
                                                       "sub 30 cm"};

inline double percent_within(std::span<const double> errors, double threshold) {
  const auto k = std::count_if(errors.begin(), errors.end(), [&](double e) { return e <= threshold; });
  // same k/n as the CDF fraction, so both views agree exactly
  return 100.0 * (static_cast<double>(k) / static_cast<double>(errors.size()));
}

inline ErrorStats error_stats(std::span<const double> errors) {
  if (errors.empty()) throw DataError("error statistics need at least one error");
  double sq = 0.0;
  double mx = 0.0;
  for (double e : errors) {
    if (!(e >= 0.0)) throw DataError("positioning errors must be >= 0");
    sq += e * e;
    mx = std::max(mx, e);
  }
  ErrorStats s;
  s.n = errors.size();
  s.rms = std::sqrt(sq / static_cast<double>(errors.size()));
  s.max = mx;
  s.pct_sub_2m = percent_within(errors, kErrorThresholds[0]);
  s.pct_sub_1m = percent_within(errors, kErrorThresholds[1]);
  s.pct_sub_30cm = percent_within(errors, kErrorThresholds[2]);
  return s;
}

struct CdfPoint {
  double error{0.0};
  double fraction{0.0};
};

/// Empirical CDF: the i-th smallest error (1-based) carries fraction i/n.
inline std::vector<CdfPoint> cdf_points(std::span<const double> errors) {
  if (errors.empty()) throw DataError("CDF needs at least one error");
  std::vector<double> sorted(errors.begin(), errors.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out(sorted.size());
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out[i] = {sorted[i], static_cast<double>(i + 1) / n};
  }
  return out;
}

/// Fraction of errors <= threshold read off a CDF.
inline double cdf_at(const std::vector<CdfPoint>& cdf, double threshold) {
  double f = 0.0;
  for (const auto& p : cdf) {
    if (p.error <= threshold) f = p.fraction;
  }
  return f;
}

inline void write_cdf(std::ostream& out, const std::vector<CdfPoint>& cdf) {
  out << "err_m,cum_frac\n";
  for (const auto& p : cdf) out << csv::fmt(p.error) << ',' << csv::fmt(p.fraction) << '\n';
}

namespace detail {

inline std::string fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

inline std::string stat_cell(std::size_t row, double v) {
  return row < 2 ? fixed(v, 3) + " m" : fixed(v, 1) + " %";
}

}  // namespace detail

using StatColumn = std::pair<std::string, ErrorStats>;

/// Aligned text table, rows RMS / Max / sub 2 m / sub 1 m / sub 30 cm.
inline std::string render_table(const std::vector<StatColumn>& cols) {
  std::vector<std::vector<std::string>> cells(6);
  cells[0].push_back("");
  for (const auto& c : cols) cells[0].push_back(c.first);
  for (std::size_t r = 0; r < 5; ++r) {
    cells[r + 1].push_back(kStatNames[r]);
    for (const auto& c : cols) cells[r + 1].push_back(detail::stat_cell(r, c.second.values()[r]));
  }
  std::vector<std::string> n_row{"n"};
  for (const auto& c : cols) n_row.push_back(std::to_string(c.second.n));
  cells.push_back(std::move(n_row));
  std::vector<std::size_t> width(cols.size() + 1, 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      } else {
        os << "  " << std::right << std::setw(static_cast<int>(width[i])) << row[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

inline std::string render_table_csv(const std::vector<StatColumn>& cols) {
  std::ostringstream os;
  os << "stat";
  for (const auto& c : cols) os << ',' << c.first;
  os << '\n';
  const std::array<const char*, 5> keys{"rms_m", "max_m", "pct_sub_2m", "pct_sub_1m",
                                        "pct_sub_30cm"};
  for (std::size_t r = 0; r < 5; ++r) {
    os << keys[r];
    for (const auto& c : cols) os << ',' << csv::fmt(c.second.values()[r]);
    os << '\n';
  }
  os << 'n';
  for (const auto& c : cols) os << ',' << c.second.n;
  os << '\n';
  return os.str();
}

/// Errors of one positioning run, keyed by the epoch each fix belongs to.
struct RunResult {
  std::string name;
  std::vector<double> epochs;
  std::vector<double> errors;
};

struct Comparison {
  std::string name_a;
  std::string name_b;
  ErrorStats a;
  ErrorStats b;
  std::array<double, 5> deltas{};  ///< a - b per statistic

  [[nodiscard]] std::string text() const {
    std::ostringstream os;
    os << render_table({{name_a, a}, {name_b, b}});
    os << "delta (" << name_a << " - " << name_b << "):";
    for (std::size_t i = 0; i < 5; ++i) {
      os << ' ' << kStatNames[i] << '=' << detail::fixed(deltas[i], i < 2 ? 3 : 1);
      if (i + 1 < 5) os << ';';
    }
    os << '\n';
    return os.str();
  }

  [[nodiscard]] std::string csv() const {
    std::ostringstream os;
    os << "stat," << name_a << ',' << name_b << ",delta\n";
    const std::array<const char*, 5> keys{"rms_m", "max_m", "pct_sub_2m", "pct_sub_1m",
                                          "pct_sub_30cm"};
    for (std::size_t i = 0; i < 5; ++i) {
      os << keys[i] << ',' << csv::fmt(a.values()[i]) << ',' << csv::fmt(b.values()[i]) << ','
         << csv::fmt(deltas[i]) << '\n';
    }
    return os.str();
  }
};

inline Comparison compare_runs(const RunResult& a, const RunResult& b) {
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  if (a.epochs.size() != a.errors.size() || b.epochs.size() != b.errors.size()) {
    throw DataError("run has mismatched epoch and error counts");
  }
  if (sorted(a.epochs) != sorted(b.epochs)) throw DataError("runs cover different epochs");
  Comparison c{a.name, b.name, error_stats(a.errors), error_stats(b.errors), {}};
  for (std::size_t i = 0; i < 5; ++i) c.deltas[i] = c.a.values()[i] - c.b.values()[i];
  return c;
}

}  // namespace oori
