#pragma once
//===========================================================================//
// Trade-data pipeline: parse, clean, previous-tick calendar sampling,      //
// descriptive statistics and windowed estimation.                           //
//===========================================================================//

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jumpact/bias_correction.hpp"
#include "jumpact/estimators.hpp"
#include "jumpact/sim_engine.hpp"

namespace jumpact {

enum class TickStatus { valid, corrected, cancelled };

struct TickRecord {
  double timestamp = 0.0;  // seconds; absolute (exchange-local epoch) or since open
  double price = 0.0;
  TickStatus status = TickStatus::valid;
};

struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_no(line) {}
  std::size_t line_no;
};

inline constexpr double kSecondsPerCalendarDay = 86400.0;

namespace detail {
inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// YYYY-MM-DD[T ]hh:mm:ss[.fff] -> seconds since 1970-01-01 00:00 (no zone).
inline std::optional<double> parse_iso8601(std::string_view s) {
  s = trim(s);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  const std::string buf(s);
  int consumed = 0;
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2d%c%2d:%2d:%lf%n", &y, &mo, &d, &sep, &h, &mi, &sec,
                  &consumed) != 7 ||
      static_cast<std::size_t>(consumed) != buf.size() || (sep != 'T' && sep != ' '))
    return std::nullopt;
  using namespace std::chrono;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0) return std::nullopt;
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days) * kSecondsPerCalendarDay + h * 3600.0 + mi * 60.0 + sec;
}

inline std::optional<TickStatus> parse_status(std::string_view s) {
  s = trim(s);
  std::string low(s);
  for (auto& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low.empty() || low == "valid") return TickStatus::valid;
  if (low == "corrected") return TickStatus::corrected;
  if (low == "cancelled" || low == "canceled") return TickStatus::cancelled;
  return std::nullopt;
}
}  // namespace detail

/// Reads `timestamp,price[,status]` lines. A first line whose timestamp
/// field does not parse is taken as a header. Timestamps are either
/// numeric seconds or ISO-8601 date-times.
inline std::vector<TickRecord> parse_tick_csv(std::istream& in) {
  std::vector<TickRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto pos = view.find(',', start);
      fields.push_back(view.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    auto ts = detail::parse_number(fields[0]);
    if (!ts) ts = detail::parse_iso8601(fields[0]);
    if (!ts) {
      if (line_no == 1) continue;  // header
      throw ParseError(line_no, "unparseable timestamp '" + std::string(fields[0]) + "'");
    }
    if (fields.size() < 2 || fields.size() > 3)
      throw ParseError(line_no, "expected 2 or 3 fields");
    const auto px = detail::parse_number(fields[1]);
    if (!px) throw ParseError(line_no, "unparseable price '" + std::string(fields[1]) + "'");
    TickRecord rec{*ts, *px, TickStatus::valid};
    if (fields.size() == 3) {
      const auto st = detail::parse_status(fields[2]);
      if (!st) throw ParseError(line_no, "unknown status '" + std::string(fields[2]) + "'");
      rec.status = *st;
    }
    out.push_back(rec);
  }
  return out;
}

/// Drops nonpositive prices and records that are not valid; keeps order.
inline std::vector<TickRecord> clean_ticks(std::span<const TickRecord> records) {
  std::vector<TickRecord> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (r.status == TickStatus::valid && r.price > 0.0 && std::isfinite(r.price))
      out.push_back(r);
  return out;
}

//---------------------------------------------------------------------------//
// Calendar sampling                                                         //
//---------------------------------------------------------------------------//
struct SessionSpec {
  double open = 9.5 * 3600.0;   // seconds after midnight
  double close = 16.0 * 3600.0;
  double step = 5.0;            // seconds
  /// Timestamps are seconds since the session open of a single day.
  bool relative_timestamps = false;

  double length() const { return close - open; }
  std::size_t n_steps() const {
    return static_cast<std::size_t>(std::llround(length() / step));
  }
  /// Sampling interval in model time (trading days).
  double delta() const { return step / length(); }

  void validate() const {
    require(open < close, "SessionSpec: open must precede close");
    require(step > 0.0, "SessionSpec: step must be positive");
    const double k = length() / step;
    require(std::abs(k - std::round(k)) < 1e-9, "SessionSpec: step must divide the session");
  }
};

/// Previous-tick sampling of one session. `records` are cleaned, time
/// sorted and expressed in seconds since the session open. Grid points
/// before the first trade take the first trade's price.
inline PathGrid sample_calendar(std::span<const TickRecord> records, const SessionSpec& session) {
  session.validate();
  require(!records.empty(), "sample_calendar: no trades in session");
  for (std::size_t i = 1; i < records.size(); ++i)
    require(records[i].timestamp >= records[i - 1].timestamp,
            "sample_calendar: records must be time sorted");
  const std::size_t n = session.n_steps();
  PathGrid g;
  g.delta = session.delta();
  g.values.resize(n + 1);
  std::size_t j = 0;  // number of trades at or before the grid time
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) * session.step;
    while (j < records.size() && records[j].timestamp <= t) ++j;
    const double px = (j == 0) ? records.front().price : records[j - 1].price;
    g.values[k] = std::log(px);
  }
  return g;
}

struct DaySample {
  std::int64_t day = 0;  // days since 1970-01-01
  PathGrid grid;
  std::size_t n_trades = 0;
};

/// Splits cleaned records into sessions and samples each one. Records
/// outside [open, close] are ignored; days without trades are skipped.
inline std::vector<DaySample> sample_sessions(std::span<const TickRecord> records,
                                              const SessionSpec& session) {
  session.validate();
  std::vector<TickRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TickRecord& a, const TickRecord& b) { return a.timestamp < b.timestamp; });
  std::vector<DaySample> out;
  std::vector<TickRecord> day_recs;
  std::int64_t cur = 0;
  bool have = false;
  auto flush = [&] {
    if (have && !day_recs.empty())
      out.push_back({cur, sample_calendar(day_recs, session), day_recs.size()});
    day_recs.clear();
  };
  for (const auto& r : sorted) {
    std::int64_t day = 0;
    double tod = r.timestamp + session.open;
    if (!session.relative_timestamps) {
      day = static_cast<std::int64_t>(std::floor(r.timestamp / kSecondsPerCalendarDay));
      tod = r.timestamp - static_cast<double>(day) * kSecondsPerCalendarDay;
    }
    if (!have || day != cur) {
      flush();
      cur = day;
      have = true;
    }
    if (tod < session.open || tod > session.close) continue;
    day_recs.push_back({tod - session.open, r.price, r.status});
  }
  flush();
  return out;
}

/// Intraday log-returns of all sessions; overnight increments are dropped.
inline std::vector<double> intraday_returns(std::span<const DaySample> days) {
  std::vector<double> r;
  for (const auto& d : days) {
    const auto inc = d.grid.increments();
    r.insert(r.end(), inc.begin(), inc.end());
  }
  return r;
}

/// Calendar quarter (1..4) of a day number.
inline int quarter_of(std::int64_t day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day}}};
  return static_cast<int>((static_cast<unsigned>(ymd.month()) - 1) / 3 + 1);
}

//---------------------------------------------------------------------------//
// Descriptive statistics                                                    //
//---------------------------------------------------------------------------//
struct DescriptiveStats {
  std::size_t n = 0;
  double mean = 0.0;
  double stdev = 0.0;                // population
  std::optional<double> skewness;    // undefined when stdev = 0
  std::optional<double> kurtosis;    // raw standardized fourth moment
  double min = 0.0;
  double max = 0.0;
};

inline DescriptiveStats descriptive_stats(std::span<const double> x) {
  require(!x.empty(), "descriptive_stats: empty sample");
  DescriptiveStats s;
  s.n = x.size();
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  s.stdev = std::sqrt(m2);
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.kurtosis = m4 / (m2 * m2);
  }
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  s.min = *mn;
  s.max = *mx;
  return s;
}

inline void write_stats_header(std::ostream& os) {
  os << "period,n,mean,stdev,skew,kurt,min,max\n";
}

inline void write_stats_row(std::ostream& os, const std::string& period,
                            const DescriptiveStats& s) {
  const auto old = os.precision(10);
  os << period << ',' << s.n << ',' << s.mean << ',' << s.stdev << ',';
  if (s.skewness) os << *s.skewness;
  os << ',';
  if (s.kurtosis) os << *s.kurtosis;
  os << ',' << s.min << ',' << s.max << '\n';
  os.precision(old);
}

//---------------------------------------------------------------------------//
// Grid estimation workflow                                                  //
//---------------------------------------------------------------------------//
struct GridOptions {
  double varpi = 0.2;
  std::vector<double> sd_multiples = default_avg_multiples();
  std::vector<double> ratios = default_avg_ratios();
  std::vector<double> regression_multiples = default_regression_multiples();
  bool bias_correct = true;
};

struct GridEstimates {
  double sigma_hat = 0.0;
  std::vector<EstimateResult> per_config;
  std::optional<EstimateResult> average;
  std::optional<RegressionFit> fit;
  std::optional<EstimateResult> corrected_average;
  std::optional<std::string> diagnostic;
};

/// Cutoff selection, two-cutoff estimates over the grid, their average, and
/// the regression-corrected average (each grid estimate corrected with one
/// fit at the first-stage average, then averaged).
inline GridEstimates estimate_grid(std::span<const double> returns, double delta,
                                   const GridOptions& opt) {
  GridEstimates g;
  const auto sel = select_cutoffs(returns, delta, opt.varpi, opt.sd_multiples, opt.ratios);
  g.sigma_hat = sel.sigma_hat;
  if (sel.configs.empty()) {
    g.diagnostic = sel.diagnostic.value_or("no cutoff configurations");
    return g;
  }
  for (const auto& c : sel.configs) g.per_config.push_back(beta_hat_two_cutoffs(returns, c));
  g.average = avg_estimator(g.per_config);
  if (!opt.bias_correct) return g;

  const double b0 = g.average->beta_hat;
  if (g.average->flag_zero_count || !(b0 > 0.0 && b0 < 2.0)) {
    g.diagnostic = "first-stage estimate outside (0,2); regression correction skipped";
    return g;
  }
  std::vector<double> grid;
  for (double m : opt.regression_multiples)
    grid.push_back(alpha_for_sd_multiple(m, g.sigma_hat, delta, opt.varpi));
  try {
    g.fit = fit_bias_regression(returns, delta, opt.varpi, grid, b0);
  } catch (const DegenerateDesign& e) {
    g.diagnostic = e.what();
    return g;
  }
  std::vector<EstimateResult> corrected;
  for (const auto& r : g.per_config) corrected.push_back(regression_correction(r, *g.fit));
  EstimateResult avg = avg_estimator(corrected);
  avg.method = Method::regression_corrected;
  for (const auto& r : corrected) avg.flag_correction_unavailable |= r.flag_correction_unavailable;
  g.corrected_average = avg;
  return g;
}

//---------------------------------------------------------------------------//
// Rolling windows                                                           //
//---------------------------------------------------------------------------//
struct WindowEstimate {
  std::int64_t first_day = 0;
  std::int64_t last_day = 0;
  std::size_t n_days = 0;
  std::size_t n_returns = 0;
  bool flag_empty = false;
  GridEstimates estimates;
};

/// Non-overlapping windows of `window_days` consecutive sessions; cutoffs
/// are re-selected in every window.
inline std::vector<WindowEstimate> rolling_estimates(std::span<const DaySample> days,
                                                     std::size_t window_days,
                                                     const GridOptions& opt) {
  require(window_days >= 1, "rolling_estimates: window must be at least one day");
  std::vector<WindowEstimate> out;
  for (std::size_t start = 0; start < days.size(); start += window_days) {
    const auto chunk = days.subspan(start, std::min(window_days, days.size() - start));
    WindowEstimate w;
    w.first_day = chunk.front().day;
    w.last_day = chunk.back().day;
    w.n_days = chunk.size();
    const auto r = intraday_returns(chunk);
    w.n_returns = r.size();
    const bool all_flat = std::all_of(r.begin(), r.end(), [](double x) { return x == 0.0; });
    if (r.empty() || all_flat) {
      w.flag_empty = true;
      out.push_back(std::move(w));
      continue;
    }
    w.estimates = estimate_grid(r, chunk.front().grid.delta, opt);
    out.push_back(std::move(w));
  }
  return out;
}

inline std::string format_day(std::int64_t day) {
  using namespace std::chrono;
  const year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline void write_rolling_header(std::ostream& os) {
  os << "first_day,last_day,n_days,n_returns,sigma_hat,beta_avg,avg_dispersion,beta_corrected,"
        "flags\n";
}

inline void write_rolling_row(std::ostream& os, const WindowEstimate& w, bool relative) {
  const auto old = os.precision(10);
  auto day = [&](std::int64_t d) { return relative ? std::to_string(d) : format_day(d); };
  os << day(w.first_day) << ',' << day(w.last_day) << ',' << w.n_days << ',' << w.n_returns
     << ',';
  std::string flags;
  if (w.flag_empty) {
    flags = "empty_window";
    os << ",,,," << flags << '\n';
    os.precision(old);
    return;
  }
  const auto& e = w.estimates;
  os << e.sigma_hat << ',';
  if (e.average) os << e.average->beta_hat;
  os << ',';
  if (e.average && e.average->std_error) os << *e.average->std_error;
  os << ',';
  if (e.corrected_average) os << e.corrected_average->beta_hat;
  if (e.average) flags = e.average->flags();
  if (e.diagnostic) flags += flags.empty() ? "diagnostic" : "|diagnostic";
  os << ',' << flags << '\n';
  os.precision(old);
}

}  // namespace jumpact
