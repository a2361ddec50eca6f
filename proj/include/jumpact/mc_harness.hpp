#pragma once
//===========================================================================//
// Monte Carlo study of the estimators: one simulated day per replication,  //
// stable or compound-Poisson price jumps calibrated to a per-increment     //
// tail probability at the lower cutoff.                                     //
//===========================================================================//

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "jumpact/bias_correction.hpp"
#include "jumpact/estimators.hpp"
#include "jumpact/random.hpp"
#include "jumpact/sim_engine.hpp"

namespace jumpact {

struct FixedCutoffs {
  double alpha = 0.3125;       // 5 eta
  double alpha_prime = 0.625;  // 10 eta
};

/// Cutoffs at `sd_multiple` estimated continuous sd's, alpha' = ratio * alpha.
struct SdMultipleCutoffs {
  double sd_multiple = 7.0;
  double ratio = 2.0;
};

using CutoffRule = std::variant<FixedCutoffs, SdMultipleCutoffs>;

/// One cell of the study. beta == 0 selects the compound-Poisson model.
struct MCCell {
  double beta = 1.0;
  double tail_prob = 0.01;
  double delta = seconds(1.0);

  std::string label() const {
    char buf[96];
    std::snprintf(buf, sizeof buf, "beta%.2f_p%.4f_d%.0fs", beta, tail_prob,
                  delta * kSecondsPerDay);
    return buf;
  }
};

struct MCConfig {
  SVModelSpec model = reference_sv_model();
  std::vector<double> beta_values{1.5, 1.25, 1.0, 0.75, 0.5, 0.25, 0.0};
  std::vector<double> tail_probs{0.0025, 0.005, 0.01, 0.025};
  std::vector<double> deltas{seconds(1.0)};
  double varpi = 0.2;
  CutoffRule cutoffs = FixedCutoffs{};
  double horizon = 1.0;
  double poisson_jump_size = 0.10;
  std::size_t n_reps = 500;
  std::uint64_t master_seed = 20090601;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    model.validate();
    require(n_reps >= 1, "MCConfig: n_reps must be >= 1");
    require(varpi > 0.0 && varpi < 0.5, "MCConfig: varpi must lie in (0,1/2)");
    require(horizon > 0.0, "MCConfig: horizon must be positive");
    for (double b : beta_values)
      require(b == 0.0 || (b > 0.0 && b < 2.0), "MCConfig: beta values must be 0 or in (0,2)");
    for (double p : tail_probs) require(p > 0.0 && p < 1.0, "MCConfig: tail_probs in (0,1)");
    for (double d : deltas) require(d > 0.0 && d <= horizon, "MCConfig: bad delta");
    if (const auto* f = std::get_if<FixedCutoffs>(&cutoffs))
      require(f->alpha > 0.0 && f->alpha < f->alpha_prime, "MCConfig: need 0 < alpha < alpha'");
    if (const auto* s = std::get_if<SdMultipleCutoffs>(&cutoffs))
      require(s->sd_multiple > 0.0 && s->ratio > 1.0, "MCConfig: bad sd-multiple cutoffs");
  }

  /// Cells in table order: beta-major, then delta, then tail probability.
  std::vector<MCCell> cells() const {
    std::vector<MCCell> out;
    for (double b : beta_values)
      for (double d : deltas)
        for (double p : tail_probs) out.push_back({b, p, d});
    return out;
  }
};

/// Summary of one estimator over the replications of a cell.
struct EstimatorSummary {
  std::vector<double> estimates;     // unflagged replications, in order
  std::vector<double> standardized;  // (beta_hat - beta) / se of the same
  std::vector<double> std_errors;
  std::size_t n_zero_count = 0;
  std::size_t n_ge_two = 0;
  double sample_mean = 0.0;
  double sample_stdev = 0.0;
  double mean_asymptotic_se = 0.0;
};

struct MCCellResult {
  MCCell cell;
  std::size_t n_reps = 0;
  double theta = 0.0;   // stable scale (0 for compound Poisson)
  double lambda = 0.0;  // compound-Poisson rate (0 for stable)
  EstimatorSummary corrected;  // two-cutoff, closed-form bias at the true parameters
  EstimatorSummary raw;        // uncorrected two-cutoff
  EstimatorSummary feasible;   // two-cutoff, closed-form bias from the data only
  std::optional<EstimatorSummary> two_scales;
};

struct CellOptions {
  bool two_scales = false;
};

namespace detail {
inline double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double stdev_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

inline std::uint64_t cell_id(const MCCell& c) {
  return mix64(std::bit_cast<std::uint64_t>(c.beta)) ^
         mix64(std::bit_cast<std::uint64_t>(c.tail_prob) + 1) ^
         mix64(std::bit_cast<std::uint64_t>(c.delta) + 2);
}

inline void summarize(EstimatorSummary& s, std::span<const EstimateResult> reps, double beta) {
  for (const auto& r : reps) {
    if (r.flag_zero_count) {
      ++s.n_zero_count;
      continue;
    }
    if (r.flag_ge_two) {
      ++s.n_ge_two;
      continue;
    }
    s.estimates.push_back(r.beta_hat);
    if (r.std_error) {
      s.std_errors.push_back(*r.std_error);
      if (const auto z = r.standardized(beta)) s.standardized.push_back(*z);
    }
  }
  s.sample_mean = mean_of(s.estimates);
  s.sample_stdev = stdev_of(s.estimates);
  s.mean_asymptotic_se = mean_of(s.std_errors);
}

/// Runs `fn(i)` for i in [0, n) on a fixed number of worker threads.
inline void parallel_for(std::size_t n, std::size_t threads,
                         const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}
}  // namespace detail

/// Model for one cell with the jump scale calibrated to the tail probability.
inline SVModelSpec cell_model(const MCConfig& cfg, const MCCell& cell, double* theta_out = nullptr,
                              double* lambda_out = nullptr) {
  SVModelSpec spec = cfg.model;
  if (cell.beta == 0.0) {
    const double lambda = calibrate_lambda(cell.tail_prob, cell.delta);
    spec.price_jumps.emplace<CompoundPoissonSpec>(lambda, FixedSize{cfg.poisson_jump_size});
    if (lambda_out) *lambda_out = lambda;
  } else {
    double alpha = 0.0;
    if (const auto* f = std::get_if<FixedCutoffs>(&cfg.cutoffs)) {
      alpha = f->alpha;
    } else {
      const auto& s = std::get<SdMultipleCutoffs>(cfg.cutoffs);
      alpha = alpha_for_sd_multiple(s.sd_multiple, std::sqrt(cfg.model.eta), cell.delta,
                                    cfg.varpi);
    }
    const double theta = calibrate_theta(cell.beta, alpha, cfg.varpi, cell.delta, cell.tail_prob);
    spec.price_jumps = StableJumps{cell.beta, theta};
    if (theta_out) *theta_out = theta;
  }
  return spec;
}

/// Estimator configuration applied to one simulated sample.
inline std::optional<EstimatorConfig> cutoffs_for(const MCConfig& cfg, std::span<const double> r,
                                                  double delta) {
  if (const auto* f = std::get_if<FixedCutoffs>(&cfg.cutoffs))
    return EstimatorConfig{cfg.varpi, f->alpha, f->alpha_prime, delta};
  const auto& s = std::get<SdMultipleCutoffs>(cfg.cutoffs);
  const double m[] = {s.sd_multiple};
  const double q[] = {s.ratio};
  const auto sel = select_cutoffs(r, delta, cfg.varpi, m, q);
  if (sel.configs.empty()) return std::nullopt;
  return sel.configs.front();
}

struct ReplicationOutput {
  EstimateResult raw;
  EstimateResult corrected;
  EstimateResult feasible;
  std::optional<EstimateResult> two_scales;
};

/// Raw estimate minus the closed-form bias at the simulated beta and theta
/// and the path's integrated variance. Compound-Poisson cells have no such
/// term and keep the raw value.
inline EstimateResult oracle_correction(const EstimateResult& raw, const SVModelSpec& spec,
                                        double sigma2) {
  EstimateResult out = raw;
  out.method = Method::closed_form_corrected;
  const auto* st = std::get_if<StableJumps>(&spec.price_jumps);
  if (raw.flag_zero_count || !st || !(st->theta > 0.0)) {
    out.flag_correction_unavailable = true;
    return out;
  }
  out.beta_hat = raw.beta_hat - closed_form_bias(st->beta, sigma2, StableScale::theta(st->theta),
                                                 raw.config);
  out.flag_ge_two = out.beta_hat >= 2.0;
  return out;
}

/// One replication: simulate, estimate, correct.
inline ReplicationOutput run_replication(const MCConfig& cfg, const MCCell& cell,
                                         const SVModelSpec& spec, std::size_t rep,
                                         const CellOptions& opt = {}) {
  const std::uint64_t seed = derive_seed(cfg.master_seed, {detail::cell_id(cell), rep});
  const PathGrid path = simulate_sv_path(spec, cfg.horizon, cell.delta, seed);
  const auto r = path.increments();
  const double t = static_cast<double>(r.size()) * cell.delta;
  double iv = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) iv += std::max((*path.spot_variance)[i], 0.0);
  iv *= cell.delta;

  ReplicationOutput out;
  const auto ec = cutoffs_for(cfg, r, cell.delta);
  if (!ec) {
    out.raw.flag_zero_count = true;
    out.corrected = out.raw;
    out.feasible = out.raw;
    if (opt.two_scales) out.two_scales = out.raw;
    return out;
  }
  out.raw = beta_hat_two_cutoffs(r, *ec);
  out.corrected = oracle_correction(out.raw, spec, iv / t);
  const double sigma_hat = estimate_continuous_vol(r, cell.delta, ec->varpi);
  out.feasible = closed_form_correction(out.raw, sigma_hat * sigma_hat, t);
  if (opt.two_scales) out.two_scales = beta_hat_two_scales(r, *ec);
  return out;
}

inline MCCellResult run_cell(const MCConfig& cfg, const MCCell& cell, const CellOptions& opt = {}) {
  cfg.validate();
  MCCellResult res;
  res.cell = cell;
  res.n_reps = cfg.n_reps;
  const SVModelSpec spec = cell_model(cfg, cell, &res.theta, &res.lambda);

  std::vector<ReplicationOutput> reps(cfg.n_reps);
  detail::parallel_for(cfg.n_reps, cfg.threads, [&](std::size_t i) {
    reps[i] = run_replication(cfg, cell, spec, i, opt);
  });

  std::vector<EstimateResult> raw, corr, feas, two;
  raw.reserve(reps.size());
  corr.reserve(reps.size());
  feas.reserve(reps.size());
  for (auto& r : reps) {
    raw.push_back(r.raw);
    corr.push_back(r.corrected);
    feas.push_back(r.feasible);
    if (r.two_scales) two.push_back(*r.two_scales);
  }
  // Corrected estimates carry the raw standard errors.
  detail::summarize(res.raw, raw, cell.beta);
  detail::summarize(res.corrected, corr, cell.beta);
  detail::summarize(res.feasible, feas, cell.beta);
  if (opt.two_scales) {
    res.two_scales.emplace();
    detail::summarize(*res.two_scales, two, cell.beta);
  }
  return res;
}

/// Both estimators on identical paths, for each beta at the first delta
/// and the tail probability `tail_prob`.
inline std::vector<MCCellResult> run_comparison(const MCConfig& cfg, double tail_prob = 0.01) {
  cfg.validate();
  std::vector<MCCellResult> out;
  for (double b : cfg.beta_values)
    out.push_back(run_cell(cfg, {b, tail_prob, cfg.deltas.front()}, {.two_scales = true}));
  return out;
}

//---------------------------------------------------------------------------//
// Histograms and CSV output                                                 //
//---------------------------------------------------------------------------//
struct Histogram {
  std::vector<double> edges;  // bin_count + 1 edges
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]. A constant sample puts everything in
/// the first bin.
inline Histogram histogram_data(std::span<const double> values, std::size_t bin_count) {
  require(bin_count >= 1, "histogram_data: need at least one bin");
  Histogram h;
  h.counts.assign(bin_count, 0);
  if (values.empty()) {
    h.edges.assign(bin_count + 1, 0.0);
    return h;
  }
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn;
  const double hi = *mx;
  const double width = (hi - lo) / static_cast<double>(bin_count);
  h.edges.resize(bin_count + 1);
  for (std::size_t i = 0; i <= bin_count; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  for (double v : values) {
    std::size_t k = 0;
    if (width > 0.0) {
      k = static_cast<std::size_t>((v - lo) / width);
      if (k >= bin_count) k = bin_count - 1;
    }
    ++h.counts[k];
  }
  return h;
}

inline void write_csv(std::ostream& os, const Histogram& h) {
  const auto old = os.precision(17);
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    os << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
  os.precision(old);
}

inline void write_table1_header(std::ostream& os) {
  os << "beta,tail_prob,delta_seconds,theta,lambda,n_reps,n_used,sample_mean,sample_stdev,"
        "asymp_stdev,raw_mean,raw_stdev,feasible_mean,feasible_stdev,n_zero_count,n_ge_two\n";
}

inline void write_table1_row(std::ostream& os, const MCCellResult& r) {
  const auto old = os.precision(10);
  os << r.cell.beta << ',' << r.cell.tail_prob << ',' << r.cell.delta * kSecondsPerDay << ','
     << r.theta << ',' << r.lambda << ',' << r.n_reps << ',' << r.corrected.estimates.size()
     << ',' << r.corrected.sample_mean << ',' << r.corrected.sample_stdev << ','
     << r.corrected.mean_asymptotic_se << ',' << r.raw.sample_mean << ',' << r.raw.sample_stdev
     << ',' << r.feasible.sample_mean << ',' << r.feasible.sample_stdev << ','
     << r.corrected.n_zero_count << ',' << r.corrected.n_ge_two << '\n';
  os.precision(old);
}

inline void write_table2_header(std::ostream& os) {
  os << "beta,estimator,sample_mean,sample_stdev,asymp_stdev,n_used,n_zero_count,n_ge_two\n";
}

inline void write_table2_rows(std::ostream& os, const MCCellResult& r) {
  const auto old = os.precision(10);
  auto row = [&](const char* name, const EstimatorSummary& s) {
    os << r.cell.beta << ',' << name << ',' << s.sample_mean << ',' << s.sample_stdev << ','
       << s.mean_asymptotic_se << ',' << s.estimates.size() << ',' << s.n_zero_count << ','
       << s.n_ge_two << '\n';
  };
  row("two_cutoffs", r.corrected);
  row("two_cutoffs_raw", r.raw);
  if (r.two_scales) row("two_scales", *r.two_scales);
  os.precision(old);
}

}  // namespace jumpact
