// Command-line front end: simulate | estimate | montecarlo | ticks.
// Every command writes manifest_<command>.json into the output directory,
// also when it fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jumpact/io.hpp"
#include "jumpact/tick_pipeline.hpp"

using namespace jumpact;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out_dir = ".";
  std::string config;
};

struct Output {
  fs::path dir;
  RunManifest* manifest;

  std::ofstream open(const std::string& name) const {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
    manifest->outputs.push_back(name);
    return out;
  }
};

// Runs `body`, then writes the manifest whatever happened. Returns the
// process exit code.
int run_command(const std::string& command, const Globals& g,
                const std::function<void(RunManifest&, const Output&)>& body) {
  RunManifest m;
  m.command = command;
  m.master_seed = g.seed;
  const fs::path dir(g.out_dir);
  int code = 0;
  try {
    fs::create_directories(dir);
    body(m, Output{dir, &m});
  } catch (const std::exception& e) {
    m.status = "error";
    m.error = e.what();
    std::cerr << "jumpact " << command << ": " << e.what() << '\n';
    code = 1;
  }
  try {
    m.write((dir / ("manifest_" + command + ".json")).string());
  } catch (const std::exception& e) {
    std::cerr << "jumpact: " << e.what() << '\n';
    code = 1;
  }
  return code;
}

double parse_clock(const std::string& s) {
  int h = 0, m = 0, sec = 0;
  char extra = 0;
  const int n = std::sscanf(s.c_str(), "%d:%d:%d%c", &h, &m, &sec, &extra);
  if (n < 2 || n > 3 || h < 0 || h > 24 || m < 0 || m > 59 || sec < 0 || sec > 59)
    throw std::invalid_argument("time of day must be HH:MM or HH:MM:SS, got '" + s + "'");
  return h * 3600.0 + m * 60.0 + sec;
}

// "beta=1.0,p=0.01,delta=1s"
MCCell parse_cell(const std::string& s) {
  MCCell c;
  std::stringstream ss(s);
  std::string item;
  bool have_beta = false;
  auto number = [](const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
      x = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (v.empty() || pos != v.size())
      throw std::invalid_argument("--cell: bad value for '" + key + "'");
    return x;
  };
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--cell: expected key=value in '" + item + "'");
    const std::string key = item.substr(0, eq);
    std::string val = item.substr(eq + 1);
    if (key == "beta") {
      c.beta = number(key, val);
      have_beta = true;
    } else if (key == "p") {
      c.tail_prob = number(key, val);
    } else if (key == "delta") {
      if (!val.empty() && val.back() == 's') val.pop_back();
      c.delta = seconds(number(key, val));
    } else {
      throw std::invalid_argument("--cell: unknown key '" + key + "'");
    }
  }
  if (!have_beta) throw std::invalid_argument("--cell: beta is required");
  return c;
}

std::size_t parse_window_days(const std::string& s) {
  std::string v = s;
  if (!v.empty() && v.back() == 'd') v.pop_back();
  std::size_t pos = 0;
  long n = 0;
  try {
    n = std::stol(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty() || n < 1)
    throw std::invalid_argument("--rolling expects a positive day count such as 10d");
  return static_cast<std::size_t>(n);
}

void check_varpi(double varpi) {
  if (!(varpi > 0.0 && varpi < 0.5))
    throw std::invalid_argument("--varpi must lie in (0, 1/2)");
}

//---------------------------------------------------------------------------//
// Input readers for `estimate`                                              //
//---------------------------------------------------------------------------//
struct ReturnSeries {
  std::vector<double> returns;
  double delta = 0.0;
};

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string detect_format(const std::vector<std::string>& lines) {
  for (const auto& raw : lines) {
    const auto l = detail::trim(raw);
    if (l.empty() || l.front() == '#') continue;
    if (l.starts_with("t,x")) return "path";
    return l.find(',') == std::string_view::npos ? "returns" : "ticks";
  }
  return "returns";
}

ReturnSeries read_returns(const std::vector<std::string>& lines, double delta) {
  ReturnSeries s;
  s.delta = delta;
  std::size_t line_no = 0;
  bool first = true;
  for (const auto& raw : lines) {
    ++line_no;
    const auto l = detail::trim(raw);
    if (l.empty() || l.front() == '#') continue;
    const auto field = detail::trim(l.substr(0, l.find(',')));
    const auto v = detail::parse_number(field);
    if (!v) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ParseError(line_no, "unparseable return '" + std::string(field) + "'");
    }
    first = false;
    s.returns.push_back(*v);
  }
  return s;
}

ReturnSeries read_path(const std::vector<std::string>& lines) {
  std::vector<double> t, x;
  std::size_t line_no = 0;
  for (const auto& raw : lines) {
    ++line_no;
    const auto l = detail::trim(raw);
    if (l.empty() || l.front() == '#' || l.starts_with("t,")) continue;
    const auto c1 = l.find(',');
    if (c1 == std::string_view::npos) throw ParseError(line_no, "expected t,x[,v]");
    const auto c2 = l.find(',', c1 + 1);
    const auto tv = detail::parse_number(l.substr(0, c1));
    const auto xv = detail::parse_number(
        l.substr(c1 + 1, c2 == std::string_view::npos ? std::string_view::npos : c2 - c1 - 1));
    if (!tv || !xv) throw ParseError(line_no, "unparseable path row");
    t.push_back(*tv);
    x.push_back(*xv);
  }
  if (x.size() < 2) throw std::runtime_error("path file needs at least two rows");
  ReturnSeries s;
  s.delta = t[1] - t[0];
  if (!(s.delta > 0.0)) throw std::runtime_error("path times must increase");
  for (std::size_t i = 1; i < x.size(); ++i) s.returns.push_back(x[i] - x[i - 1]);
  return s;
}

struct SessionFlags {
  double step = 5.0;
  std::string open = "09:30";
  std::string close = "16:00";
  bool relative = false;

  SessionSpec spec() const {
    SessionSpec s;
    s.open = parse_clock(open);
    s.close = parse_clock(close);
    s.step = step;
    s.relative_timestamps = relative;
    s.validate();
    return s;
  }

  void add_to(CLI::App* app) {
    app->add_option("--step", step, "Sampling interval in seconds")->capture_default_str();
    app->add_option("--open", open, "Session open HH:MM[:SS]")->capture_default_str();
    app->add_option("--close", close, "Session close HH:MM[:SS]")->capture_default_str();
    app->add_flag("--relative", relative, "Timestamps are seconds since the open of one session");
  }
};

std::vector<DaySample> load_sessions(const std::string& path, const SessionSpec& session) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const auto records = clean_ticks(parse_tick_csv(in));
  auto days = sample_sessions(records, session);
  if (days.empty()) throw std::runtime_error("no trades inside the session in '" + path + "'");
  return days;
}

json settings_json(const CLI::App& app) {
  json j = json::object();
  for (const auto* opt : app.get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    const auto res = opt->results();
    j[opt->get_name()] = res.size() == 1 ? json(res.front()) : json(res);
  }
  return j;
}

//---------------------------------------------------------------------------//
// estimate                                                                  //
//---------------------------------------------------------------------------//
struct EstimateFlags {
  std::string input;
  std::string format = "auto";
  double delta_seconds = 1.0;
  double varpi = 0.2;
  std::vector<double> alphas;
  std::vector<double> ratios;
  std::vector<double> sd_multiples;
  bool avg = false;
  bool bias_correct = false;
  bool two_scale = false;
  SessionFlags session;
};

EstimateResult zero_count_row(double varpi, double delta) {
  EstimateResult r;
  r.config = {varpi, 0.0, 0.0, delta};
  r.flag_zero_count = true;
  return r;
}

void cmd_estimate(const EstimateFlags& f, const CLI::App& app, RunManifest& m, const Output& out) {
  check_varpi(f.varpi);
  m.config = settings_json(app);
  const auto lines = read_lines(f.input);
  const std::string format = f.format == "auto" ? detect_format(lines) : f.format;
  ReturnSeries s;
  if (format == "returns") {
    if (!(f.delta_seconds > 0.0)) throw std::invalid_argument("--delta-seconds must be positive");
    s = read_returns(lines, seconds(f.delta_seconds));
  } else if (format == "path") {
    s = read_path(lines);
  } else if (format == "ticks") {
    const auto days = load_sessions(f.input, f.session.spec());
    s.returns = intraday_returns(days);
    s.delta = days.front().grid.delta;
  } else {
    throw std::invalid_argument("--format must be auto, returns, path or ticks");
  }
  m.config["detected_format"] = format;
  m.config["delta"] = s.delta;
  if (s.returns.empty()) throw std::runtime_error("no returns in '" + f.input + "'");
  const auto& r = s.returns;

  std::vector<double> ratios = f.ratios;
  if (ratios.empty()) ratios = f.avg ? default_avg_ratios() : std::vector<double>{2.0};
  for (double q : ratios)
    if (!(q > 1.0)) throw std::invalid_argument("--alpha-ratio values must be > 1");

  const double sigma_hat = estimate_continuous_vol(r, s.delta, f.varpi);
  m.config["sigma_hat"] = sigma_hat;
  std::vector<EstimatorConfig> configs;
  std::size_t expected = 0;
  if (!f.alphas.empty()) {
    for (double a : f.alphas) {
      if (!(a > 0.0)) throw std::invalid_argument("--alpha values must be positive");
      for (double q : ratios) configs.push_back({f.varpi, a, q * a, s.delta});
    }
    expected = configs.size();
  } else {
    std::vector<double> mult = f.sd_multiples;
    if (mult.empty()) mult = f.avg ? default_avg_multiples() : std::vector<double>{7.0};
    const auto sel = select_cutoffs(r, s.delta, f.varpi, mult, ratios);
    configs = sel.configs;
    expected = mult.size() * ratios.size();
    if (sel.diagnostic) {
      std::cerr << "jumpact estimate: " << *sel.diagnostic << '\n';
      m.config["diagnostic"] = *sel.diagnostic;
    }
  }

  std::vector<EstimateResult> rows;
  for (const auto& c : configs) rows.push_back(beta_hat_two_cutoffs(r, c));
  if (configs.empty())
    for (std::size_t i = 0; i < expected; ++i) rows.push_back(zero_count_row(f.varpi, s.delta));

  auto out_csv = out.open("estimates.csv");
  write_csv_header(out_csv);
  for (const auto& e : rows) write_csv_row(out_csv, e);

  if (f.two_scale) {
    std::vector<double> seen;
    for (const auto& c : configs) {
      if (std::find(seen.begin(), seen.end(), c.alpha) != seen.end()) continue;
      seen.push_back(c.alpha);
      write_csv_row(out_csv, beta_hat_two_scales(r, c));
    }
  }

  std::optional<EstimateResult> average;
  if (f.avg) {
    average = avg_estimator(rows);
    write_csv_row(out_csv, *average);
  }

  if (f.bias_correct) {
    std::vector<double> grid;
    for (double mlt : default_regression_multiples())
      grid.push_back(alpha_for_sd_multiple(mlt, sigma_hat, s.delta, f.varpi));
    auto corrected = [&](const EstimateResult& raw, double b0) {
      EstimateResult flagged = raw;
      flagged.method = Method::regression_corrected;
      flagged.flag_correction_unavailable = true;
      if (raw.flag_zero_count || !(b0 > 0.0 && b0 < 2.0) || !(sigma_hat > 0.0)) return flagged;
      try {
        return regression_correction(raw, fit_bias_regression(r, s.delta, f.varpi, grid, b0));
      } catch (const DegenerateDesign&) {
        return flagged;
      }
    };
    std::vector<EstimateResult> fixed;
    for (const auto& e : rows) {
      const double b0 = average ? average->beta_hat : e.beta_hat;
      fixed.push_back(corrected(e, b0));
      if (!average) write_csv_row(out_csv, fixed.back());
    }
    if (average) {
      EstimateResult a = avg_estimator(fixed);
      a.method = Method::regression_corrected;
      for (const auto& e : fixed) a.flag_correction_unavailable |= e.flag_correction_unavailable;
      write_csv_row(out_csv, a);
    }
  }
}

//---------------------------------------------------------------------------//
// montecarlo                                                                //
//---------------------------------------------------------------------------//
struct MonteCarloFlags {
  std::string cell;
  std::size_t reps = 0;
  std::size_t threads = 0;
  bool full = false;
};

void cmd_montecarlo(const MonteCarloFlags& f, const Globals& g, RunManifest& m,
                    const Output& out) {
  MCDocument doc = g.config.empty() ? MCDocument{} : mc_document_from_json(read_json_file(g.config));
  auto& cfg = doc.config;
  if (g.seed_opt->count() > 0) cfg.master_seed = g.seed;
  if (f.full) cfg.n_reps = 5000;
  if (f.reps > 0) cfg.n_reps = f.reps;
  if (f.threads > 0) cfg.threads = f.threads;
  std::vector<MCCell> cells;
  bool single = false;
  if (!f.cell.empty()) {
    const MCCell c = parse_cell(f.cell);
    cfg.beta_values = {c.beta};
    cfg.tail_probs = {c.tail_prob};
    cfg.deltas = {c.delta};
    single = true;
  }
  cfg.validate();  // before any simulation
  cells = cfg.cells();
  m.master_seed = cfg.master_seed;
  m.config = to_json(cfg);
  m.config["histogram_bins"] = doc.histogram_bins;
  m.config["table2"] = doc.table2;
  m.config["table2_tail_prob"] = doc.table2_tail_prob;

  auto t1 = out.open("table1.csv");
  write_table1_header(t1);
  std::ofstream t2;
  if (doc.table2) {
    t2 = out.open("table2.csv");
    write_table2_header(t2);
  }
  for (const auto& cell : cells) {
    const bool compare = doc.table2 && (single || (cell.tail_prob == doc.table2_tail_prob &&
                                                   cell.delta == cfg.deltas.front()));
    std::cerr << "cell " << cell.label() << " (" << cfg.n_reps << " reps)\n";
    const auto res = run_cell(cfg, cell, {.two_scales = compare});
    write_table1_row(t1, res);
    t1.flush();
    if (compare) write_table2_rows(t2, res);
    auto h = out.open("hist_" + cell.label() + ".csv");
    write_csv(h, histogram_data(res.corrected.estimates, doc.histogram_bins));
  }
}

//---------------------------------------------------------------------------//
// ticks                                                                     //
//---------------------------------------------------------------------------//
struct TicksFlags {
  std::string input;
  std::string symbol;
  bool stats = false;
  bool estimate = false;
  std::string rolling;
  double varpi = 0.2;
  std::vector<double> sd_multiples;
  std::vector<double> ratios;
  bool no_bias_correct = false;
  SessionFlags session;
};

void cmd_ticks(const TicksFlags& f, const CLI::App& app, RunManifest& m, const Output& out) {
  check_varpi(f.varpi);
  m.config = settings_json(app);
  const SessionSpec session = f.session.spec();
  const std::size_t window = f.rolling.empty() ? 0 : parse_window_days(f.rolling);
  const std::string symbol = f.symbol.empty() ? fs::path(f.input).stem().string() : f.symbol;
  const auto days = load_sessions(f.input, session);
  const bool any = f.stats || f.estimate || window > 0;
  m.config["n_days"] = days.size();

  GridOptions opt;
  opt.varpi = f.varpi;
  if (!f.sd_multiples.empty()) opt.sd_multiples = f.sd_multiples;
  if (!f.ratios.empty()) opt.ratios = f.ratios;
  opt.bias_correct = !f.no_bias_correct;

  if (f.stats || !any) {
    auto os = out.open("stats_" + symbol + ".csv");
    write_stats_header(os);
    const auto all = intraday_returns(days);
    if (!all.empty()) write_stats_row(os, "all", descriptive_stats(all));
    if (!session.relative_timestamps) {
      std::map<std::string, std::vector<DaySample>> quarters;
      for (const auto& d : days)
        quarters[format_day(d.day).substr(0, 4) + "-Q" + std::to_string(quarter_of(d.day))]
            .push_back(d);
      for (const auto& [name, q] : quarters) {
        const auto r = intraday_returns(q);
        if (!r.empty()) write_stats_row(os, name, descriptive_stats(r));
      }
    }
  }
  if (f.estimate || !any) {
    const auto r = intraday_returns(days);
    const auto g = estimate_grid(r, session.delta(), opt);
    auto os = out.open("estimates_" + symbol + ".csv");
    write_csv_header(os);
    for (const auto& e : g.per_config) write_csv_row(os, e);
    if (g.average) write_csv_row(os, *g.average);
    if (g.corrected_average) write_csv_row(os, *g.corrected_average);
    m.config["sigma_hat"] = g.sigma_hat;
    if (g.diagnostic) {
      std::cerr << "jumpact ticks: " << *g.diagnostic << '\n';
      m.config["diagnostic"] = *g.diagnostic;
    }
  }
  if (window > 0) {
    const auto w = rolling_estimates(days, window, opt);
    auto os = out.open("rolling_" + symbol + ".csv");
    write_rolling_header(os);
    for (const auto& e : w) write_rolling_row(os, e, session.relative_timestamps);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jump activity index estimation from counts of large increments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);
  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate one stochastic-volatility path");
  std::string preset_name, path_name = "path.csv";
  sim->add_option("--preset", preset_name, "Preset such as table1-beta1.0-p1pct");
  sim->add_option("--output", path_name, "Path CSV file name")->capture_default_str();

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the jump activity index");
  EstimateFlags ef;
  est->add_option("input", ef.input, "Returns, path or tick CSV")->required()->check(CLI::ExistingFile);
  est->add_option("--format", ef.format, "auto, returns, path or ticks")->capture_default_str();
  est->add_option("--delta-seconds", ef.delta_seconds, "Sampling interval of a returns file")
      ->capture_default_str();
  est->add_option("--varpi", ef.varpi, "Truncation rate in (0, 1/2)")->capture_default_str();
  est->add_option("--alpha", ef.alphas, "Fixed cutoff coefficients alpha");
  est->add_option("--alpha-ratio", ef.ratios, "alpha'/alpha values");
  est->add_option("--sd-multiples", ef.sd_multiples, "Cutoffs in continuous sd units");
  est->add_flag("--avg", ef.avg, "Average over the cutoff grid");
  est->add_flag("--bias-correct", ef.bias_correct, "Regression bias correction");
  est->add_flag("--two-scale", ef.two_scale, "Also report the two-scale estimator");
  ef.session.add_to(est);

  // montecarlo
  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo tables and histograms");
  MonteCarloFlags mf;
  mc->add_option("--cell", mf.cell, "Single cell, e.g. beta=1.0,p=0.01,delta=1s");
  mc->add_option("--reps", mf.reps, "Replications per cell");
  mc->add_option("--threads", mf.threads, "Worker threads (0: all cores)");
  mc->add_flag("--full", mf.full, "5000 replications per cell");

  // ticks
  auto* tk = app.add_subcommand("ticks", "Tick data statistics and estimates");
  TicksFlags tf;
  tk->add_option("input", tf.input, "Tick CSV timestamp,price[,status]")->required()->check(CLI::ExistingFile);
  tk->add_option("--symbol", tf.symbol, "Symbol used in output names (default: file stem)");
  tk->add_flag("--stats", tf.stats, "Descriptive statistics");
  tk->add_flag("--estimate", tf.estimate, "Full-sample estimates");
  tk->add_option("--rolling", tf.rolling, "Non-overlapping windows, e.g. 10d");
  tk->add_option("--varpi", tf.varpi, "Truncation rate in (0, 1/2)")->capture_default_str();
  tk->add_option("--sd-multiples", tf.sd_multiples, "Cutoffs in continuous sd units");
  tk->add_option("--alpha-ratio", tf.ratios, "alpha'/alpha values");
  tk->add_flag("--no-bias-correct", tf.no_bias_correct, "Skip the regression correction");
  tf.session.add_to(tk);

  CLI11_PARSE(app, argc, argv);

  if (*sim) {
    return run_command("simulate", g, [&](RunManifest& m, const Output& out) {
      SimulationConfig cfg;
      if (!g.config.empty())
        cfg = simulation_config_from_json(read_json_file(g.config));
      else if (!preset_name.empty())
        cfg = preset(preset_name);
      m.config = to_json(cfg);
      if (!preset_name.empty()) m.config["preset"] = preset_name;
      SimOptions so;
      so.exact_jumps = cfg.exact_jumps;
      so.jump_floor = cfg.jump_floor;
      const auto path = simulate_sv_path(cfg.model, cfg.horizon, cfg.delta, g.seed, so);
      auto os = out.open(path_name);
      write_csv(os, path);
      if (path.jumps) {
        auto js = out.open("jumps.csv");
        write_csv(js, *path.jumps);
      }
    });
  }
  if (*est)
    return run_command("estimate", g, [&](RunManifest& m, const Output& out) {
      cmd_estimate(ef, *est, m, out);
    });
  if (*mc)
    return run_command("montecarlo", g, [&](RunManifest& m, const Output& out) {
      cmd_montecarlo(mf, g, m, out);
    });
  return run_command("ticks", g, [&](RunManifest& m, const Output& out) {
    cmd_ticks(tf, *tk, m, out);
  });
}
