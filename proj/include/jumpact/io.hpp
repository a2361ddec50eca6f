#pragma once
//===========================================================================//
// JSON configuration documents, named presets and run manifests.          //
//===========================================================================//

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "jumpact/mc_harness.hpp"
#include "jumpact/sim_engine.hpp"

namespace jumpact {

inline constexpr const char* kVersion = "0.3.0";

using json = nlohmann::json;

//---------------------------------------------------------------------------//
// SVModelSpec                                                               //
//---------------------------------------------------------------------------//
inline json size_law_to_json(const SizeLaw& law) {
  if (const auto* f = std::get_if<FixedSize>(&law)) return {{"fixed", f->size}};
  const auto& u = std::get<UniformSize>(law);
  return {{"uniform", {u.lo, u.hi}}};
}

inline SizeLaw size_law_from_json(const json& j) {
  if (j.contains("fixed")) return FixedSize{j.at("fixed").get<double>()};
  if (j.contains("uniform")) {
    const auto& u = j.at("uniform");
    if (!u.is_array() || u.size() != 2)
      throw std::invalid_argument("size_law.uniform must be [lo, hi]");
    return UniformSize{u[0].get<double>(), u[1].get<double>()};
  }
  throw std::invalid_argument("size_law must have 'fixed' or 'uniform'");
}

inline json to_json(const CompoundPoissonSpec& cp) {
  return {{"lambda", cp.lambda}, {"size_law", size_law_to_json(cp.size_law)}};
}

inline CompoundPoissonSpec compound_poisson_from_json(const json& j) {
  CompoundPoissonSpec cp;
  cp.lambda = j.value("lambda", 0.0);
  if (j.contains("size_law")) cp.size_law = size_law_from_json(j.at("size_law"));
  cp.validate();
  return cp;
}

inline json to_json(const SVModelSpec& s) {
  json pj;
  if (const auto* st = std::get_if<StableJumps>(&s.price_jumps)) {
    pj = {{"type", "stable"}, {"beta", st->beta}, {"theta", st->theta}};
  } else if (const auto* cp = std::get_if<CompoundPoissonSpec>(&s.price_jumps)) {
    pj = to_json(*cp);
    pj["type"] = "compound_poisson";
  } else {
    pj = {{"type", "none"}};
  }
  return {{"kappa", s.kappa}, {"eta", s.eta},     {"gamma_v", s.gamma_v},
          {"rho", s.rho},     {"v0", s.v0},       {"x0", s.x0},
          {"var_jumps", to_json(s.var_jumps)},     {"price_jumps", pj}};
}

/// Reads a model. Stable price jumps may give `theta` directly or ask for
/// calibration with {"tail_prob", "alpha", "varpi", "delta_seconds"}.
inline SVModelSpec sv_model_from_json(const json& j) {
  SVModelSpec s = reference_sv_model();
  s.kappa = j.value("kappa", s.kappa);
  s.eta = j.value("eta", s.eta);
  s.gamma_v = j.value("gamma_v", s.gamma_v);
  s.rho = j.value("rho", s.rho);
  s.v0 = j.value("v0", s.v0);
  s.x0 = j.value("x0", s.x0);
  if (j.contains("var_jumps")) s.var_jumps = compound_poisson_from_json(j.at("var_jumps"));
  if (j.contains("price_jumps")) {
    const auto& pj = j.at("price_jumps");
    const std::string type = pj.value("type", "none");
    if (type == "none") {
      s.price_jumps = std::monostate{};
    } else if (type == "stable") {
      StableJumps st;
      st.beta = pj.at("beta").get<double>();
      StableLaw law(st.beta);
      if (pj.contains("theta")) {
        st.theta = pj.at("theta").get<double>();
      } else {
        st.theta = calibrate_theta(st.beta, pj.value("alpha", 5.0 * s.eta), pj.value("varpi", 0.2),
                                   seconds(pj.value("delta_seconds", 1.0)),
                                   pj.at("tail_prob").get<double>());
      }
      s.price_jumps = st;
    } else if (type == "compound_poisson") {
      auto cp = compound_poisson_from_json(pj);
      if (!pj.contains("lambda") && pj.contains("tail_prob"))
        cp.lambda = calibrate_lambda(pj.at("tail_prob").get<double>(),
                                     seconds(pj.value("delta_seconds", 1.0)));
      s.price_jumps = cp;
    } else {
      throw std::invalid_argument("price_jumps.type must be none, stable or compound_poisson");
    }
  }
  s.validate();
  return s;
}

//---------------------------------------------------------------------------//
// Simulation documents                                                      //
//---------------------------------------------------------------------------//
struct SimulationConfig {
  SVModelSpec model = reference_sv_model();
  double horizon = 1.0;
  double delta = seconds(1.0);
  bool exact_jumps = false;
  double jump_floor = 0.0;  // 0: one tenth of the 5-eta cutoff
};

inline json to_json(const SimulationConfig& c) {
  return {{"model", to_json(c.model)},      {"horizon", c.horizon},
          {"delta", c.delta},               {"delta_seconds", c.delta * kSecondsPerDay},
          {"exact_jumps", c.exact_jumps},   {"jump_floor", c.jump_floor}};
}

inline SimulationConfig simulation_config_from_json(const json& j) {
  SimulationConfig c;
  c.model = sv_model_from_json(j.contains("model") ? j.at("model") : j);
  c.horizon = j.value("horizon", c.horizon);
  if (j.contains("delta")) c.delta = j.at("delta").get<double>();
  if (j.contains("delta_seconds")) c.delta = seconds(j.at("delta_seconds").get<double>());
  c.exact_jumps = j.value("exact_jumps", false);
  c.jump_floor = j.value("jump_floor", 0.0);
  if (c.exact_jumps && c.jump_floor <= 0.0)
    c.jump_floor = 0.1 * 5.0 * c.model.eta * std::pow(c.delta, 0.2);
  return c;
}

/// Names of the form `table1-beta<b>-p<pct>pct[-<s>s]`, e.g.
/// `table1-beta1.0-p1pct` or `table1-beta0-p2.5pct-5s` (beta 0 is the
/// compound-Poisson model). Cutoffs alpha = 5 eta, varpi = 0.2.
inline SimulationConfig preset(const std::string& name) {
  static const std::regex re(R"(table1-beta([0-9.]+)-p([0-9.]+)pct(?:-([0-9.]+)s)?)");
  std::smatch m;
  if (!std::regex_match(name, m, re)) throw std::invalid_argument("unknown preset '" + name + "'");
  const double beta = std::stod(m[1]);
  const double p = std::stod(m[2]) / 100.0;
  const double secs = m[3].matched ? std::stod(m[3]) : 1.0;
  static const MCConfig mc;
  SimulationConfig c;
  c.delta = seconds(secs);
  c.model = cell_model(mc, {beta, p, c.delta});
  return c;
}

//---------------------------------------------------------------------------//
// Monte Carlo documents                                                     //
//---------------------------------------------------------------------------//
struct MCDocument {
  MCConfig config;
  std::size_t histogram_bins = 40;
  bool table2 = true;
  double table2_tail_prob = 0.01;
};

inline json to_json(const MCConfig& c) {
  std::vector<double> secs;
  for (double d : c.deltas) secs.push_back(d * kSecondsPerDay);
  json cut;
  if (const auto* f = std::get_if<FixedCutoffs>(&c.cutoffs))
    cut = {{"alpha", f->alpha}, {"alpha_prime", f->alpha_prime}};
  else {
    const auto& s = std::get<SdMultipleCutoffs>(c.cutoffs);
    cut = {{"sd_multiple", s.sd_multiple}, {"ratio", s.ratio}};
  }
  return {{"model", to_json(c.model)}, {"beta_values", c.beta_values},
          {"tail_probs", c.tail_probs}, {"delta_seconds", secs},
          {"varpi", c.varpi},           {"cutoffs", cut},
          {"horizon", c.horizon},       {"poisson_jump_size", c.poisson_jump_size},
          {"n_reps", c.n_reps},         {"master_seed", c.master_seed},
          {"threads", c.threads}};
}

inline MCDocument mc_document_from_json(const json& j) {
  MCDocument d;
  auto& c = d.config;
  if (j.contains("model")) c.model = sv_model_from_json(j.at("model"));
  if (j.contains("beta_values")) c.beta_values = j.at("beta_values").get<std::vector<double>>();
  if (j.contains("tail_probs")) c.tail_probs = j.at("tail_probs").get<std::vector<double>>();
  if (j.contains("delta_seconds")) {
    c.deltas.clear();
    for (double s : j.at("delta_seconds").get<std::vector<double>>()) c.deltas.push_back(seconds(s));
  }
  c.varpi = j.value("varpi", c.varpi);
  if (j.contains("cutoffs")) {
    const auto& cut = j.at("cutoffs");
    if (cut.contains("sd_multiple"))
      c.cutoffs = SdMultipleCutoffs{cut.at("sd_multiple").get<double>(), cut.value("ratio", 2.0)};
    else
      c.cutoffs = FixedCutoffs{cut.at("alpha").get<double>(), cut.at("alpha_prime").get<double>()};
  }
  c.horizon = j.value("horizon", c.horizon);
  c.poisson_jump_size = j.value("poisson_jump_size", c.poisson_jump_size);
  c.n_reps = j.value("n_reps", c.n_reps);
  c.master_seed = j.value("master_seed", c.master_seed);
  c.threads = j.value("threads", c.threads);
  d.histogram_bins = j.value("histogram_bins", d.histogram_bins);
  d.table2 = j.value("table2", d.table2);
  d.table2_tail_prob = j.value("table2_tail_prob", d.table2_tail_prob);
  c.validate();
  return d;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("invalid JSON in '" + path + "': " + e.what());
  }
}

//---------------------------------------------------------------------------//
// Run manifest                                                              //
//---------------------------------------------------------------------------//
struct RunManifest {
  std::string command;
  json config = json::object();
  std::uint64_t master_seed = 0;
  std::vector<std::string> outputs;
  std::string status = "ok";
  std::string error;

  json to_json() const {
    json j = {{"command", command},  {"config", config},   {"master_seed", master_seed},
              {"version", kVersion}, {"outputs", outputs}, {"status", status}};
    if (!error.empty()) j["error"] = error;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
    out << to_json().dump(2) << '\n';
  }
};

}  // namespace jumpact
