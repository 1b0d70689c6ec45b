#ifndef BAYES_INVERT_REPORT_HPP
#define BAYES_INVERT_REPORT_HPP

// JSON configuration I/O and the CSV/JSON result writers used by the CLI.

#include "experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <string>

namespace binv {

using Json = nlohmann::ordered_json;

namespace detail {

inline void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw InvalidConfig(where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw InvalidConfig("unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const Json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidConfig("bad type for '" + std::string(key) + "' in " + where);
  }
}

}  // namespace detail

inline Json to_json(const RunConfig& c) {
  Json j;
  j["name"] = c.name;
  j["experiment"] = to_string(c.experiment);
  j["noise"] = {{"family", c.noise.family}, {"dof", c.noise.dof}};
  j["R"] = c.R;
  j["algorithm"] = to_string(c.algorithm);
  j["seed"] = c.seed;
  j["runs"] = c.runs;
  j["adjacency_threshold"] = c.adjacency_threshold;
  j["init"] = {{"mode", c.init.mode}, {"sd", c.init.sd}};
  const auto& a = c.atais;
  j["atais"] = {{"N", a.N},
                {"T", a.T},
                {"T0", a.T0},
                {"H", a.H},
                {"initial_cov", a.initial_cov},
                {"delta0", a.delta0},
                {"decay", a.decay},
                {"delta_min", a.delta_min},
                {"proposal", a.proposal},
                {"proposal_dof", a.proposal_dof},
                {"denominator", a.denominator},
                {"epsilon", a.epsilon},
                {"retention", a.retention},
                {"store_residuals", a.store_residuals}};
  j["minibatch"] = {{"L", c.minibatch.L}, {"strategy", c.minibatch.strategy}, {"fusion_delta", c.minibatch.fusion_delta}};
  const auto& p = c.posterior;
  j["posterior"] = {{"enabled", p.enabled}, {"nu", p.nu}, {"J", p.J}, {"level", p.level}, {"n_resample", p.n_resample}};
  const auto& i = c.ilis;
  j["ilis"] = {{"J", i.J}, {"T", i.T}, {"burn_in_fraction", i.burn_in_fraction},
               {"nu", i.nu}, {"phi_scale", i.phi_scale}, {"mh_cov", i.mh_cov}};
  const auto& m = c.mcmc;
  j["mcmc"] = {{"T", m.T},
               {"a", m.a},
               {"nu", m.nu},
               {"wishart_correction", m.wishart_correction},
               {"inner_steps", m.inner_steps},
               {"sigma_sd", m.sigma_sd},
               {"update_every", m.update_every},
               {"mh_cov", m.mh_cov}};
  return j;
}

// Missing keys keep their defaults; unknown keys and bad types are errors.
inline RunConfig config_from_json(const Json& j) {
  using detail::read;
  detail::reject_unknown(j,
                         {"name", "experiment", "noise", "R", "algorithm", "seed", "runs", "adjacency_threshold", "init",
                          "atais", "minibatch", "posterior", "ilis", "mcmc"},
                         "config");
  RunConfig c;
  read(j, "name", c.name, "config");
  if (!j.contains("experiment")) throw InvalidConfig("config needs an 'experiment'");
  if (!j.contains("algorithm")) throw InvalidConfig("config needs an 'algorithm'");
  std::string s;
  read(j, "experiment", s, "config");
  c.experiment = model_id_from_string(s);
  read(j, "algorithm", s, "config");
  c.algorithm = algorithm_from_string(s);
  read(j, "R", c.R, "config");
  read(j, "seed", c.seed, "config");
  read(j, "runs", c.runs, "config");
  read(j, "adjacency_threshold", c.adjacency_threshold, "config");
  if (j.contains("noise")) {
    const Json& n = j["noise"];
    detail::reject_unknown(n, {"family", "dof"}, "noise");
    read(n, "family", c.noise.family, "noise");
    read(n, "dof", c.noise.dof, "noise");
  }
  if (j.contains("init")) {
    const Json& n = j["init"];
    detail::reject_unknown(n, {"mode", "sd"}, "init");
    read(n, "mode", c.init.mode, "init");
    read(n, "sd", c.init.sd, "init");
  }
  if (j.contains("atais")) {
    const Json& n = j["atais"];
    auto& a = c.atais;
    detail::reject_unknown(n,
                           {"N", "T", "T0", "H", "initial_cov", "delta0", "decay", "delta_min", "proposal",
                            "proposal_dof", "denominator", "epsilon", "retention", "store_residuals"},
                           "atais");
    read(n, "N", a.N, "atais");
    read(n, "T", a.T, "atais");
    read(n, "T0", a.T0, "atais");
    read(n, "H", a.H, "atais");
    read(n, "initial_cov", a.initial_cov, "atais");
    read(n, "delta0", a.delta0, "atais");
    read(n, "decay", a.decay, "atais");
    read(n, "delta_min", a.delta_min, "atais");
    read(n, "proposal", a.proposal, "atais");
    read(n, "proposal_dof", a.proposal_dof, "atais");
    read(n, "denominator", a.denominator, "atais");
    read(n, "epsilon", a.epsilon, "atais");
    read(n, "retention", a.retention, "atais");
    read(n, "store_residuals", a.store_residuals, "atais");
  }
  if (j.contains("minibatch")) {
    const Json& n = j["minibatch"];
    detail::reject_unknown(n, {"L", "strategy", "fusion_delta"}, "minibatch");
    read(n, "L", c.minibatch.L, "minibatch");
    read(n, "strategy", c.minibatch.strategy, "minibatch");
    read(n, "fusion_delta", c.minibatch.fusion_delta, "minibatch");
  }
  if (j.contains("posterior")) {
    const Json& n = j["posterior"];
    auto& p = c.posterior;
    detail::reject_unknown(n, {"enabled", "nu", "J", "level", "n_resample"}, "posterior");
    read(n, "enabled", p.enabled, "posterior");
    read(n, "nu", p.nu, "posterior");
    read(n, "J", p.J, "posterior");
    read(n, "level", p.level, "posterior");
    read(n, "n_resample", p.n_resample, "posterior");
  }
  if (j.contains("ilis")) {
    const Json& n = j["ilis"];
    auto& i = c.ilis;
    detail::reject_unknown(n, {"J", "T", "burn_in_fraction", "nu", "phi_scale", "mh_cov"}, "ilis");
    read(n, "J", i.J, "ilis");
    read(n, "T", i.T, "ilis");
    read(n, "burn_in_fraction", i.burn_in_fraction, "ilis");
    read(n, "nu", i.nu, "ilis");
    read(n, "phi_scale", i.phi_scale, "ilis");
    read(n, "mh_cov", i.mh_cov, "ilis");
  }
  if (j.contains("mcmc")) {
    const Json& n = j["mcmc"];
    auto& m = c.mcmc;
    detail::reject_unknown(n, {"T", "a", "nu", "wishart_correction", "inner_steps", "sigma_sd", "update_every", "mh_cov"},
                           "mcmc");
    read(n, "T", m.T, "mcmc");
    read(n, "a", m.a, "mcmc");
    read(n, "nu", m.nu, "mcmc");
    read(n, "wishart_correction", m.wishart_correction, "mcmc");
    read(n, "inner_steps", m.inner_steps, "mcmc");
    read(n, "sigma_sd", m.sigma_sd, "mcmc");
    read(n, "update_every", m.update_every, "mcmc");
    read(n, "mh_cov", m.mh_cov, "mcmc");
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// writers

// Locale-independent, round-trippable number formatting.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json run_json(const RunResult& r) {
  Json j;
  j["run"] = r.run;
  j["mae_theta"] = r.mae_theta;
  j["mae_sigma"] = r.mae_sigma;
  j["mae_complete"] = r.mae_complete;
  j["model_evaluations"] = r.model_evaluations;
  j["theta_hat"] = vector_json(r.theta_hat);
  j["sigma_hat"] = matrix_json(r.sigma_hat);
  j["sigma_groundtruth"] = matrix_json(r.sigma_groundtruth);
  if (r.log_evidence) j["log_evidence"] = *r.log_evidence;
  if (r.interval) j["interval"] = {{"lower", matrix_json(r.interval->lower)}, {"upper", matrix_json(r.interval->upper)}};
  if (r.interval_coverage) j["interval_coverage"] = *r.interval_coverage;
  if (r.adjacency_recovered) j["exact_adjacency_recovered"] = *r.adjacency_recovered;
  return j;
}

inline Json summary_json(const RunConfig& cfg, const std::vector<RunResult>& results) {
  const ExperimentSummary s = summarize(results);
  Json j;
  j["config"] = to_json(cfg);
  j["runs"] = s.runs;
  j["mae_theta"] = s.mae_theta;
  j["mae_sigma"] = s.mae_sigma;
  j["mae_complete"] = s.mae_complete;
  j["mean_model_evaluations"] = s.mean_evaluations;
  if (s.mean_log_evidence) j["mean_log_evidence"] = *s.mean_log_evidence;
  if (s.mean_interval)
    j["interval"] = {{"lower", matrix_json(s.mean_interval->lower)}, {"upper", matrix_json(s.mean_interval->upper)}};
  if (s.interval_coverage) j["interval_coverage"] = *s.interval_coverage;
  if (s.adjacency_rate) j["exact_adjacency_recovery_rate"] = *s.adjacency_rate;
  Json per = Json::array();
  for (const auto& r : results) per.push_back(run_json(r));
  j["per_run"] = per;
  return j;
}

inline Table summary_table(const std::vector<RunResult>& results) {
  Table t;
  t.header = {"run", "mae_theta", "mae_sigma", "mae_complete", "model_evaluations"};
  for (const auto& r : results)
    t.rows.push_back({static_cast<double>(r.run), r.mae_theta, r.mae_sigma, r.mae_complete,
                      static_cast<double>(r.model_evaluations)});
  return t;
}

// <out>/trajectory_<run>.csv, <out>/summary.csv, <out>/summary.json
inline void write_results(const std::filesystem::path& dir, const RunConfig& cfg, const std::vector<RunResult>& results) {
  std::filesystem::create_directories(dir);
  for (const auto& r : results) {
    std::ofstream os(dir / ("trajectory_" + std::to_string(r.run) + ".csv"));
    if (!os) throw Error("cannot write trajectory file in " + dir.string());
    write_csv(os, r.trajectory);
  }
  std::ofstream cs(dir / "summary.csv");
  if (!cs) throw Error("cannot write summary.csv in " + dir.string());
  write_csv(cs, summary_table(results));
  std::ofstream js(dir / "summary.json");
  if (!js) throw Error("cannot write summary.json in " + dir.string());
  js << summary_json(cfg, results).dump(2) << '\n';
}

}  // namespace binv

#endif  // BAYES_INVERT_REPORT_HPP
