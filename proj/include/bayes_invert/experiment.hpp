#ifndef BAYES_INVERT_EXPERIMENT_HPP
#define BAYES_INVERT_EXPERIMENT_HPP

// Experiment runner: configuration, seeded independent runs, MAE metrics.

#include "atais.hpp"
#include "ilis.hpp"
#include "mcmc.hpp"
#include "minibatch.hpp"
#include "models.hpp"
#include "posterior.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace binv {

enum class Algorithm { atais, atais_minibatch, ilis, mh_conditional, mh_joint, adaptive_mh, mh_within_gibbs };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::atais: return "atais";
    case Algorithm::atais_minibatch: return "atais_minibatch";
    case Algorithm::ilis: return "ilis";
    case Algorithm::mh_conditional: return "mh_conditional";
    case Algorithm::mh_joint: return "mh_joint";
    case Algorithm::adaptive_mh: return "adaptive_mh";
    case Algorithm::mh_within_gibbs: return "mh_within_gibbs";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  for (auto a : {Algorithm::atais, Algorithm::atais_minibatch, Algorithm::ilis, Algorithm::mh_conditional,
                 Algorithm::mh_joint, Algorithm::adaptive_mh, Algorithm::mh_within_gibbs})
    if (to_string(a) == s) return a;
  throw InvalidConfig("unknown algorithm: " + s);
}

// ---------------------------------------------------------------------------
// metrics

enum class MaeKind { theta, sigma, complete };

inline double mae(const Vector& est, const Vector& truth) {
  detail::require_dims(est.size() == truth.size(), "mae: theta dimension mismatch");
  return (est - truth).cwiseAbs().mean();
}

inline double mae(const Matrix& est, const Matrix& truth) {
  detail::require_dims(est.rows() == truth.rows() && est.cols() == truth.cols(), "mae: Sigma dimension mismatch");
  return (est - truth).cwiseAbs().mean();
}

// Mean over the pooled M + K^2 absolute errors.
inline double complete_mae(double theta_mae, Index m, double sigma_mae, Index k) {
  const double mm = static_cast<double>(m);
  const double kk = static_cast<double>(k * k);
  return (mm * theta_mae + kk * sigma_mae) / (mm + kk);
}

inline double mae(MaeKind kind, const Vector& theta, const Vector& theta_true, const Matrix& sigma,
                  const Matrix& sigma_truth) {
  switch (kind) {
    case MaeKind::theta: return mae(theta, theta_true);
    case MaeKind::sigma: return mae(sigma, sigma_truth);
    case MaeKind::complete:
      return complete_mae(mae(theta, theta_true), theta.size(), mae(sigma, sigma_truth), sigma.rows());
  }
  return 0.0;
}

// Dataset-conditional reference: ML covariance of the residuals at theta_true.
inline Matrix sigma_groundtruth(const ExperimentSpec& spec, const ForwardModel& model, const Dataset& data) {
  return ml_covariance(data.y() - model.evaluate_all(spec.theta_true, data));
}

// ---------------------------------------------------------------------------
// configuration

struct NoiseParams {
  std::string family = "gaussian";  // gaussian | student_t
  double dof = 10.0;
  bool operator==(const NoiseParams&) const = default;
  NoiseFamily to_family() const {
    if (family == "student_t") return StudentT{dof};
    return Gaussian{};
  }
};

struct InitParams {
  std::string mode = "fixed";  // fixed: theta 0, Sigma I; random: theta ~ N(0, sd^2 I), Sigma |1 + sd z| I
  double sd = 4.0;
  bool operator==(const InitParams&) const = default;
};

struct AtaisParams {
  Index N = 50;
  Index T = 50;
  Index T0 = 0;
  Index H = 1;
  double initial_cov = 6.0;  // Lambda_1 = initial_cov I
  double delta0 = 1.0;
  double decay = 0.1;
  double delta_min = 1e-4;
  std::string proposal = "gaussian";  // gaussian | student_t
  double proposal_dof = 5.0;
  std::string denominator = "standard";  // standard | mixture
  double epsilon = 0.3;
  std::string retention = "relevant";  // relevant | all
  bool store_residuals = false;
  bool operator==(const AtaisParams&) const = default;
};

struct MinibatchParams {
  Index L = 10;
  std::string strategy = "fusion";    // rescore | fusion
  std::string fusion_delta = "minimum";  // minimum | schedule
  bool operator==(const MinibatchParams&) const = default;
};

struct PosteriorParams {
  bool enabled = false;
  double nu = 100.0;
  Index J = 1000;
  double level = 0.95;
  Index n_resample = 0;  // 0 means J
  bool operator==(const PosteriorParams&) const = default;
};

struct IlisParams {
  Index J = 10;
  Index T = 200;
  double burn_in_fraction = 0.2;
  double nu = 4.0;
  double phi_scale = 3.0;  // Phi = phi_scale I
  double mh_cov = 0.05;    // chain proposal mh_cov I
  bool operator==(const IlisParams&) const = default;
};

struct McmcParams {
  Index T = 20000;
  double a = 0.1;
  double nu = 5.0;
  bool wishart_correction = true;
  Index inner_steps = 10;
  double sigma_sd = 0.1;
  Index update_every = 100;
  double mh_cov = 0.05;  // mh_conditional proposal covariance mh_cov I
  bool operator==(const McmcParams&) const = default;
};

struct RunConfig {
  std::string name = "run";
  ModelId experiment = ModelId::localization;
  NoiseParams noise;
  Index R = 0;  // 0 keeps the experiment default
  Algorithm algorithm = Algorithm::atais;
  std::uint64_t seed = 1;
  Index runs = 1;
  double adjacency_threshold = 0.3;
  InitParams init;
  AtaisParams atais;
  MinibatchParams minibatch;
  PosteriorParams posterior;
  IlisParams ilis;
  McmcParams mcmc;
  bool operator==(const RunConfig&) const = default;

  ExperimentSpec spec() const { return make_experiment(experiment, noise.to_family(), R); }

  void validate() const {
    if (runs < 1) throw InvalidConfig("runs must be >= 1");
    if (noise.family != "gaussian" && noise.family != "student_t") throw InvalidConfig("noise family must be gaussian or student_t");
    if (noise.family == "student_t" && !(noise.dof > 0.0)) throw InvalidConfig("noise dof must be positive");
    if (init.mode != "fixed" && init.mode != "random") throw InvalidConfig("init mode must be fixed or random");
    if (!(init.sd > 0.0)) throw InvalidConfig("init sd must be positive");
    if (R < 0) throw InvalidConfig("R must be >= 0");
    const ExperimentSpec s = spec();
    const bool uses_atais = algorithm == Algorithm::atais || algorithm == Algorithm::atais_minibatch ||
                            algorithm == Algorithm::mh_conditional;
    if (uses_atais) {
      if (atais.H < 1) throw InvalidConfig("H must be >= 1");
      if (!(atais.initial_cov > 0.0)) throw InvalidConfig("initial_cov must be positive");
      if (atais.proposal != "gaussian" && atais.proposal != "student_t") throw InvalidConfig("proposal must be gaussian or student_t");
      if (atais.denominator != "standard" && atais.denominator != "mixture") throw InvalidConfig("denominator must be standard or mixture");
      if (atais.retention != "relevant" && atais.retention != "all") throw InvalidConfig("retention must be relevant or all");
      atais_config(Vector::Zero(s.M()), s.K()).validate(s.M(), s.K());
    }
    if (algorithm == Algorithm::atais_minibatch) {
      if (minibatch.strategy != "rescore" && minibatch.strategy != "fusion") throw InvalidConfig("strategy must be rescore or fusion");
      if (minibatch.fusion_delta != "minimum" && minibatch.fusion_delta != "schedule") throw InvalidConfig("fusion_delta must be minimum or schedule");
      if (minibatch.L < 1 || s.R % minibatch.L != 0) throw InvalidConfig("R must be divisible by the batch size L");
      if (atais.T != s.R / minibatch.L) throw InvalidConfig("mini-batch runs need T = R / L");
    }
    if (posterior.enabled) {
      if (!uses_atais) throw InvalidConfig("posterior stage needs an ATAIS-based algorithm");
      if (posterior.J < 1) throw InvalidConfig("posterior J must be >= 1");
      if (!(posterior.nu >= static_cast<double>(s.K())) || posterior.nu != std::floor(posterior.nu))
        throw InvalidConfig("posterior nu must be an integer >= K");
      if (!(posterior.level > 0.0 && posterior.level < 1.0)) throw InvalidConfig("posterior level must lie in (0, 1)");
    }
    if (algorithm == Algorithm::ilis) ilis_config(s).validate(s.M(), s.K());
    const bool joint = algorithm == Algorithm::mh_joint || algorithm == Algorithm::adaptive_mh ||
                       algorithm == Algorithm::mh_within_gibbs;
    if (joint || algorithm == Algorithm::mh_conditional) {
      if (mcmc.T < 1) throw InvalidConfig("mcmc T must be >= 1");
      if (!(mcmc.a > 0.0) || !(mcmc.sigma_sd > 0.0) || !(mcmc.mh_cov > 0.0)) throw InvalidConfig("mcmc scales must be positive");
      if (mcmc.inner_steps < 1) throw InvalidConfig("inner_steps must be >= 1");
      if (algorithm == Algorithm::adaptive_mh && (mcmc.update_every < 1 || mcmc.update_every >= mcmc.T))
        throw InvalidConfig("update_every must lie in [1, T)");
      if ((algorithm == Algorithm::mh_joint || algorithm == Algorithm::adaptive_mh) &&
          (mcmc.nu < static_cast<double>(s.K()) || mcmc.nu != std::floor(mcmc.nu)))
        throw InvalidConfig("Wishart random-walk nu must be an integer >= K");
    }
    if (!(adjacency_threshold > 0.0)) throw InvalidConfig("adjacency_threshold must be positive");
  }

  AtaisConfig atais_config(const Vector& mean0, Index k, const std::vector<Vector>& extra_means = {},
                           std::optional<Matrix> sigma0 = std::nullopt) const {
    AtaisConfig c;
    c.N = atais.N;
    c.T = atais.T;
    c.T0 = atais.T0;
    c.initial_means = {mean0};
    for (const auto& v : extra_means) c.initial_means.push_back(v);
    if (static_cast<Index>(c.initial_means.size()) < atais.H)
      c.initial_means.resize(static_cast<std::size_t>(atais.H), mean0);
    c.initial_cov = atais.initial_cov * Matrix::Identity(mean0.size(), mean0.size());
    c.initial_sigma = sigma0 ? *sigma0 : Matrix(Matrix::Identity(k, k));
    c.delta0 = atais.delta0;
    c.decay = atais.decay;
    c.delta_min = atais.delta_min;
    if (atais.proposal == "student_t") c.proposal = StudentTProposal{atais.proposal_dof};
    if (atais.denominator == "mixture") c.denominator = MixtureDenominator{atais.epsilon};
    c.retention = atais.retention == "all" ? Retention::all : Retention::relevant;
    c.residual_storage = atais.store_residuals ? ResidualStorage::always : ResidualStorage::automatic;
    return c;
  }

  IlisConfig ilis_config(const ExperimentSpec& s) const {
    IlisConfig c;
    c.J = ilis.J;
    c.T = ilis.T;
    c.burn_in_fraction = ilis.burn_in_fraction;
    c.sigma_proposal = WishartParams(ilis.nu, SpdMatrix::from_matrix(ilis.phi_scale * Matrix::Identity(s.K(), s.K())));
    c.mh_cov = ilis.mh_cov * Matrix::Identity(s.M(), s.M());
    c.theta0 = Vector::Zero(s.M());
    return c;
  }
};

// ---------------------------------------------------------------------------
// results

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

struct RunResult {
  Index run = 0;
  Vector theta_hat;
  Matrix sigma_hat;
  Matrix sigma_groundtruth;
  double mae_theta = 0.0;
  double mae_sigma = 0.0;
  double mae_complete = 0.0;
  std::uint64_t model_evaluations = 0;
  Table trajectory;
  std::optional<double> log_evidence;
  std::optional<IntervalMatrix> interval;
  std::optional<double> interval_coverage;  // share of entries whose interval contains Sigma_true
  std::optional<bool> adjacency_recovered;
};

namespace detail {

inline std::vector<std::string> sigma_columns(Index k, const std::string& prefix) {
  std::vector<std::string> out;
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) out.push_back(prefix + "_" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  return out;
}

inline std::vector<std::string> theta_columns(Index m, const std::string& prefix) {
  std::vector<std::string> out;
  for (Index i = 0; i < m; ++i) out.push_back(prefix + "_" + std::to_string(i + 1));
  return out;
}

inline void append(std::vector<double>& row, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) row.push_back(v[i]);
}

inline void append(std::vector<double>& row, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
}

inline Table atais_trajectory(const AtaisOutput& out) {
  Table t;
  const Index m = out.theta_map.size();
  const Index k = out.sigma_ml.dim();
  t.header = {"t"};
  for (auto& s : theta_columns(m, "theta_map")) t.header.push_back(s);
  for (auto& s : sigma_columns(k, "sigma_ml")) t.header.push_back(s);
  for (const char* s : {"delta", "ess", "sigma_drift"}) t.header.emplace_back(s);
  for (std::size_t i = 0; i < out.store.theta_map_history.size(); ++i) {
    std::vector<double> row{static_cast<double>(i + 1)};
    append(row, out.store.theta_map_history[i]);
    append(row, out.store.sigma_ml_history[i]);
    row.push_back(out.delta[i]);
    row.push_back(out.ess[i]);
    row.push_back(out.sigma_drift[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table chain_trajectory(const ChainRecord& c) {
  Table t;
  const Index m = c.thetas.front().size();
  t.header = {"step"};
  for (auto& s : theta_columns(m, "theta")) t.header.push_back(s);
  if (!c.sigmas.empty())
    for (auto& s : sigma_columns(c.sigmas.front().rows(), "sigma")) t.header.push_back(s);
  t.header.emplace_back("log_target");
  for (Index i = 0; i < c.length(); ++i) {
    std::vector<double> row{static_cast<double>(i + 1)};
    append(row, c.thetas[static_cast<std::size_t>(i)]);
    if (!c.sigmas.empty()) append(row, c.sigmas[static_cast<std::size_t>(i)]);
    row.push_back(c.log_targets[static_cast<std::size_t>(i)]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Table ilis_trajectory(const IlisOutput& o) {
  Table t;
  const Index k = o.sigmas.front().dim();
  t.header = {"j"};
  for (auto& s : sigma_columns(k, "sigma")) t.header.push_back(s);
  for (const char* s : {"log_z", "log_gamma", "gamma_bar", "acceptance"}) t.header.emplace_back(s);
  for (std::size_t j = 0; j < o.sigmas.size(); ++j) {
    std::vector<double> row{static_cast<double>(j + 1)};
    append(row, o.sigmas[j].matrix());
    row.push_back(o.log_z[j]);
    row.push_back(o.log_gamma[j]);
    row.push_back(o.gamma_bar[j]);
    row.push_back(o.acceptance[j]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Keeps a random start inside a box prior.
inline Vector clamp_to_prior(const LogPrior& prior, Vector v) {
  if (prior.kind() != "box") return v;
  return v.cwiseMax(prior.lower()).cwiseMin(prior.upper());
}

}  // namespace detail

// Run r of a configuration. Streams: root = seed.child(r + offset), children
// 0 data, 1 init, 2 algorithm, 3 posterior stage, 4 batch plan.
inline RunResult run_single(const RunConfig& cfg, Index run, std::uint64_t seed_offset = 0) {
  const ExperimentSpec spec = cfg.spec();
  const NoiseFamily family = spec.noise;
  const auto model = make_model(spec);
  const RngStream root = RngStream(cfg.seed).child(static_cast<std::uint64_t>(run) + seed_offset);
  RngStream data_rng = root.child(0);
  const Dataset data = generate_synthetic(spec, *model, data_rng);
  RunResult res;
  res.run = run;
  res.sigma_groundtruth = sigma_groundtruth(spec, *model, data);
  model->reset_evaluations();

  const Index m = spec.M();
  const Index k = spec.K();
  RngStream init_rng = root.child(1);
  Vector theta0 = Vector::Zero(m);
  Matrix sigma0 = Matrix::Identity(k, k);
  std::vector<Vector> extra;
  if (cfg.init.mode == "random") {
    theta0 = cfg.init.sd * init_rng.normal_vector(m);
    sigma0 *= std::abs(1.0 + cfg.init.sd * init_rng.normal());
  }
  for (Index h = 1; h < cfg.atais.H; ++h) extra.push_back(cfg.init.sd * init_rng.normal_vector(m));
  const RngStream algo_rng = root.child(2);

  std::optional<AtaisOutput> atais_out;
  switch (cfg.algorithm) {
    case Algorithm::atais:
    case Algorithm::mh_conditional: {
      atais_out = run_atais(cfg.atais_config(theta0, k, extra, sigma0), *model, data, spec.prior, family, algo_rng);
      res.theta_hat = atais_out->theta_map;
      res.sigma_hat = atais_out->sigma_ml.matrix();
      res.trajectory = detail::atais_trajectory(*atais_out);
      if (cfg.algorithm == Algorithm::mh_conditional) {
        // single chain on theta with Sigma fixed at the ATAIS estimate
        const SpdMatrix sig = atais_out->sigma_ml;
        auto target = [&](const Vector& th) {
          const double lp = spec.prior(th);
          if (lp == kNegInf) return kNegInf;
          return loglik(family, residuals(*model, th, data), sig) + lp;
        };
        RngStream chain_rng = algo_rng.child(1);
        const ChainRecord c = mh_conditional(target, detail::clamp_to_prior(spec.prior, Vector::Zero(m)),
                                             SpdMatrix::from_matrix(cfg.mcmc.mh_cov * Matrix::Identity(m, m)),
                                             cfg.mcmc.T, chain_rng);
        res.theta_hat = c.thetas[static_cast<std::size_t>(c.best())];
        res.trajectory = detail::chain_trajectory(c);
      }
      break;
    }
    case Algorithm::atais_minibatch: {
      RngStream plan_rng = root.child(4);
      BatchPlan plan = make_batch_plan(data.R(), cfg.minibatch.L,
                                       cfg.minibatch.strategy == "rescore" ? MinibatchStrategy::rescore
                                                                           : MinibatchStrategy::fusion,
                                       plan_rng);
      plan.fusion_delta = cfg.minibatch.fusion_delta == "schedule" ? FusionDelta::schedule : FusionDelta::minimum;
      atais_out = run_atais_minibatch(cfg.atais_config(theta0, k, extra, sigma0), plan, *model, data, spec.prior,
                                      family, algo_rng);
      res.theta_hat = atais_out->theta_map;
      res.sigma_hat = atais_out->sigma_ml.matrix();
      res.trajectory = detail::atais_trajectory(*atais_out);
      break;
    }
    case Algorithm::ilis: {
      const IlisOutput o = run_ilis(cfg.ilis_config(spec), *model, data, spec.prior, family, algo_rng);
      res.theta_hat = o.theta_mean();
      res.sigma_hat = o.sigma_mean();
      res.trajectory = detail::ilis_trajectory(o);
      break;
    }
    case Algorithm::mh_joint:
    case Algorithm::adaptive_mh:
    case Algorithm::mh_within_gibbs: {
      const JointTarget tgt{*model, data, spec.prior, family, std::nullopt};
      const Vector th0 = detail::clamp_to_prior(spec.prior, theta0);
      const SpdMatrix s0 = SpdMatrix::from_matrix(sigma0);
      RngStream chain_rng = algo_rng;
      ChainRecord c;
      if (cfg.algorithm == Algorithm::mh_joint) {
        c = mh_joint(tgt, th0, s0, MhJointConfig{cfg.mcmc.a, cfg.mcmc.nu, cfg.mcmc.T, cfg.mcmc.wishart_correction},
                     chain_rng);
      } else if (cfg.algorithm == Algorithm::adaptive_mh) {
        c = adaptive_mh(tgt, th0, s0, AdaptiveMhConfig{cfg.mcmc.nu, cfg.mcmc.T, cfg.mcmc.update_every, 1e-6}, chain_rng);
      } else {
        c = mh_within_gibbs(tgt, th0, s0, MwgConfig{cfg.mcmc.inner_steps, cfg.mcmc.T, 1.0, cfg.mcmc.sigma_sd}, chain_rng);
      }
      const auto b = static_cast<std::size_t>(c.best());
      res.theta_hat = c.thetas[b];
      res.sigma_hat = c.sigmas[b];
      res.trajectory = detail::chain_trajectory(c);
      break;
    }
  }

  if (cfg.posterior.enabled && atais_out) {
    PosteriorConfig pc{cfg.posterior.nu, cfg.posterior.J, cfg.posterior.level, cfg.posterior.n_resample};
    const PosteriorSummary ps = run_posterior(*atais_out, family, pc, root.child(3));
    res.log_evidence = ps.log_evidence;
    res.interval = ps.interval;
    const Matrix& truth = spec.sigma_true;
    const auto inside = (truth.array() >= ps.interval.lower.array()) && (truth.array() <= ps.interval.upper.array());
    res.interval_coverage = inside.cast<double>().mean();
  }
  if (spec.id == ModelId::graph) {
    try {
      const Matrix p_hat = SpdMatrix::from_matrix(res.sigma_hat, JitterPolicy::escalate).inverse();
      res.adjacency_recovered = threshold_adjacency(p_hat, cfg.adjacency_threshold) ==
                                threshold_adjacency(graph_precision(), cfg.adjacency_threshold);
    } catch (const Error&) {
      res.adjacency_recovered = false;
    }
  }

  res.model_evaluations = model->evaluations();
  res.mae_theta = mae(res.theta_hat, spec.theta_true);
  res.mae_sigma = mae(res.sigma_hat, res.sigma_groundtruth);
  res.mae_complete = complete_mae(res.mae_theta, m, res.mae_sigma, k);
  return res;
}

// Runs execute on up to `jobs` threads; results are returned in run order.
inline std::vector<RunResult> run_experiment(const RunConfig& cfg, Index jobs = 1, std::uint64_t seed_offset = 0) {
  cfg.validate();
  std::vector<RunResult> out(static_cast<std::size_t>(cfg.runs));
  std::atomic<Index> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (Index r = next++; r < cfg.runs; r = next++) {
      try {
        out[static_cast<std::size_t>(r)] = run_single(cfg, r, seed_offset);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const Index n = std::max<Index>(1, std::min(jobs, cfg.runs));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (Index i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

struct ExperimentSummary {
  Index runs = 0;
  double mae_theta = 0.0;
  double mae_sigma = 0.0;
  double mae_complete = 0.0;  // pooled from the two averages
  double mean_evaluations = 0.0;
  std::optional<double> mean_log_evidence;
  std::optional<IntervalMatrix> mean_interval;  // endpoints averaged across runs
  std::optional<double> interval_coverage;
  std::optional<double> adjacency_rate;
};

inline ExperimentSummary summarize(const std::vector<RunResult>& results) {
  if (results.empty()) throw InvalidArgument("summarize: no runs");
  ExperimentSummary s;
  s.runs = static_cast<Index>(results.size());
  const double n = static_cast<double>(results.size());
  double ev = 0.0, le = 0.0, cov = 0.0, adj = 0.0;
  Index n_le = 0, n_int = 0, n_adj = 0;
  IntervalMatrix acc;
  for (const auto& r : results) {
    s.mae_theta += r.mae_theta / n;
    s.mae_sigma += r.mae_sigma / n;
    ev += static_cast<double>(r.model_evaluations) / n;
    if (r.log_evidence) {
      le += *r.log_evidence;
      ++n_le;
    }
    if (r.interval) {
      if (n_int == 0) acc = IntervalMatrix{Matrix::Zero(r.interval->lower.rows(), r.interval->lower.cols()),
                                          Matrix::Zero(r.interval->upper.rows(), r.interval->upper.cols())};
      acc.lower += r.interval->lower;
      acc.upper += r.interval->upper;
      cov += *r.interval_coverage;
      ++n_int;
    }
    if (r.adjacency_recovered) {
      adj += *r.adjacency_recovered ? 1.0 : 0.0;
      ++n_adj;
    }
  }
  const Index m = results.front().theta_hat.size();
  const Index k = results.front().sigma_hat.rows();
  s.mae_complete = complete_mae(s.mae_theta, m, s.mae_sigma, k);
  s.mean_evaluations = ev;
  if (n_le) s.mean_log_evidence = le / static_cast<double>(n_le);
  if (n_int) {
    acc.lower /= static_cast<double>(n_int);
    acc.upper /= static_cast<double>(n_int);
    s.mean_interval = acc;
    s.interval_coverage = cov / static_cast<double>(n_int);
  }
  if (n_adj) s.adjacency_rate = adj / static_cast<double>(n_adj);
  return s;
}

struct ExperimentInfo {
  std::string id;
  Index M;
  Index K;
  Index R;
  std::string description;
};

inline std::vector<ExperimentInfo> list_experiments() {
  std::vector<ExperimentInfo> out;
  const std::pair<ModelId, const char*> all[] = {
      {ModelId::localization, "target localization from three sensors, repeated measurements"},
      {ModelId::multioutput, "four-output nonlinear regression on a time grid"},
      {ModelId::biology_ode, "two-compartment ODE model solved with RK4, box prior [0,5]^4"},
      {ModelId::graph, "ten-output model with a sparse seeded precision matrix"}};
  for (const auto& [id, desc] : all) {
    const ExperimentSpec s = make_experiment(id);
    out.push_back({to_string(id), s.M(), s.K(), s.R, desc});
  }
  return out;
}

}  // namespace binv

#endif  // BAYES_INVERT_EXPERIMENT_HPP
