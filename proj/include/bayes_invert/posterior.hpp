#ifndef BAYES_INVERT_POSTERIOR_HPP
#define BAYES_INVERT_POSTERIOR_HPP

// Second inference stage: recycles the stored ATAIS samples into conditional,
// joint and marginal approximations without calling the forward model.

#include "atais.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace binv {

struct WishartParams {
  double nu = 100.0;
  SpdMatrix phi;

  WishartParams() : phi(SpdMatrix::identity(1)) {}
  WishartParams(double nu_, SpdMatrix phi_) : nu(nu_), phi(std::move(phi_)) {
    if (!(nu >= static_cast<double>(phi.dim())))
      throw InvalidArgument("Wishart dof must satisfy nu >= K");
  }
  Index dim() const { return phi.dim(); }
};

// ln Gamma_K(a)
inline double log_multigamma(Index k, double a) {
  const double kk = static_cast<double>(k);
  double acc = 0.25 * kk * (kk - 1.0) * std::log(M_PI);
  for (Index i = 1; i <= k; ++i) acc += std::lgamma(a + 0.5 * (1.0 - static_cast<double>(i)));
  return acc;
}

inline double wishart_logpdf(const SpdMatrix& sigma, const WishartParams& p) {
  detail::require_dims(sigma.dim() == p.dim(), "wishart_logpdf: K mismatch");
  const double k = static_cast<double>(p.dim());
  const double tr = p.phi.trace_solve(sigma.matrix());
  return 0.5 * (p.nu - k - 1.0) * sigma.log_det() - 0.5 * tr - 0.5 * p.nu * k * std::log(2.0) -
         0.5 * p.nu * p.phi.log_det() - log_multigamma(p.dim(), 0.5 * p.nu);
}

// Sum of nu outer products s s' with s ~ N(0, Phi); integer nu only.
inline SpdMatrix sample_wishart(const WishartParams& p, RngStream& rng) {
  if (p.nu != std::floor(p.nu)) throw InvalidArgument("sample_wishart needs an integer nu");
  const Index k = p.dim();
  const auto n = static_cast<Index>(p.nu);
  Matrix z(k, n);
  for (Index j = 0; j < n; ++j) z.col(j) = rng.normal_vector(k);
  const Matrix s = p.phi.lower() * z;
  Matrix w = s * s.transpose();
  w = 0.5 * (w + w.transpose());
  return SpdMatrix::from_matrix(w, JitterPolicy::escalate);
}

// Phi = Sigma_hat / nu, so the Wishart mean equals Sigma_hat.
inline SpdMatrix choose_phi(const SpdMatrix& sigma_hat, double nu) {
  if (!(nu >= static_cast<double>(sigma_hat.dim()))) throw InvalidArgument("choose_phi needs nu >= K");
  return SpdMatrix::from_matrix(sigma_hat.matrix() / nu, JitterPolicy::escalate);
}

namespace detail {

inline void require_common_columns(const SampleStore& store) {
  Index n = -1;
  store.for_each([&](const IterationRecord&, const StoredSample& s) {
    if (s.log_weight == kNegInf) return;
    if (n < 0) n = s.n_cols;
    if (s.n_cols != n) throw InvalidArgument("stored samples were scored on different column sets");
  });
}

}  // namespace detail

// log rho = log l(Y|theta, Sigma) + log g(theta) - log q, in store order.
inline std::vector<double> conditional_log_rho(const SampleStore& store, const SpdMatrix& sigma,
                                               const NoiseFamily& family) {
  detail::require_common_columns(store);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(store.retained()));
  store.for_each([&](const IterationRecord&, const StoredSample& s) {
    if (s.log_weight == kNegInf || s.log_prior == kNegInf) {
      out.push_back(kNegInf);
      return;
    }
    out.push_back(detail::stored_loglik(family, s, sigma) + s.log_prior - s.log_denominator);
  });
  return out;
}

inline std::vector<double> conditional_reweight(const SampleStore& store, const SpdMatrix& sigma,
                                                const NoiseFamily& family) {
  return normalize_log_weights(conditional_log_rho(store, sigma, family));
}

struct JointApproximation {
  std::vector<Vector> thetas;      // retained samples in store order
  std::vector<SpdMatrix> sigmas;   // J matrix draws
  Matrix log_rho;                  // retained x J
  Vector log_gamma;                // J
  std::vector<double> alpha;       // marginal over theta samples
  std::vector<double> lambda;      // marginal over the Sigma draws
  Index samples_drawn = 0;         // N*T*H, all drawn samples including discarded ones

  Index J() const { return static_cast<Index>(sigmas.size()); }

  // normalized beta, retained x J
  Matrix beta() const {
    const Matrix lb = log_rho.rowwise() + log_gamma.transpose();
    double mx = kNegInf;
    for (Index i = 0; i < lb.size(); ++i) mx = std::max(mx, lb.data()[i]);
    if (mx == kNegInf) throw DegenerateWeights("all joint weights are zero");
    Matrix b = (lb.array() - mx).exp().matrix();
    return b / b.sum();
  }
};

// log beta_{n,j} = log rho_n(Sigma_j) + log gamma_j, gamma_j = g(Sigma_j)/q(Sigma_j).
inline JointApproximation joint_weights(const SampleStore& store, Index samples_drawn,
                                        const std::vector<SpdMatrix>& sigma_draws,
                                        const WishartParams& sigma_prior, const WishartParams& sigma_proposal,
                                        const NoiseFamily& family) {
  if (sigma_draws.empty()) throw InvalidArgument("joint_weights needs at least one Sigma draw");
  const Index n = store.retained();
  if (n == 0) throw InvalidArgument("joint_weights needs a non-empty store");
  JointApproximation ja;
  ja.sigmas = sigma_draws;
  ja.samples_drawn = samples_drawn;
  store.for_each([&](const IterationRecord&, const StoredSample& s) { ja.thetas.push_back(s.theta); });
  const Index j_count = static_cast<Index>(sigma_draws.size());
  ja.log_rho.resize(n, j_count);
  ja.log_gamma.resize(j_count);
  for (Index j = 0; j < j_count; ++j) {
    const auto& sj = sigma_draws[static_cast<std::size_t>(j)];
    const std::vector<double> col = conditional_log_rho(store, sj, family);
    for (Index i = 0; i < n; ++i) ja.log_rho(i, j) = col[static_cast<std::size_t>(i)];
    ja.log_gamma[j] = wishart_logpdf(sj, sigma_prior) - wishart_logpdf(sj, sigma_proposal);
  }
  const Matrix b = ja.beta();
  ja.alpha.resize(static_cast<std::size_t>(n));
  ja.lambda.resize(static_cast<std::size_t>(j_count));
  for (Index i = 0; i < n; ++i) ja.alpha[static_cast<std::size_t>(i)] = b.row(i).sum();
  for (Index j = 0; j < j_count; ++j) ja.lambda[static_cast<std::size_t>(j)] = b.col(j).sum();
  return ja;
}

// log p(Y) ~ log sum beta - ln(J * N * T); discarded samples contribute zero.
inline double marginal_likelihood(const JointApproximation& ja) {
  if (ja.samples_drawn < 1) throw InvalidArgument("marginal_likelihood needs samples_drawn >= 1");
  const Matrix lb = ja.log_rho.rowwise() + ja.log_gamma.transpose();
  const std::vector<double> flat(lb.data(), lb.data() + lb.size());
  const double lse = log_sum_exp(flat);
  if (lse == kNegInf) throw DegenerateWeights("all joint weights are zero");
  return lse - std::log(static_cast<double>(ja.J()) * static_cast<double>(ja.samples_drawn));
}

// Linear interpolation between order statistics; p in [0, 1].
inline double percentile(std::vector<double> v, double p) {
  if (v.empty()) throw InvalidArgument("percentile of an empty sample");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct IntervalMatrix {
  Matrix lower;
  Matrix upper;

  bool contains(const Matrix& m) const {
    return (m.array() >= lower.array()).all() && (m.array() <= upper.array()).all();
  }
};

inline IntervalMatrix credible_interval(const std::vector<SpdMatrix>& sigmas, const std::vector<double>& lambda,
                                        double level, Index n_resample, RngStream& rng) {
  if (sigmas.empty() || sigmas.size() != lambda.size())
    throw InvalidArgument("credible_interval: sample/weight size mismatch");
  if (!(level > 0.0 && level < 1.0)) throw InvalidArgument("credible level must lie in (0,1)");
  if (n_resample < 1) throw InvalidArgument("n_resample must be positive");
  double total = 0.0;
  for (double w : lambda) total += w;
  if (!(total > 0.0)) throw DegenerateWeights("credible_interval: all weights are zero");
  std::discrete_distribution<std::size_t> pick(lambda.begin(), lambda.end());
  const Index k = sigmas.front().dim();
  std::vector<std::vector<double>> entries(static_cast<std::size_t>(k * k));
  for (Index s = 0; s < n_resample; ++s) {
    const Matrix& m = sigmas[pick(rng)].matrix();
    for (Index i = 0; i < k * k; ++i) entries[static_cast<std::size_t>(i)].push_back(m.data()[i]);
  }
  IntervalMatrix out{Matrix(k, k), Matrix(k, k)};
  const double tail = 0.5 * (1.0 - level);
  for (Index i = 0; i < k * k; ++i) {
    out.lower.data()[i] = percentile(entries[static_cast<std::size_t>(i)], tail);
    out.upper.data()[i] = percentile(entries[static_cast<std::size_t>(i)], 1.0 - tail);
  }
  return out;
}

struct PosteriorConfig {
  double nu = 100.0;
  Index J = 1000;
  double level = 0.95;
  Index n_resample = 0;  // 0 means J
};

struct PosteriorSummary {
  JointApproximation joint;
  IntervalMatrix interval;
  double log_evidence = kNegInf;
  Vector theta_mean;
  Matrix sigma_mean;
};

// Empirical-Bayes pipeline: Phi = Sigma_hat/nu, proposal = prior, J draws.
inline PosteriorSummary run_posterior(const AtaisOutput& out, const NoiseFamily& family,
                                      const PosteriorConfig& cfg, const RngStream& rng) {
  if (cfg.J < 1) throw InvalidArgument("posterior J must be positive");
  const WishartParams w(cfg.nu, choose_phi(out.sigma_ml, cfg.nu));
  RngStream draw_rng = rng.child(0);
  std::vector<SpdMatrix> draws;
  draws.reserve(static_cast<std::size_t>(cfg.J));
  for (Index j = 0; j < cfg.J; ++j) draws.push_back(sample_wishart(w, draw_rng));
  PosteriorSummary ps{joint_weights(out.store, out.samples_drawn, draws, w, w, family), {}, kNegInf, {}, {}};
  ps.log_evidence = marginal_likelihood(ps.joint);
  RngStream res_rng = rng.child(1);
  ps.interval = credible_interval(ps.joint.sigmas, ps.joint.lambda, cfg.level,
                                  cfg.n_resample > 0 ? cfg.n_resample : cfg.J, res_rng);
  const Index m = ps.joint.thetas.front().size();
  ps.theta_mean = Vector::Zero(m);
  for (std::size_t i = 0; i < ps.joint.thetas.size(); ++i) ps.theta_mean += ps.joint.alpha[i] * ps.joint.thetas[i];
  ps.sigma_mean = Matrix::Zero(out.sigma_ml.dim(), out.sigma_ml.dim());
  for (std::size_t j = 0; j < draws.size(); ++j) ps.sigma_mean += ps.joint.lambda[j] * draws[j].matrix();
  return ps;
}

struct NuSelection {
  double nu = 0.0;
  std::vector<double> log_evidence;  // per grid entry
};

// Grid argmax of the estimated evidence with Phi = Sigma_hat/nu; ties go to the smallest nu.
inline NuSelection select_nu(const AtaisOutput& out, const NoiseFamily& family, std::vector<double> grid,
                             Index j_per_nu, const RngStream& rng) {
  if (grid.empty()) throw InvalidArgument("select_nu needs a non-empty grid");
  std::sort(grid.begin(), grid.end());
  NuSelection sel;
  double best = kNegInf;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    PosteriorConfig pc;
    pc.nu = grid[g];
    pc.J = j_per_nu;
    const WishartParams w(pc.nu, choose_phi(out.sigma_ml, pc.nu));
    RngStream draw_rng = rng.child(static_cast<std::uint64_t>(grid[g]));  // keyed by nu: equal entries tie exactly
    std::vector<SpdMatrix> draws;
    for (Index j = 0; j < j_per_nu; ++j) draws.push_back(sample_wishart(w, draw_rng));
    const double le = marginal_likelihood(joint_weights(out.store, out.samples_drawn, draws, w, w, family));
    sel.log_evidence.push_back(le);
    if (sel.nu == 0.0 || le > best) {
      best = le;
      sel.nu = grid[g];
    }
  }
  return sel;
}

}  // namespace binv

#endif  // BAYES_INVERT_POSTERIOR_HPP
