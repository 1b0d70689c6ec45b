#ifndef BAYES_INVERT_MODELS_HPP
#define BAYES_INVERT_MODELS_HPP

#include "core.hpp"
#include "likelihood.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace binv {

// ---------------------------------------------------------------------------
// RK4

using VectorField = std::function<Eigen::Vector2d(double, const Eigen::Vector2d&)>;

class Trajectory {
 public:
  Trajectory(double t0, double h, std::vector<Eigen::Vector2d> states)
      : t0_(t0), h_(h), states_(std::move(states)) {}

  double t0() const { return t0_; }
  double step() const { return h_; }
  double t_end() const { return t0_ + h_ * static_cast<double>(states_.size() - 1); }
  const std::vector<Eigen::Vector2d>& states() const { return states_; }

  // Linear interpolation between grid points.
  Eigen::Vector2d at(double t) const {
    const double u = (t - t0_) / h_;
    const double last = static_cast<double>(states_.size() - 1);
    if (u < -1e-9 || u > last + 1e-9) throw InvalidArgument("trajectory query outside the solved span");
    const double uc = std::clamp(u, 0.0, last);
    std::size_t i = static_cast<std::size_t>(std::floor(uc + 1e-9));
    if (i >= states_.size() - 1) return states_.back();
    const double frac = uc - static_cast<double>(i);
    if (frac < 1e-9) return states_[i];
    return (1.0 - frac) * states_[i] + frac * states_[i + 1];
  }

 private:
  double t0_, h_;
  std::vector<Eigen::Vector2d> states_;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

inline Trajectory rk4_solve(const VectorField& f, const Eigen::Vector2d& y0, double t0, double t1, double h) {
  if (!(h > 0.0)) throw InvalidArgument("rk4 step must be positive");
  if (!(t1 >= t0)) throw InvalidArgument("rk4 span must satisfy t1 >= t0");
  const auto n = static_cast<std::size_t>(std::ceil((t1 - t0) / h - 1e-9));
  std::vector<Eigen::Vector2d> ys;
  ys.reserve(n + 1);
  ys.push_back(y0);
  Eigen::Vector2d y = y0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + h * static_cast<double>(i);
    const Eigen::Vector2d k1 = f(t, y);
    const Eigen::Vector2d k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const Eigen::Vector2d k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const Eigen::Vector2d k4 = f(t + h, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) throw SolverError("rk4: non-finite state at t = " + std::to_string(t + h));
    ys.push_back(y);
  }
  return Trajectory(t0, h, std::move(ys));
}

// ---------------------------------------------------------------------------
// models

class LocalizationModel final : public ForwardModel {
 public:
  static constexpr double kA = 10.0;

  LocalizationModel() {
    sensors_[0] << 0.5, 1.0;
    sensors_[1] << 3.5, 1.0;
    sensors_[2] << 2.0, 3.0;
  }

  Index param_dim() const override { return 2; }
  Index output_dim() const override { return 3; }
  std::string name() const override { return "localization"; }
  const std::array<Eigen::Vector2d, 3>& sensors() const { return sensors_; }

  Vector f(const Vector& theta) const {
    Vector out(3);
    for (int i = 0; i < 3; ++i) {
      const double d2 = (theta.head<2>() - sensors_[static_cast<std::size_t>(i)]).squaredNorm();
      if (d2 == 0.0) throw ModelError("localization: theta coincides with sensor " + std::to_string(i + 1), 0);
      out[i] = -kA * std::log(d2);
    }
    return out;
  }

  Vector evaluate(const Vector& theta, const Dataset&, Index) const override { return f(theta); }

  Matrix evaluate_all(const Vector& theta, const Dataset& data) const override {
    return f(theta).replicate(1, data.R());
  }

 private:
  std::array<Eigen::Vector2d, 3> sensors_;
};

class MultioutputModel final : public ForwardModel {
 public:
  Index param_dim() const override { return 2; }
  Index output_dim() const override { return 4; }
  std::string name() const override { return "multioutput"; }

  static Vector f(const Vector& th, double tau) {
    const double s = std::sin(tau), c = std::cos(tau), t2 = tau * tau;
    Vector out(4);
    out << th[0] * s * tau, th[1] * c * t2, (th[0] + th[1]) * s * c, th[1] * t2;
    return out;
  }

  Vector evaluate(const Vector& theta, const Dataset& data, Index r) const override {
    return f(theta, data.tau(r));
  }

  Matrix evaluate_all(const Vector& theta, const Dataset& data) const override {
    const auto& tau = data.aux();
    Matrix out(4, data.R());
    const double a = theta[0], b = theta[1];
    for (Index r = 0; r < data.R(); ++r) {
      const double t = tau(0, r);
      const double s = std::sin(t), c = std::cos(t), t2 = t * t;
      out(0, r) = a * s * t;
      out(1, r) = b * c * t2;
      out(2, r) = (a + b) * s * c;
      out(3, r) = b * t2;
    }
    return out;
  }
};

inline double biology_input(double tau) { return tau <= 1.0 ? tau + 0.5 : 1.5 * std::exp(1.0 - tau); }

class BiologyModel final : public ForwardModel {
 public:
  explicit BiologyModel(double h = 0.01) : h_(h) {}

  Index param_dim() const override { return 4; }
  Index output_dim() const override { return 2; }
  std::string name() const override { return "biology_ode"; }
  double step() const { return h_; }

  // theta = [k12, k21, k1e, b], f(0) = 0.
  Trajectory solve(const Vector& theta, double t_end) const {
    const double k12 = theta[0], k21 = theta[1], k1e = theta[2], b = theta[3];
    VectorField field = [=](double t, const Eigen::Vector2d& y) {
      Eigen::Vector2d d;
      d[0] = -(k1e + k12) * y[0] + k21 * y[1] + b * biology_input(t);
      d[1] = k12 * y[0] - k21 * y[1];
      return d;
    };
    return rk4_solve(field, Eigen::Vector2d::Zero(), 0.0, t_end, h_);
  }

  Vector evaluate(const Vector& theta, const Dataset& data, Index r) const override {
    const double tau = data.tau(r);
    if (tau < 0.0) throw ModelError("biology: negative time", r);
    return solve(theta, tau).at(tau);
  }

  Matrix evaluate_all(const Vector& theta, const Dataset& data) const override {
    const auto& tau = data.aux();
    const double t_end = tau.row(0).maxCoeff();
    if (tau.row(0).minCoeff() < 0.0) throw ModelError("biology: negative time", 0);
    Matrix out(2, data.R());
    try {
      const Trajectory tr = solve(theta, t_end);
      for (Index r = 0; r < data.R(); ++r) out.col(r) = tr.at(tau(0, r));
    } catch (const SolverError&) {
      out.setConstant(std::numeric_limits<double>::infinity());
    }
    return out;
  }

 private:
  double h_;
};

class GraphModel final : public ForwardModel {
 public:
  Index param_dim() const override { return 4; }
  Index output_dim() const override { return 10; }
  std::string name() const override { return "graph"; }

  static Vector f(const Vector& th, double tau) {
    const double t1 = th[0], t2 = th[1], t3 = th[2], t4 = th[3];
    if (t3 == -1.0) throw ModelError("graph: theta3 = -1", 0);
    Vector o(10);
    o[0] = -t4 * tau + 5.0 * t1 * t1;
    o[1] = 2.0 * t3 * std::sin(t2 * tau);
    o[2] = t1 - t3 + t1 * std::cos(2.0 * tau);
    o[3] = 3.0 * t4 + 3.0 * t2 + t1 * std::exp(0.1 * tau);
    o[4] = t3 * t3 - 2.0 * t1 + 3.0 * t2 - std::exp(0.8 * t3) * std::exp(1.0 - tau);
    o[5] = 5.0 * (t4 + t3) - t2 * std::log(1.0 + 2.0 * tau);
    o[6] = 3.0 * t2 - 0.2 * tau * std::sin(t3);
    o[7] = 3.0 * t1 + 5.0 * t3 - 20.0 * std::sin(t4) * std::cos(2.0 * tau + M_PI / 4.0);
    o[8] = t2 + 4.0 * t4 + 5.0 * std::exp(1.0 / (1.0 + t3)) * tau;
    o[9] = 5.0 * t1 + 10.0 * t3 - 5.0 * t4 * std::sin(tau);
    return o;
  }

  Vector evaluate(const Vector& theta, const Dataset& data, Index r) const override {
    try {
      return f(theta, data.tau(r));
    } catch (const ModelError& e) {
      throw ModelError("graph: theta3 = -1", r);
    }
  }

  // Precompute the theta-free column terms for a fixed time grid; calls on
  // any other grid fall back to direct evaluation.
  void bind_grid(const Matrix& tau) {
    grid_ = tau.row(0);
    feats_.resize(7, grid_.size());
    for (Index r = 0; r < grid_.size(); ++r) {
      const double t = grid_[r];
      feats_.col(r) << std::cos(2.0 * t), std::exp(0.1 * t), std::exp(1.0 - t), std::log(1.0 + 2.0 * t),
          std::cos(2.0 * t + M_PI / 4.0), std::sin(t), t;
    }
  }

  Matrix evaluate_all(const Vector& th, const Dataset& data) const override {
    const double t1 = th[0], t2 = th[1], t3 = th[2], t4 = th[3];
    if (t3 == -1.0) throw ModelError("graph: theta3 = -1", 0);
    const auto& tau = data.aux();
    const bool cached = grid_.size() == data.R() && tau.row(0).transpose() == grid_;
    Matrix local;
    if (!cached) {
      GraphModel tmp;
      tmp.bind_grid(tau);
      local = tmp.feats_;
    }
    const Matrix& F = cached ? feats_ : local;
    const double e08 = std::exp(0.8 * t3), e9 = 5.0 * std::exp(1.0 / (1.0 + t3)), s4 = 20.0 * std::sin(t4);
    const double st3 = 0.2 * std::sin(t3);
    const double c0 = 5.0 * t1 * t1, c3 = 3.0 * t4 + 3.0 * t2, c4 = t3 * t3 - 2.0 * t1 + 3.0 * t2;
    const double c5 = 5.0 * (t4 + t3), c7 = 3.0 * t1 + 5.0 * t3, c8 = t2 + 4.0 * t4, c9 = 5.0 * t1 + 10.0 * t3;
    Matrix o(10, data.R());
    for (Index r = 0; r < data.R(); ++r) {
      const double t = F(6, r);
      o(0, r) = -t4 * t + c0;
      o(1, r) = 2.0 * t3 * std::sin(t2 * t);
      o(2, r) = t1 - t3 + t1 * F(0, r);
      o(3, r) = c3 + t1 * F(1, r);
      o(4, r) = c4 - e08 * F(2, r);
      o(5, r) = c5 - t2 * F(3, r);
      o(6, r) = 3.0 * t2 - st3 * t;
      o(7, r) = c7 - s4 * F(4, r);
      o(8, r) = c8 + e9 * t;
      o(9, r) = c9 - 5.0 * t4 * F(5, r);
    }
    return o;
  }

 private:
  Vector grid_;
  Matrix feats_;
};

// ---------------------------------------------------------------------------
// experiments

enum class ModelId { localization, multioutput, biology_ode, graph };

inline std::string to_string(ModelId id) {
  switch (id) {
    case ModelId::localization: return "localization";
    case ModelId::multioutput: return "multioutput";
    case ModelId::biology_ode: return "biology_ode";
    case ModelId::graph: return "graph";
  }
  return "?";
}

inline ModelId model_id_from_string(const std::string& s) {
  if (s == "localization") return ModelId::localization;
  if (s == "multioutput") return ModelId::multioutput;
  if (s == "biology_ode" || s == "biology") return ModelId::biology_ode;
  if (s == "graph") return ModelId::graph;
  throw InvalidConfig("unknown experiment id: " + s);
}

struct ExperimentSpec {
  ModelId id = ModelId::localization;
  Vector theta_true;
  Matrix sigma_true;
  Index R = 50;
  NoiseFamily noise = Gaussian{};
  std::optional<Matrix> aux;  // 1 x R time grid
  LogPrior prior = LogPrior::flat();

  Index M() const { return theta_true.size(); }
  Index K() const { return sigma_true.rows(); }
};

inline std::unique_ptr<ForwardModel> make_model(ModelId id) {
  switch (id) {
    case ModelId::localization: return std::make_unique<LocalizationModel>();
    case ModelId::multioutput: return std::make_unique<MultioutputModel>();
    case ModelId::biology_ode: return std::make_unique<BiologyModel>();
    case ModelId::graph: return std::make_unique<GraphModel>();
  }
  throw InvalidConfig("unknown model");
}

inline Matrix linspace_row(double a, double b, Index n) {
  Matrix g(1, n);
  for (Index i = 0; i < n; ++i) g(0, i) = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

inline ExperimentSpec localization_experiment(NoiseFamily noise = Gaussian{}, Index R = 50) {
  ExperimentSpec s;
  s.id = ModelId::localization;
  s.theta_true = (Vector(2) << 2.5, 2.0).finished();
  s.sigma_true = Vector((Vector(3) << 1.0, 2.0, 3.0).finished()).asDiagonal();
  s.R = R;
  s.noise = noise;
  return s;
}

inline ExperimentSpec multioutput_experiment(NoiseFamily noise = Gaussian{}, Index R = 50) {
  ExperimentSpec s;
  s.id = ModelId::multioutput;
  s.theta_true = (Vector(2) << 0.2, 0.1).finished();
  s.sigma_true.resize(4, 4);
  s.sigma_true << 0.1, 0.3, 0.16, 0.0,  //
      0.3, 1.05, 0.0, 0.0,               //
      0.16, 0.0, 2.0, 0.0,               //
      0.0, 0.0, 0.0, 2.95;
  s.R = R;
  s.noise = noise;
  s.aux = linspace_row(0.1, 5.0, R);
  return s;
}

inline ExperimentSpec biology_experiment(NoiseFamily noise = Gaussian{}, Index R = 100) {
  ExperimentSpec s;
  s.id = ModelId::biology_ode;
  s.theta_true = (Vector(4) << 1.0, 1.0, 1.0, 2.0).finished();
  s.sigma_true.resize(2, 2);
  s.sigma_true << 1.0, 0.9, 0.9, 2.0;
  s.R = R;
  s.noise = noise;
  s.aux = linspace_row(0.0, 5.0, R);
  s.prior = LogPrior::box(Vector::Zero(4), Vector::Constant(4, 5.0));
  return s;
}

// Seeded sparse precision: Erdos-Renyi(p) pattern, |off-diagonal| in [lo, hi]
// with random signs, diagonal = row absolute sum + margin.
inline Matrix seeded_precision(Index k, std::uint64_t seed, double p = 0.2, double lo = 0.4, double hi = 0.8,
                               double margin = 0.5) {
  RngStream rng(seed);
  Matrix prec = Matrix::Zero(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j)
      if (rng.uniform() < p) {
        const double mag = lo + (hi - lo) * rng.uniform();
        const double v = rng.uniform() < 0.5 ? -mag : mag;
        prec(i, j) = v;
        prec(j, i) = v;
      }
  for (Index i = 0; i < k; ++i) prec(i, i) = prec.row(i).cwiseAbs().sum() + margin;
  return prec;
}

inline constexpr std::uint64_t kGraphPrecisionSeed = 20240917;

inline Matrix graph_precision() { return seeded_precision(10, kGraphPrecisionSeed); }

inline ExperimentSpec graph_experiment(NoiseFamily noise = Gaussian{}, Index R = 500) {
  ExperimentSpec s;
  s.id = ModelId::graph;
  s.theta_true = (Vector(4) << 0.5, 2.0, 5.0, 3.0).finished();
  s.sigma_true = graph_precision().inverse();
  s.sigma_true = 0.5 * (s.sigma_true + s.sigma_true.transpose());
  s.R = R;
  s.noise = noise;
  s.aux = linspace_row(0.1, 5.0, R);
  return s;
}

// R = 0 keeps the experiment's default number of observations.
inline ExperimentSpec make_experiment(ModelId id, NoiseFamily noise = Gaussian{}, Index R = 0) {
  if (R < 0) throw InvalidConfig("R must be positive");
  switch (id) {
    case ModelId::localization: return R ? localization_experiment(noise, R) : localization_experiment(noise);
    case ModelId::multioutput: return R ? multioutput_experiment(noise, R) : multioutput_experiment(noise);
    case ModelId::biology_ode: return R ? biology_experiment(noise, R) : biology_experiment(noise);
    case ModelId::graph: return R ? graph_experiment(noise, R) : graph_experiment(noise);
  }
  throw InvalidConfig("unknown model");
}

inline std::unique_ptr<ForwardModel> make_model(const ExperimentSpec& spec) {
  if (spec.id == ModelId::graph && spec.aux) {
    auto g = std::make_unique<GraphModel>();
    g->bind_grid(*spec.aux);
    return g;
  }
  return make_model(spec.id);
}

// y_r = f_r(theta_true) + v_r, v_r from the experiment's noise family with Sigma_true.
inline Dataset generate_synthetic(const ExperimentSpec& spec, const ForwardModel& model, RngStream& rng) {
  Dataset shell(Matrix::Zero(spec.K(), spec.R), spec.aux);
  const Matrix f = model.evaluate_all(spec.theta_true, shell);
  const Eigen::LLT<Matrix> llt(spec.sigma_true);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Sigma_true is not positive definite");
  const Matrix l = llt.matrixL();
  Matrix y = f;
  for (Index r = 0; r < spec.R; ++r) {
    Vector v = l * rng.normal_vector(spec.K());
    if (const auto* t = std::get_if<StudentT>(&spec.noise)) v *= std::sqrt(t->dof / rng.chi_squared(t->dof));
    y.col(r) += v;
  }
  return Dataset(std::move(y), spec.aux);
}

// 1 where |P_ij| >= threshold.
inline Eigen::MatrixXi threshold_adjacency(const Matrix& p, double threshold) {
  if (p.rows() != p.cols()) throw DimensionMismatch("threshold_adjacency needs a square matrix");
  Eigen::MatrixXi a(p.rows(), p.cols());
  for (Index i = 0; i < p.rows(); ++i)
    for (Index j = 0; j < p.cols(); ++j) a(i, j) = std::abs(p(i, j)) >= threshold ? 1 : 0;
  return a;
}

}  // namespace binv

#endif  // BAYES_INVERT_MODELS_HPP
