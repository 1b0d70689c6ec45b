#include <bayes_invert/likelihood.hpp>
#include <bayes_invert/models.hpp>

#include "properties.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

#include <array>

using namespace binv;
using Catch::Approx;

namespace {

Dataset at_times(Index k, std::initializer_list<double> taus) {
  Matrix aux(1, static_cast<Index>(taus.size()));
  Index i = 0;
  for (double t : taus) aux(0, i++) = t;
  return Dataset(Matrix::Zero(k, aux.cols()), aux);
}

}  // namespace

TEST_CASE("localization oracles") {
  LocalizationModel m;
  const Vector th = (Vector(2) << 1.5, 1.0).finished();  // one unit right of sensor 1
  const Vector f = m.f(th);
  CHECK(f[0] == Approx(0.0).margin(1e-15));
  CHECK(f[1] == Approx(-10.0 * std::log(4.0)));
  CHECK(f[2] == Approx(-10.0 * std::log(4.25)));
  CHECK_THROWS_AS(m.f((Vector(2) << 3.5, 1.0).finished()), ModelError);
  const Dataset d(Matrix::Zero(3, 4));
  CHECK((m.evaluate_all(th, d).colwise() - f).norm() == 0.0);
}

TEST_CASE("multi-output oracles") {
  MultioutputModel m;
  const Vector th = (Vector(2) << 0.2, 0.1).finished();
  const Vector f = MultioutputModel::f(th, M_PI / 2.0);
  CHECK(f[0] == Approx(0.31416).epsilon(1e-5));
  CHECK(f[1] == Approx(0.0).margin(1e-15));
  CHECK(f[2] == Approx(0.0).margin(1e-15));
  CHECK(f[3] == Approx(0.24674).epsilon(1e-5));
  CHECK(MultioutputModel::f((Vector(2) << 0.0, 1.0).finished(), 1.0)[3] == 1.0);
  const Dataset d = at_times(4, {0.1, 1.0, 2.5, 5.0});
  const Matrix all = m.evaluate_all(th, d);
  for (Index r = 0; r < d.R(); ++r) CHECK((all.col(r) - m.evaluate(th, d, r)).norm() < 1e-14);
}

TEST_CASE("rk4 on exponential decay") {
  const VectorField f = [](double, const Eigen::Vector2d& y) -> Eigen::Vector2d { return -y; };
  const Trajectory tr = rk4_solve(f, Eigen::Vector2d(1.0, 2.0), 0.0, 0.1, 0.01);
  CHECK(tr.states().size() == 11);
  CHECK(tr.at(0.1)[0] == Approx(0.9048375).epsilon(1e-7));
  CHECK(tr.at(0.1)[1] == Approx(2.0 * 0.9048375).epsilon(1e-7));
  CHECK(tr.at(0.05)[0] == Approx(std::exp(-0.05)).epsilon(1e-9));
  CHECK_THROWS_AS(tr.at(0.2), InvalidArgument);
  CHECK_THROWS_AS(rk4_solve(f, Eigen::Vector2d::Zero(), 0.0, 1.0, 0.0), InvalidArgument);
  const Trajectory zero = rk4_solve([](double, const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); },
                                    Eigen::Vector2d(3.0, -1.0), 0.0, 1.0, 0.1);
  CHECK(zero.at(0.73) == Eigen::Vector2d(3.0, -1.0));
  const auto c = props::rk4_order();
  INFO(c.detail);
  CHECK(c.ok);
}

TEST_CASE("rk4 reports a blow-up") {
  const VectorField f = [](double, const Eigen::Vector2d& y) -> Eigen::Vector2d { return y.cwiseProduct(y) * 1e300; };
  CHECK_THROWS_AS(rk4_solve(f, Eigen::Vector2d(1.0, 1.0), 0.0, 1.0, 0.1), SolverError);
}

TEST_CASE("biology model") {
  BiologyModel m;
  const Dataset d = at_times(2, {0.0, 0.5, 1.0, 2.37, 5.0});
  SECTION("no input gives the zero trajectory") {
    CHECK(m.evaluate_all((Vector(4) << 1.0, 1.0, 1.0, 0.0).finished(), d).norm() == 0.0);
  }
  SECTION("starts at zero and agrees with per-column solves") {
    const Vector th = (Vector(4) << 1.0, 1.0, 1.0, 2.0).finished();
    const Matrix all = m.evaluate_all(th, d);
    CHECK(all.col(0).norm() == 0.0);
    for (Index r = 0; r < d.R(); ++r) CHECK((all.col(r) - m.evaluate(th, d, r)).norm() < 1e-10);
    CHECK((all.array() > 0.0).bottomRightCorner(2, 4).all());
  }
  SECTION("input function is continuous at tau = 1") {
    CHECK(biology_input(1.0) == 1.5);
    CHECK(biology_input(1.0 + 1e-12) == Approx(1.5));
    CHECK(biology_input(0.0) == 0.5);
  }
  SECTION("divergent parameters give non-finite predictions, not an exception") {
    const Vector wild = (Vector(4) << -1e6, 1e6, -1e6, 1.0).finished();
    CHECK_FALSE(m.evaluate_all(wild, d).allFinite());
  }
}

TEST_CASE("biology trajectory agrees with an adaptive reference solver") {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const Vector th = (Vector(4) << 1.0, 1.0, 1.0, 2.0).finished();
  auto rhs = [&](const State& y, State& dy, double t) {
    dy[0] = -(th[2] + th[0]) * y[0] + th[1] * y[1] + th[3] * biology_input(t);
    dy[1] = th[0] * y[0] - th[1] * y[1];
  };
  BiologyModel m;
  const Dataset d = at_times(2, {0.5, 1.0, 2.5, 5.0});
  const Matrix ours = m.evaluate_all(th, d);
  for (Index r = 0; r < d.R(); ++r) {
    State y{0.0, 0.0};
    // integrate in two legs so the kink of the input at tau = 1 is a step boundary
    const double tau = d.tau(r);
    auto stepper = ode::make_controlled(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
    ode::integrate_adaptive(stepper, rhs, y, 0.0, std::min(tau, 1.0), 1e-3);
    if (tau > 1.0) ode::integrate_adaptive(stepper, rhs, y, 1.0, tau, 1e-3);
    CHECK(std::abs(ours(0, r) - y[0]) < 1e-6);
    CHECK(std::abs(ours(1, r) - y[1]) < 1e-6);
  }
}

TEST_CASE("graph model oracles") {
  const Vector zero = Vector::Zero(4);
  CHECK(GraphModel::f(zero, 0.0)[4] == Approx(-std::exp(1.0)));
  const Vector th = (Vector(4) << 0.5, 2.0, 5.0, 3.0).finished();
  const Vector f0 = GraphModel::f(th, 0.0);
  CHECK(f0[0] == Approx(1.25));
  CHECK(f0[9] == Approx(5.0 * th[0] + 10.0 * th[2]));
  CHECK_THROWS_AS(GraphModel::f((Vector(4) << 0.0, 0.0, -1.0, 0.0).finished(), 1.0), ModelError);

  const ExperimentSpec spec = graph_experiment(Gaussian{}, 40);
  const auto bound = make_model(spec);
  GraphModel unbound;
  const Dataset d(Matrix::Zero(10, 40), spec.aux);
  const Matrix a = bound->evaluate_all(th, d), b = unbound.evaluate_all(th, d);
  CHECK((a - b).norm() < 1e-12 * a.norm());
  for (Index r = 0; r < d.R(); r += 7) CHECK((a.col(r) - GraphModel::f(th, d.tau(r))).norm() < 1e-12 * a.norm());
}

TEST_CASE("graph precision matrix") {
  const Matrix p = graph_precision();
  CHECK((p - p.transpose()).norm() == 0.0);
  for (Index i = 0; i < 10; ++i) CHECK(p(i, i) > p.row(i).cwiseAbs().sum() - p(i, i));
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(p).eigenvalues().minCoeff() > 0.0);
  CHECK(p == seeded_precision(10, kGraphPrecisionSeed));
  const Eigen::MatrixXi adj = threshold_adjacency(p, 0.3);
  CHECK(adj.diagonal().minCoeff() == 1);
  CHECK(adj.sum() > 10);  // at least one edge
}

TEST_CASE("adjacency thresholding") {
  Matrix p(2, 2);
  p << 1.0, 0.3, -0.29, -1.0;
  Eigen::MatrixXi want(2, 2);
  want << 1, 1, 0, 1;
  CHECK(threshold_adjacency(p, 0.3) == want);
  CHECK(threshold_adjacency(Matrix::Zero(3, 3), 0.0) == Eigen::MatrixXi::Ones(3, 3));
  CHECK_THROWS_AS(threshold_adjacency(Matrix::Zero(2, 3), 0.3), DimensionMismatch);
}

TEST_CASE("experiment registry") {
  CHECK(model_id_from_string("biology") == ModelId::biology_ode);
  CHECK(to_string(model_id_from_string("graph")) == "graph");
  CHECK_THROWS_AS(model_id_from_string("nope"), InvalidConfig);
  for (const ModelId id : {ModelId::localization, ModelId::multioutput, ModelId::biology_ode, ModelId::graph}) {
    const ExperimentSpec s = make_experiment(id);
    const auto m = make_model(s);
    CHECK(m->param_dim() == s.M());
    CHECK(m->output_dim() == s.K());
    CHECK(Eigen::LLT<Matrix>(s.sigma_true).info() == Eigen::Success);
    CHECK(make_experiment(id, Gaussian{}, 17).R == 17);
    CHECK(std::isfinite(s.prior(s.theta_true)));
  }
}

TEST_CASE("synthetic data") {
  const ExperimentSpec spec = multioutput_experiment(Gaussian{}, 30);
  const auto model = make_model(spec);
  SECTION("deterministic per seed") {
    RngStream a(51), b(51), c(52);
    const Dataset da = generate_synthetic(spec, *model, a);
    CHECK(da.y() == generate_synthetic(spec, *model, b).y());
    CHECK(da.y() != generate_synthetic(spec, *model, c).y());
  }
  SECTION("noiseless limit") {
    ExperimentSpec quiet = spec;
    quiet.sigma_true = 1e-24 * Matrix::Identity(4, 4);
    RngStream rng(53);
    const Dataset d = generate_synthetic(quiet, *model, rng);
    CHECK(residuals(*model, spec.theta_true, d).cwiseAbs().maxCoeff() < 1e-10);
  }
  SECTION("noise covariance converges") {
    ExperimentSpec big = multioutput_experiment(Gaussian{}, 100000);
    RngStream rng(54);
    const Dataset d = generate_synthetic(big, *model, rng);
    const Matrix c = ml_covariance(residuals(*model, big.theta_true, d));
    CHECK((c - big.sigma_true).cwiseAbs().maxCoeff() < 0.02 * big.sigma_true.cwiseAbs().maxCoeff());
  }
  SECTION("student-t noise is heavy tailed") {
    const ExperimentSpec t = localization_experiment(StudentT{10.0}, 100000);
    const auto lm = make_model(t);
    RngStream rng(55);
    const Dataset d = generate_synthetic(t, *lm, rng);
    const Matrix e = residuals(*lm, t.theta_true, d);
    const Eigen::ArrayXd x = e.row(0).transpose().array();
    const double v = x.square().mean();
    const double kurt = x.pow(4).mean() / (v * v) - 3.0;
    // excess kurtosis of a t(10) marginal is 1; its scale matrix has variance factor 10/8
    CHECK(kurt > 0.6);
    CHECK(v == Approx(1.25).epsilon(0.03));
  }
  SECTION("non-SPD Sigma_true is rejected") {
    ExperimentSpec bad = spec;
    bad.sigma_true = -Matrix::Identity(4, 4);
    RngStream rng(56);
    CHECK_THROWS_AS(generate_synthetic(bad, *model, rng), NotPositiveDefinite);
  }
}
