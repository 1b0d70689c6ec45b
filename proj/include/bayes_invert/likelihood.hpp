#ifndef BAYES_INVERT_LIKELIHOOD_HPP
#define BAYES_INVERT_LIKELIHOOD_HPP

#include "core.hpp"

#include <cmath>
#include <functional>
#include <variant>

namespace binv {

struct Gaussian {};

struct StudentT {
  double dof = 10.0;
};

using NoiseFamily = std::variant<Gaussian, StudentT>;

inline bool is_gaussian(const NoiseFamily& f) { return std::holds_alternative<Gaussian>(f); }

// -(RK/2) ln 2pi - (R/2) ln|S| - 1/2 sum_r e_r' S^-1 e_r
inline double gaussian_loglik(const Matrix& res, const SpdMatrix& sigma) {
  detail::require_dims(res.rows() == sigma.dim(), "gaussian_loglik: K mismatch");
  if (!res.allFinite()) return kNegInf;
  const double r = static_cast<double>(res.cols());
  const double k = static_cast<double>(res.rows());
  const double quad = sigma.whiten(res).squaredNorm();
  return -0.5 * r * k * kLog2Pi - 0.5 * r * sigma.log_det() - 0.5 * quad;
}

// Same value from the scatter matrix S = sum_r e_r e_r'.
inline double gaussian_loglik_scatter(const Matrix& scatter, Index n_cols, const SpdMatrix& sigma) {
  detail::require_dims(scatter.rows() == sigma.dim() && scatter.cols() == sigma.dim(),
                       "gaussian_loglik_scatter: K mismatch");
  if (!scatter.allFinite()) return kNegInf;
  const double r = static_cast<double>(n_cols);
  const double k = static_cast<double>(sigma.dim());
  const Matrix w = sigma.whiten(sigma.whiten(scatter).transpose());
  return -0.5 * r * k * kLog2Pi - 0.5 * r * sigma.log_det() - 0.5 * w.trace();
}

inline double student_t_loglik(const Matrix& res, const SpdMatrix& sigma, double dof) {
  detail::require_dims(res.rows() == sigma.dim(), "student_t_loglik: K mismatch");
  if (!(dof > 0.0)) throw InvalidArgument("student-t dof must be positive");
  if (!res.allFinite()) return kNegInf;
  const double k = static_cast<double>(res.rows());
  const double per_col = std::lgamma(0.5 * (dof + k)) - std::lgamma(0.5 * dof) -
                         0.5 * k * std::log(dof * M_PI) - 0.5 * sigma.log_det();
  const Matrix z = sigma.whiten(res);
  double acc = 0.0;
  for (Index r = 0; r < res.cols(); ++r) {
    const double s = z.col(r).squaredNorm();
    acc += per_col - 0.5 * (dof + k) * std::log1p(s / dof);
  }
  return acc;
}

inline double loglik(const NoiseFamily& family, const Matrix& res, const SpdMatrix& sigma) {
  if (const auto* t = std::get_if<StudentT>(&family)) return student_t_loglik(res, sigma, t->dof);
  return gaussian_loglik(res, sigma);
}

// (1/R) sum_r e_r e_r'
inline Matrix ml_covariance(const Matrix& res) {
  if (res.cols() < 1) throw InvalidArgument("ml_covariance needs R >= 1");
  Matrix s = res * res.transpose() / static_cast<double>(res.cols());
  return 0.5 * (s + s.transpose());
}

struct FixedPointOptions {
  double tol = 1e-8;
  int max_iter = 500;
  JitterPolicy jitter = JitterPolicy::escalate;
};

// Sigma_k = (1/R) sum_r eta(e_r' Sigma_{k-1}^-1 e_r) e_r e_r'
inline SpdMatrix fixedpoint_scale(const Matrix& res, const std::function<double(double)>& eta,
                                  const SpdMatrix& init, const FixedPointOptions& opt = {}) {
  detail::require_dims(res.rows() == init.dim(), "fixedpoint_scale: K mismatch");
  if (res.cols() < 1) throw InvalidArgument("fixedpoint_scale needs R >= 1");
  const double n = static_cast<double>(res.cols());
  Vector w(res.cols());
  Matrix prev = init.matrix();
  SpdMatrix cur = init;
  for (int it = 0; it < opt.max_iter; ++it) {
    const Matrix z = cur.whiten(res);
    for (Index r = 0; r < res.cols(); ++r) w[r] = eta(z.col(r).squaredNorm());
    const Matrix weighted = res * w.asDiagonal();
    Matrix next = weighted * res.transpose() / n;
    next = 0.5 * (next + next.transpose());
    const double denom = prev.norm();
    const double change = (next - prev).norm() / (denom > 0.0 ? denom : 1.0);
    cur = SpdMatrix::from_matrix(next, opt.jitter);
    if (change < opt.tol) return cur;
    prev = std::move(next);
  }
  throw NoConvergence("fixedpoint_scale did not converge", prev);
}

inline std::function<double(double)> student_t_eta(double dof, Index k) {
  const double kk = static_cast<double>(k);
  return [dof, kk](double s) { return (dof + kk) / (dof + s); };
}

// ML estimate of Sigma at fixed residuals for the given family (Gaussian:
// closed form; Student-t: fixed-point scale started from the closed form).
inline Matrix sigma_estimate(const NoiseFamily& family, const Matrix& res,
                             const FixedPointOptions& opt = {}) {
  Matrix ml = ml_covariance(res);
  if (const auto* t = std::get_if<StudentT>(&family)) {
    const SpdMatrix init = SpdMatrix::from_matrix(ml, JitterPolicy::escalate);
    return fixedpoint_scale(res, student_t_eta(t->dof, res.rows()), init, opt).matrix();
  }
  return ml;
}

inline double log_posterior_cond(const ForwardModel& model, const Vector& theta, const Dataset& data,
                                 const SpdMatrix& sigma, const LogPrior& prior,
                                 const NoiseFamily& family) {
  const double lp = prior(theta);
  if (lp == kNegInf) return kNegInf;
  return loglik(family, residuals(model, theta, data), sigma) + lp;
}

}  // namespace binv

#endif  // BAYES_INVERT_LIKELIHOOD_HPP
