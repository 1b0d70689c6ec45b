#ifndef BAYES_INVERT_CORE_HPP
#define BAYES_INVERT_CORE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace binv {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// ---------------------------------------------------------------------------
// errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotSymmetric : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

// A forward-model failure, tagged with the observation column that failed.
class ModelError : public Error {
 public:
  ModelError(const std::string& what, Index column)
      : Error(what + " (column " + std::to_string(column) + ")"), column_(column) {}
  Index column() const { return column_; }

 private:
  Index column_;
};

// Raised by iterative solvers; carries the last iterate.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, Matrix last)
      : Error(what), last_(std::move(last)) {}
  const Matrix& last_iterate() const { return last_; }

 private:
  Matrix last_;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionMismatch(what);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dataset

class Dataset {
 public:
  Dataset() = default;

  // aux: d x R, one column per observation (d = 1 for scalar time stamps).
  explicit Dataset(Matrix y, std::optional<Matrix> aux = std::nullopt,
                   std::vector<std::string> labels = {})
      : y_(std::move(y)), aux_(std::move(aux)), labels_(std::move(labels)) {
    if (y_.rows() < 1 || y_.cols() < 1) throw InvalidArgument("dataset needs K >= 1 and R >= 1");
    if (!y_.allFinite()) throw InvalidArgument("dataset contains non-finite observations");
    if (aux_ && aux_->cols() != y_.cols())
      throw DimensionMismatch("aux inputs must have one column per observation");
    if (!labels_.empty() && static_cast<Index>(labels_.size()) != y_.rows())
      throw DimensionMismatch("labels must have length K");
  }

  Index K() const { return y_.rows(); }
  Index R() const { return y_.cols(); }
  const Matrix& y() const { return y_; }
  bool has_aux() const { return aux_.has_value(); }
  const Matrix& aux() const {
    if (!aux_) throw InvalidArgument("dataset has no aux inputs");
    return *aux_;
  }
  double tau(Index r) const { return aux()(0, r); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Column subset, aux inputs carried along.
  Dataset subset(const std::vector<Index>& cols) const {
    Matrix ys(K(), static_cast<Index>(cols.size()));
    std::optional<Matrix> as;
    if (aux_) as = Matrix(aux_->rows(), static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      ys.col(static_cast<Index>(i)) = y_.col(cols[i]);
      if (as) as->col(static_cast<Index>(i)) = aux_->col(cols[i]);
    }
    return Dataset(std::move(ys), std::move(as), labels_);
  }

 private:
  Matrix y_;
  std::optional<Matrix> aux_;
  std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// SpdMatrix

enum class JitterPolicy { reject, escalate };

class SpdMatrix {
 public:
  SpdMatrix() = default;

  static SpdMatrix from_matrix(const Matrix& a, JitterPolicy policy = JitterPolicy::reject) {
    if (a.rows() != a.cols() || a.rows() < 1) throw DimensionMismatch("SPD matrix must be square");
    if (!a.allFinite()) throw NotPositiveDefinite("matrix has non-finite entries");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw NotSymmetric("matrix is not symmetric");
    Matrix sym = 0.5 * (a + a.transpose());
    SpdMatrix out;
    if (out.factor(sym)) return out;
    if (policy == JitterPolicy::reject) throw NotPositiveDefinite("matrix is not positive definite");
    const Matrix eye = Matrix::Identity(a.rows(), a.cols());
    for (double eps = 1e-12; eps <= 1e-6; eps *= 2.0) {
      if (out.factor(sym + eps * eye)) {
        out.jitter_ = eps;
        return out;
      }
    }
    throw NotPositiveDefinite("matrix is not positive definite after jitter escalation");
  }

  static SpdMatrix identity(Index k) { return from_matrix(Matrix::Identity(k, k)); }

  Index dim() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }
  const Matrix& lower() const { return l_; }
  double log_det() const { return log_det_; }
  double jitter() const { return jitter_; }

  Vector solve(const Vector& b) const {
    detail::require_dims(b.size() == dim(), "solve: size mismatch");
    return llt_.solve(b);
  }
  Matrix solve(const Matrix& b) const {
    detail::require_dims(b.rows() == dim(), "solve: size mismatch");
    return llt_.solve(b);
  }
  Matrix inverse() const { return solve(Matrix(Matrix::Identity(dim(), dim()))); }

  // L^{-1} x, so that ||L^{-1} x||^2 = x^T A^{-1} x.
  Matrix whiten(const Matrix& x) const {
    detail::require_dims(x.rows() == dim(), "whiten: size mismatch");
    return l_.triangularView<Eigen::Lower>().solve(x);
  }
  double quad_form(const Vector& x) const { return whiten(x).squaredNorm(); }

  // tr(A^{-1} S)
  double trace_solve(const Matrix& s) const { return solve(s).trace(); }

 private:
  bool factor(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return false;
    Matrix l = llt.matrixL();
    const Vector d = l.diagonal();
    if (!(d.array() > 0.0).all() || !d.allFinite()) return false;
    a_ = m;
    l_ = std::move(l);
    llt_ = std::move(llt);
    log_det_ = 2.0 * d.array().log().sum();
    return true;
  }
  Matrix a_;
  Matrix l_;
  Eigen::LLT<Matrix> llt_;
  double log_det_ = 0.0;
  double jitter_ = 0.0;
};

// ---------------------------------------------------------------------------
// ForwardModel

class ForwardModel {
 public:
  virtual ~ForwardModel() = default;
  ForwardModel() = default;
  ForwardModel(const ForwardModel&) = delete;
  ForwardModel& operator=(const ForwardModel&) = delete;

  virtual Index param_dim() const = 0;
  virtual Index output_dim() const = 0;
  virtual std::string name() const = 0;

  // f_r(theta) for one observation column.
  virtual Vector evaluate(const Vector& theta, const Dataset& data, Index r) const = 0;

  // All columns at once; override when a shared computation (e.g. an ODE solve) is cheaper.
  virtual Matrix evaluate_all(const Vector& theta, const Dataset& data) const {
    Matrix out(output_dim(), data.R());
    for (Index r = 0; r < data.R(); ++r) out.col(r) = evaluate(theta, data, r);
    return out;
  }

  // Counted entry point used by every sampler. Overflowing outputs are passed
  // through; the likelihoods map non-finite residuals to -inf.
  Matrix predict(const Vector& theta, const Dataset& data) const {
    detail::require_dims(theta.size() == param_dim(), "theta has wrong dimension");
    detail::require_dims(data.K() == output_dim(), "dataset K does not match model");
    evaluations_.fetch_add(1, std::memory_order_relaxed);
    return evaluate_all(theta, data);
  }

  std::uint64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }
  void reset_evaluations() const { evaluations_.store(0, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

// Y - F(theta), K x R.
inline Matrix residuals(const ForwardModel& model, const Vector& theta, const Dataset& data) {
  if (!theta.allFinite()) throw InvalidArgument("theta must be finite");
  return data.y() - model.predict(theta, data);
}

// ---------------------------------------------------------------------------
// LogPrior

class LogPrior {
 public:
  using Fn = std::function<double(const Vector&)>;

  LogPrior() : LogPrior(flat()) {}

  static LogPrior flat() {
    LogPrior p(Fn([](const Vector&) { return 0.0; }));
    p.kind_ = "flat";
    return p;
  }

  // Normalized uniform density on [lo, hi].
  static LogPrior box(const Vector& lo, const Vector& hi) {
    detail::require_dims(lo.size() == hi.size(), "box bounds size mismatch");
    if (!((hi.array() > lo.array()).all())) throw InvalidArgument("box bounds must satisfy lo < hi");
    const double log_vol = (hi - lo).array().log().sum();
    LogPrior p(Fn([lo, hi, log_vol](const Vector& th) {
      if (th.size() != lo.size()) throw DimensionMismatch("theta/prior dimension mismatch");
      for (Index i = 0; i < th.size(); ++i)
        if (!(th[i] >= lo[i] && th[i] <= hi[i])) return kNegInf;
      return -log_vol;
    }));
    p.kind_ = "box";
    p.lo_ = lo;
    p.hi_ = hi;
    return p;
  }

  static LogPrior custom(Fn fn) {
    LogPrior p(std::move(fn));
    p.kind_ = "custom";
    return p;
  }

  double operator()(const Vector& theta) const { return fn_(theta); }
  const std::string& kind() const { return kind_; }
  const Vector& lower() const { return lo_; }
  const Vector& upper() const { return hi_; }

 private:
  explicit LogPrior(Fn fn) : fn_(std::move(fn)) {}
  Fn fn_;
  std::string kind_;
  Vector lo_, hi_;
};

// ---------------------------------------------------------------------------
// RngStream

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Seeded stream with order-independent children: child(i) depends only on
// the seed path, never on how many draws the parent has made.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed = 0) : key_(detail::splitmix64(seed)) { reseed(); }

  RngStream child(std::uint64_t index) const {
    RngStream c;
    c.key_ = detail::splitmix64(key_ ^ detail::splitmix64(index + 0x632be59bd9b4e019ULL));
    c.reseed();
    return c;
  }
  RngStream child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }
  RngStream child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    return child(a).child(b).child(c);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  Vector normal_vector(Index n) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  double chi_squared(double dof) { return std::chi_squared_distribution<double>(dof)(engine_); }
  Index uniform_index(Index n) {
    return std::uniform_int_distribution<Index>(0, n - 1)(engine_);
  }
  std::uint64_t key() const { return key_; }

 private:
  void reseed() {
    std::seed_seq seq{static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)};
    engine_.seed(seq);
    normal_.reset();
  }

  std::uint64_t key_ = 0;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// ---------------------------------------------------------------------------
// small numerics shared across modules

inline double log_sum_exp(const double* x, std::size_t n) {
  double m = kNegInf;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  if (m == kNegInf) return kNegInf;
  if (m == std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - m);
  return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& x) { return log_sum_exp(x.data(), x.size()); }

// exp(x - logsumexp(x)); throws when every entry is -inf.
inline std::vector<double> normalize_log_weights(const std::vector<double>& logw) {
  const double z = log_sum_exp(logw);
  if (z == kNegInf) throw DegenerateWeights("all log-weights are -inf");
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) w[i] = std::exp(logw[i] - z);
  return w;
}

// Multivariate normal log-density with SPD covariance.
inline double mvn_logpdf(const Vector& x, const Vector& mean, const SpdMatrix& cov) {
  const double q = cov.quad_form(x - mean);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + cov.log_det() + q);
}

inline Vector mvn_sample(const Vector& mean, const SpdMatrix& cov, RngStream& rng) {
  return mean + cov.lower() * rng.normal_vector(mean.size());
}

}  // namespace binv

#endif  // BAYES_INVERT_CORE_HPP
