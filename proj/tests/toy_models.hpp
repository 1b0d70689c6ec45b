#ifndef BAYES_INVERT_TESTS_TOY_MODELS_HPP
#define BAYES_INVERT_TESTS_TOY_MODELS_HPP

#include <bayes_invert/core.hpp>

namespace binv::toy {

// f(theta) = theta for every column, so K = M and the conditional posterior
// under a flat prior is N(mean(Y), Sigma / R).
class IdentityModel final : public ForwardModel {
 public:
  explicit IdentityModel(Index m) : m_(m) {}
  Index param_dim() const override { return m_; }
  Index output_dim() const override { return m_; }
  std::string name() const override { return "identity"; }
  Vector evaluate(const Vector& theta, const Dataset&, Index) const override { return theta; }
  Matrix evaluate_all(const Vector& theta, const Dataset& data) const override {
    return theta.replicate(1, data.R());
  }

 private:
  Index m_;
};

// Gaussian log-prior N(0, s^2 I).
inline LogPrior gaussian_prior(Index m, double s) {
  return LogPrior::custom([m, s](const Vector& th) {
    return -0.5 * th.squaredNorm() / (s * s) - static_cast<double>(m) * (std::log(s) + 0.5 * kLog2Pi);
  });
}

}  // namespace binv::toy

#endif  // BAYES_INVERT_TESTS_TOY_MODELS_HPP
