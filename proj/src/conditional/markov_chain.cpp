#include <Eigen/Dense>
#include <cmath>

#include "conditional/spectral.hpp"
#include "sewma/conditional.hpp"
#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"
#include "sewma/simd.hpp"

namespace sewma {

MarkovChainModel::MarkovChainModel(const ChartConfig& config, double sigma2, const Limits& limits, int states)
    : sigma2_(sigma2), states_(static_cast<std::size_t>(states)) {
  config.validate();
  limits.validate(config.sided);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("variance must be positive");
  if (states < 10) throw DomainError("Markov chain needs at least 10 states");

  const double lam = config.lambda;
  const double df = config.df();
  const double scale = df / (sigma2 * lam);
  const double lo = limits.lower_or_zero();
  const double hi = limits.upper;
  const double width = (hi - lo) / static_cast<double>(states_);

  absorbed_ = hi <= (1.0 - lam) * config.z0;
  start_p1_ = absorbed_ ? 0.0 : sf_first_step(config.z0, config, sigma2, limits);

  transition_.assign((states_ + 1) * states_, 0.0);
  p1_.resize(states_);
  exit_.resize(states_);
  std::vector<double> cdf(states_ + 1);
  for (std::size_t row = 0; row <= states_; ++row) {
    const double z = row < states_ ? lo + (static_cast<double>(row) + 0.5) * width : config.z0;
    const double edge = (1.0 - lam) * z;
    for (std::size_t j = 0; j <= states_; ++j) {
      const double boundary = lo + static_cast<double>(j) * width;
      cdf[j] = boundary > edge ? numerics::chi2_cdf(scale * (boundary - edge), df) : 0.0;
    }
    double* trow = transition_.data() + row * states_;
    for (std::size_t j = 0; j < states_; ++j) trow[j] = cdf[j + 1] - cdf[j];
    if (row < states_) {
      p1_[row] = cdf[states_] - cdf[0];
      exit_[row] = exit_first_step(z, config, sigma2, limits);
    }
  }
}

void MarkovChainModel::step(std::span<const double> in, std::span<double> out) const noexcept {
  simd::matvec(transition_, states_, states_, in, out);
}

double MarkovChainModel::at_start(std::span<const double> nodal) const noexcept {
  return simd::dot(std::span<const double>(transition_.data() + states_ * states_, states_), nodal);
}

double MarkovChainModel::arl_linear_system() const {
  if (absorbed_) return 1.0;
  const std::span<const double> square(transition_.data(), states_ * states_);
  const std::span<const double> start(transition_.data() + states_ * states_, states_);
  bool ok = false;
  const double direct = detail::arl_direct(square, states_, start, ok);
  if (ok && direct < detail::kDirectArlLimit) return direct;
  const double arl = detail::arl_deflated(square, states_, start, exit_);
  if (!std::isfinite(arl) || arl < 1.0 - 1e-9) {
    throw DivergenceError("Markov chain ARL not finite to double resolution", sigma2_);
  }
  return arl;
}

double MarkovChainModel::tail_decay() const {
  if (absorbed_) return 1.0;
  const auto p = detail::perron(std::span<const double>(transition_.data(), states_ * states_), states_, exit_);
  if (!p.resolved()) throw DivergenceError("Perron decay below double resolution", sigma2_);
  return p.decay;
}

}  // namespace sewma
