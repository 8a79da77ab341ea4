#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <mutex>
#include <numbers>
#include <optional>
#include <tuple>

#include "conditional/spectral.hpp"
#include "sewma/conditional.hpp"
#include "sewma/errors.hpp"
#include "sewma/numerics.hpp"
#include "sewma/simd.hpp"

namespace sewma {
namespace {

// (2 - delta_{s0}) / N * T_s(x_j) on the standard nodes x_j = cos((2j + 1) pi / 2N);
// maps nodal values of one piece to its Chebyshev coefficients.
std::vector<double> cardinal_matrix(int n) {
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (int s = 0; s < n; ++s) {
    const double scale = (s == 0 ? 1.0 : 2.0) / n;
    for (int j = 0; j < n; ++j) c[s * n + j] = scale * std::cos(s * (2.0 * j + 1.0) * std::numbers::pi / (2.0 * n));
  }
  return c;
}

void chebyshev_values(double t, std::span<double> out) {
  out[0] = 1.0;
  if (out.size() > 1) out[1] = t;
  for (std::size_t s = 2; s < out.size(); ++s) out[s] = 2.0 * t * out[s - 1] - out[s - 2];
}

}  // namespace

CollocationBasis::CollocationBasis(const ChartConfig& config, double sigma2, const Limits& limits, int basis_size,
                                   int quad_factor)
    : config_(config), limits_(limits), sigma2_(sigma2), n_(basis_size), quad_factor_(quad_factor) {
  config.validate();
  limits.validate(config.sided);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("variance must be positive");
  if (basis_size < 10) throw DomainError("collocation basis needs N >= 10");
  if (quad_factor < 1) throw DomainError("quadrature factor must be positive");

  const double lam = config.lambda;
  const double df = config.df();
  const double scale = df / (sigma2 * lam);
  const double lo = limits.lower_or_zero();
  const double hi = limits.upper;

  absorbed_ = hi <= (1.0 - lam) * config.z0;
  start_p1_ = absorbed_ ? 0.0 : sf_first_step(config.z0, config, sigma2, limits);

  const double split = lam < 1.0 ? lo / (1.0 - lam) : hi;
  if (config.sided == Sided::TwoSided && split > lo && split < hi) {
    pieces_ = {{lo, split}, {split, hi}};
  } else {
    pieces_ = {{lo, hi}};
  }

  for (const auto& piece : pieces_) {
    const auto z = numerics::chebyshev_nodes(n_, piece.lo, piece.hi);
    nodes_.insert(nodes_.end(), z.begin(), z.end());
  }
  p1_.resize(nodes_.size());
  exit_.resize(nodes_.size());
  for (std::size_t r = 0; r < nodes_.size(); ++r) {
    p1_[r] = sf_first_step(nodes_[r], config, sigma2, limits);
    exit_[r] = exit_first_step(nodes_[r], config, sigma2, limits);
  }

  const auto cardinal = cardinal_matrix(n_);
  std::vector<double> cardinal_t(cardinal.size());
  for (int s = 0; s < n_; ++s)
    for (int j = 0; j < n_; ++j) cardinal_t[j * n_ + s] = cardinal[s * n_ + j];

  const auto rule = numerics::gauss_legendre_unit(quad_factor * n_);
  const std::size_t cols = nodes_.size();
  kernel_.assign((cols + 1) * cols, 0.0);
  std::vector<double> moments(n_);
  std::vector<double> tvals(n_);

  for (std::size_t row = 0; row <= cols; ++row) {
    const double z = row < cols ? nodes_[row] : config.z0;
    const double edge = (1.0 - lam) * z;
    double* krow = kernel_.data() + row * cols;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
      const auto [plo, phi] = pieces_[k];
      const double a = std::max(plo, edge);
      if (a >= phi) continue;
      // y = edge + u^2 removes the support-edge behaviour of the chi-square density.
      const double ua = std::sqrt(a - edge);
      const double ub = std::sqrt(phi - edge);
      const double umid = 0.5 * (ua + ub);
      const double uhalf = 0.5 * (ub - ua);
      std::fill(moments.begin(), moments.end(), 0.0);
      for (std::size_t q = 0; q < rule->nodes.size(); ++q) {
        const double u = umid + uhalf * rule->nodes[q];
        const double y = edge + u * u;
        const double weight = uhalf * rule->weights[q] * 2.0 * u * numerics::chi2_pdf(scale * u * u, df) * scale;
        if (weight == 0.0) continue;
        const double t = std::clamp((2.0 * y - (plo + phi)) / (phi - plo), -1.0, 1.0);
        chebyshev_values(t, tvals);
        simd::axpy(weight, tvals, moments);
      }
      // Nodal form: integrals of the cardinal functions of piece k.
      simd::matvec(cardinal_t, n_, n_, moments, std::span<double>(krow + k * n_, n_));
    }
  }
}

std::shared_ptr<const CollocationBasis> CollocationBasis::cached(const ChartConfig& config, double sigma2,
                                                                 const Limits& limits, int basis_size,
                                                                 int quad_factor) {
  using Key = std::tuple<double, int, int, double, double, double, double, int, int>;
  constexpr std::size_t capacity = 256;
  static std::mutex mutex;
  static std::list<std::pair<Key, std::shared_ptr<const CollocationBasis>>> entries;

  const Key key{config.lambda, config.n, static_cast<int>(config.sided), config.z0, limits.lower.value_or(-1.0),
                limits.upper, sigma2, basis_size, quad_factor};
  {
    std::lock_guard lock(mutex);
    for (auto it = entries.begin(); it != entries.end(); ++it) {
      if (it->first == key) {
        entries.splice(entries.begin(), entries, it);
        return it->second;
      }
    }
  }
  auto basis = std::make_shared<const CollocationBasis>(config, sigma2, limits, basis_size, quad_factor);
  std::lock_guard lock(mutex);
  entries.emplace_front(key, basis);
  if (entries.size() > capacity) entries.pop_back();
  return basis;
}

std::vector<double> CollocationBasis::coefficients(std::span<const double> nodal) const {
  if (nodal.size() != nodes_.size()) throw DomainError("nodal vector has the wrong size");
  const auto cardinal = cardinal_matrix(n_);
  std::vector<double> g(nodal.size());
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    simd::matvec(cardinal, n_, n_, nodal.subspan(k * n_, n_), std::span<double>(g.data() + k * n_, n_));
  }
  return g;
}

double CollocationBasis::interpolate(std::span<const double> nodal, double z) const {
  const double lo = pieces_.front().lo;
  const double hi = pieces_.back().hi;
  const double slack = 1e-12 * (hi - lo);
  if (z < lo - slack || z > hi + slack) throw DomainError("interpolate: z outside the continuation region");
  std::size_t k = 0;
  while (k + 1 < pieces_.size() && z > pieces_[k].hi) ++k;
  const auto g = coefficients(nodal);
  std::vector<double> tvals(n_);
  const auto [plo, phi] = pieces_[k];
  chebyshev_values(std::clamp((2.0 * z - (plo + phi)) / (phi - plo), -1.0, 1.0), tvals);
  return simd::dot(std::span<const double>(g.data() + k * n_, n_), tvals);
}

void CollocationBasis::step(std::span<const double> in, std::span<double> out) const noexcept {
  simd::matvec(kernel_, nodes_.size(), nodes_.size(), in, out);
}

double CollocationBasis::at_start(std::span<const double> nodal) const noexcept {
  const std::size_t cols = nodes_.size();
  return simd::dot(std::span<const double>(kernel_.data() + cols * cols, cols), nodal);
}

double CollocationBasis::arl_linear_system() const {
  if (absorbed_) return 1.0;
  const std::size_t cols = nodes_.size();
  bool ok = false;
  const double direct = detail::arl_direct(std::span<const double>(kernel_.data(), cols * cols), cols,
                                           std::span<const double>(kernel_.data() + cols * cols, cols), ok);
  if (ok && direct < detail::kDirectArlLimit) return direct;
  const auto& near = near_singular();
  if (!near.resolved || !std::isfinite(near.arl) || near.arl < 1.0) {
    throw DivergenceError("collocation ARL not finite to extended resolution", sigma2_);
  }
  return near.arl;
}

// The Perron decay is accepted only when it is above its rounding level and
// a basis 20 polynomials larger agrees within 2%; double precision is tried
// first, then the extended-precision rebuild with growing basis sizes.
const CollocationBasis::NearSingular& CollocationBasis::near_singular() const {
  std::call_once(near_once_, [this] {
    constexpr double agreement = 0.02;
    constexpr int step = 20;
    const auto agree = [](double a, double b) { return std::fabs(a - b) <= agreement * std::fabs(b); };

    const std::size_t cols = nodes_.size();
    const std::span<const double> square(kernel_.data(), cols * cols);
    const auto here = detail::perron(square, cols, exit_);
    if (here.resolved()) {
      const CollocationBasis finer(config_, sigma2_, limits_, n_ + step, quad_factor_);
      const std::size_t fc = finer.size();
      const auto there = detail::perron(std::span<const double>(finer.kernel_.data(), fc * fc), fc, finer.exit_);
      if (there.resolved() && agree(here.decay, there.decay)) {
        near_ = {detail::arl_deflated(square, cols, std::span<const double>(kernel_.data() + cols * cols, cols),
                                      exit_),
                 here.decay, true};
        return;
      }
    }

    std::vector<detail::Interval> pieces;
    for (const auto& p : pieces_) pieces.push_back({p.lo, p.hi});
    std::optional<detail::ExtendedResult> previous;
    for (int size = n_; size <= n_ + 3 * step; size += step) {
      auto result = detail::collocation_extended(config_, sigma2_, limits_, pieces, size, quad_factor_);
      if (!result.perron.resolved()) {
        previous.reset();
        continue;
      }
      if (previous && agree(previous->perron.decay, result.perron.decay)) {
        near_ = {result.arl, result.perron.decay, true};
        return;
      }
      previous = result;
    }
  });
  return near_;
}

double CollocationBasis::tail_decay() const {
  if (absorbed_) return 1.0;
  const auto& near = near_singular();
  if (!near.resolved) throw DivergenceError("Perron decay below extended resolution", sigma2_);
  return near.decay;
}

}  // namespace sewma
