#pragma once

// Run-length distribution of the EWMA S^2 chart for a known in-control
// variance. The survival function p_l(z) = P(L > l | Z_0 = z) obeys
//
//   p_1(z) = P(c_l <= Z_1 <= c_u | Z_0 = z)
//   p_l(z) = int_{max(c_l, (1-lambda) z)}^{c_u} p_{l-1}(y) delta(z, y) dy
//
// and is approximated either by piecewise Chebyshev collocation (default) or
// by a Markov chain over equal-width cells (comparator).

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "sewma/chart.hpp"

namespace sewma {

/// Geometric-tail detection: declare the tail at the first l >= min_index
/// where the last `window` successive ratios p_{l+1}/p_l agree within
/// min(tolerance, relative * (1 - ratio)), never tighter than `noise_floor`.
/// Iteration stops after `max_iterations` steps even without a tail.
struct TailOptions {
  std::size_t min_index = 20;
  int window = 5;
  double tolerance = 1e-10;
  double relative = 1e-5;
  double noise_floor = 1e-15;
  std::size_t max_iterations = 200'000;
};

enum class SfMethod { Collocation, MarkovChain };
enum class ArlMethod { LinearSystem, TailSum };

struct ConditionalOptions {
  SfMethod method = SfMethod::Collocation;
  int basis_size = 50;      // Chebyshev polynomials per collocation piece
  int quad_factor = 3;      // Gauss-Legendre nodes per kernel integral = quad_factor * basis_size
  int markov_states = 500;  // transient states of the Markov chain
  TailOptions tail;
};

/// Survival function values p_1..p_{l_max} plus the geometric tail found
/// while computing them.
struct RLCurve {
  std::vector<double> sf;
  std::size_t tail_start = 0;  // p_{l+1} = tail_ratio * p_l for l >= tail_start
  double tail_ratio = 0.0;
  bool tail_converged = false;

  std::size_t l_max() const noexcept { return sf.size(); }
  /// p_l for any l >= 0; beyond l_max the geometric tail is extrapolated.
  double at(std::size_t l) const;
};

/// One-step model shared by collocation and the Markov chain: a linear map
/// on nodal survival values plus a row evaluating the next value at z0.
class RunLengthModel {
 public:
  virtual ~RunLengthModel() = default;

  virtual std::size_t size() const noexcept = 0;
  /// Z_1 leaves the continuation region surely (c_u <= (1 - lambda) z0).
  virtual bool absorbed() const noexcept = 0;
  /// Closed-form p_1(z0).
  virtual double start_p1() const noexcept = 0;
  /// Closed-form p_1 at the model's nodes.
  virtual std::span<const double> nodal_p1() const noexcept = 0;
  /// out = one application of the recursion to nodal values `in`.
  virtual void step(std::span<const double> in, std::span<double> out) const noexcept = 0;
  /// p_{l+1}(z0) from nodal values of p_l.
  virtual double at_start(std::span<const double> nodal) const noexcept = 0;
  /// Sum over l >= 0 of p_l(z0) obtained from (I - K)^{-1} 1. Near
  /// singular kernels (ARL beyond ~1e8) go through a deflated solve whose
  /// Perron decay comes from the exact exit probabilities.
  virtual double arl_linear_system() const = 0;
  /// 1 - rho for the dominant eigenvalue rho of the kernel, computed from
  /// the exit probabilities (accurate even when rho rounds to one).
  virtual double tail_decay() const = 0;
  /// Variance ratio sigma^2 / sigma0^2 the model was built for.
  virtual double variance() const noexcept = 0;
};

/// Piecewise shifted-Chebyshev collocation basis. The two-sided continuation
/// interval is split at c_l / (1 - lambda) when that point lies inside it.
/// The kernel is stored in nodal form: row r maps nodal values of p_{l-1}
/// to p_l(z_r); it depends on (config, sigma2, limits, N) but not on l.
class CollocationBasis final : public RunLengthModel {
 public:
  struct Piece {
    double lo;
    double hi;
  };

  CollocationBasis(const ChartConfig& config, double sigma2, const Limits& limits, int basis_size,
                   int quad_factor = 3);

  /// Shared, cached instance keyed by every constructor argument.
  static std::shared_ptr<const CollocationBasis> cached(const ChartConfig& config, double sigma2,
                                                        const Limits& limits, int basis_size,
                                                        int quad_factor = 3);

  int basis_size() const noexcept { return n_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  std::span<const double> nodes() const noexcept { return nodes_; }
  /// Row-major (size() + 1) x size(); the last row belongs to z0.
  std::span<const double> kernel_matrix() const noexcept { return kernel_; }
  /// Chebyshev coefficients g_{l,s} of each piece from nodal values.
  std::vector<double> coefficients(std::span<const double> nodal) const;
  /// Interpolant of nodal values at z (inside the continuation interval).
  double interpolate(std::span<const double> nodal, double z) const;

  std::size_t size() const noexcept override { return nodes_.size(); }
  bool absorbed() const noexcept override { return absorbed_; }
  double start_p1() const noexcept override { return start_p1_; }
  std::span<const double> nodal_p1() const noexcept override { return p1_; }
  void step(std::span<const double> in, std::span<double> out) const noexcept override;
  double at_start(std::span<const double> nodal) const noexcept override;
  double arl_linear_system() const override;
  double tail_decay() const override;
  double variance() const noexcept override { return sigma2_; }

 private:
  struct NearSingular {
    double arl = 0.0;
    double decay = 0.0;
    bool resolved = false;
  };
  /// Perron route for kernels too close to singular for a direct solve;
  /// computed once per basis.
  const NearSingular& near_singular() const;

  ChartConfig config_;
  Limits limits_;
  double sigma2_;
  int n_;
  int quad_factor_;
  mutable std::once_flag near_once_;
  mutable NearSingular near_;
  bool absorbed_ = false;
  double start_p1_ = 0.0;
  std::vector<Piece> pieces_;
  std::vector<double> nodes_;
  std::vector<double> p1_;
  std::vector<double> exit_;
  std::vector<double> kernel_;
};

/// Brook-Evans style Markov chain over equal-width cells of the continuation
/// region, states at cell midpoints.
class MarkovChainModel final : public RunLengthModel {
 public:
  MarkovChainModel(const ChartConfig& config, double sigma2, const Limits& limits, int states);

  std::size_t size() const noexcept override { return states_; }
  bool absorbed() const noexcept override { return absorbed_; }
  double start_p1() const noexcept override { return start_p1_; }
  std::span<const double> nodal_p1() const noexcept override { return p1_; }
  void step(std::span<const double> in, std::span<double> out) const noexcept override;
  double at_start(std::span<const double> nodal) const noexcept override;
  double arl_linear_system() const override;
  double tail_decay() const override;
  double variance() const noexcept override { return sigma2_; }

 private:
  double sigma2_;
  std::size_t states_;
  bool absorbed_ = false;
  double start_p1_ = 0.0;
  std::vector<double> p1_;
  std::vector<double> exit_;
  std::vector<double> transition_;  // (states + 1) x states, last row from z0
};

/// Model for the given options (collocation bases come from the cache).
std::shared_ptr<const RunLengthModel> make_model(const ChartConfig& config, double sigma2, const Limits& limits,
                                                 const ConditionalOptions& options = {});

/// Survival function prefix computed until `l_stop` or until the geometric
/// tail is detected, whichever comes first.
struct SfTrace {
  std::vector<double> prefix;  // p_1..p_K, monotone and clipped to [0, 1]
  std::size_t tail_start = 0;
  double tail_ratio = 0.0;
  bool tail_converged = false;

  double at(std::size_t l) const;
  /// Smallest l with p_l <= level; throws DivergenceError if never reached.
  std::size_t first_at_or_below(double level) const;
};

/// Stops early once p_l <= stop_level.
SfTrace trace_sf(const RunLengthModel& model, std::size_t l_stop, const TailOptions& tail = {},
                 double stop_level = -1.0);

/// delta(z0, z): density of Z_1 at z given Z_0 = z0.
double transition_density(double z0, double z, const ChartConfig& config, double sigma2);

/// Closed-form p_1(z) = P(c_l <= Z_1 <= c_u | Z_0 = z).
double sf_first_step(double z, const ChartConfig& config, double sigma2, const Limits& limits);

/// 1 - p_1(z), from the chi-square tails directly so that tiny exit
/// probabilities keep full relative accuracy.
double exit_first_step(double z, const ChartConfig& config, double sigma2, const Limits& limits);

RLCurve sf_conditional(const ChartConfig& config, double sigma2, const Limits& limits, std::size_t l_max,
                       int basis_size = 50, const TailOptions& tail = {});

RLCurve sf_markov_chain(const ChartConfig& config, double sigma2, const Limits& limits, std::size_t l_max,
                        int states, const TailOptions& tail = {});

/// E(L) = sum_{l >= 0} p_l. Throws DivergenceError when the run length is
/// not finite to double resolution.
double arl_conditional(const ChartConfig& config, double sigma2, const Limits& limits,
                       const ConditionalOptions& options = {}, ArlMethod method = ArlMethod::LinearSystem);

/// Smallest l with P(L <= l) >= alpha.
std::size_t rl_quantile_conditional(const ChartConfig& config, double sigma2, const Limits& limits, double alpha,
                                    const ConditionalOptions& options = {});

}  // namespace sewma
