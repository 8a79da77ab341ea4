#include "conditional/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "sewma/errors.hpp"

namespace sewma::detail {
namespace {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Eigenvector of the eigenvalue with largest real part, sign fixed by its sum.
template <class T>
Vector<T> dominant(const Matrix<T>& m, T& value) {
  Eigen::EigenSolver<Matrix<T>> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen decomposition of the kernel failed");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < solver.eigenvalues().size(); ++i) {
    if (solver.eigenvalues()[i].real() > solver.eigenvalues()[best].real()) best = i;
  }
  value = solver.eigenvalues()[best].real();
  Vector<T> v = solver.eigenvectors().col(best).real();
  if (v.sum() < T(0)) v = -v;
  return v;
}

template <class T>
Perron leak(const Vector<T>& phi, T rho, const Vector<T>& e) {
  Perron out;
  out.rho = static_cast<double>(rho);
  out.decay = static_cast<double>(phi.dot(e) / phi.sum());
  out.noise = static_cast<double>(std::numeric_limits<T>::epsilon() * phi.cwiseAbs().maxCoeff() *
                                  e.cwiseAbs().sum() / phi.sum());
  return out;
}

template <class T>
T deflated(const Matrix<T>& k, const Vector<T>& k0, const Vector<T>& e, Perron& p) {
  const Eigen::Index n = k.rows();
  T rho_right = 0;
  T rho_left = 0;
  const Vector<T> r = dominant<T>(k, rho_right);
  const Vector<T> phi = dominant<T>(k.transpose(), rho_left);
  p = leak<T>(phi, rho_left, e);
  if (!p.resolved()) return std::numeric_limits<T>::quiet_NaN();
  const T decay = phi.dot(e) / phi.sum();

  // 1 = c r + (I - P) 1 with the spectral projector P = r phi' / (phi' r).
  const T phr = phi.dot(r);
  const T c = phi.sum() / phr;
  const Vector<T> rest = Vector<T>::Ones(n) - c * r;
  // On the complement, I - K + P acts as I - K and is far from singular.
  const Matrix<T> system = Matrix<T>::Identity(n, n) - k + r * phi.transpose() / phr;
  Vector<T> b = system.partialPivLu().solve(rest);
  b -= r * (phi.dot(b) / phr);
  return T(1) + k0.dot(r) * c / decay + k0.dot(b);
}

Matrix<double> square(std::span<const double> kernel, std::size_t n) {
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto rows = static_cast<Eigen::Index>(n);
  return Eigen::Map<const RowMatrix>(kernel.data(), rows, rows);
}

Vector<double> vec(std::span<const double> v, std::size_t n) {
  return Eigen::Map<const Vector<double>>(v.data(), static_cast<Eigen::Index>(n));
}

// Extended-precision pieces of the chi-square law.
using Ext = long double;
constexpr Ext kExtEps = std::numeric_limits<Ext>::epsilon();

Ext log_gamma_ext(Ext a) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgammal_r(a, &sign);
#else
  return std::lgamma(a);
#endif
}

Ext chi2_pdf_ext(Ext x, Ext df) {
  if (x <= 0) return 0;
  const Ext k = df / 2;
  return std::exp((k - 1) * std::log(x) - x / 2 - k * std::numbers::ln2_v<Ext> - log_gamma_ext(k));
}

// Regularized Q(a, x) by series (x < a + 1) or Lentz continued fraction.
Ext gamma_q_ext(Ext a, Ext x) {
  if (x <= 0) return 1;
  const Ext prefactor = std::exp(a * std::log(x) - x - log_gamma_ext(a));
  if (x < a + 1) {
    Ext term = 1 / a;
    Ext sum = term;
    for (int n = 1; n < 100000; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * kExtEps) break;
    }
    return std::clamp<Ext>(1 - sum * prefactor, 0, 1);
  }
  const Ext tiny = std::numeric_limits<Ext>::min() / kExtEps;
  Ext b = x + 1 - a;
  Ext c = 1 / tiny;
  Ext d = 1 / b;
  Ext h = d;
  for (int i = 1; i < 100000; ++i) {
    const Ext an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1 / d;
    const Ext delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1) < kExtEps) break;
  }
  return std::min<Ext>(1, prefactor * h);
}

Ext chi2_cdf_ext(Ext x, Ext df) { return 1 - gamma_q_ext(df / 2, x / 2); }

// Gauss-Legendre on [-1, 1] by Newton on the three-term recurrence.
void gauss_legendre_ext(int n, std::vector<Ext>& nodes, std::vector<Ext>& weights) {
  nodes.assign(n, 0);
  weights.assign(n, 0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Ext x = std::cos(std::numbers::pi_v<Ext> * (i + Ext(0.75)) / (n + Ext(0.5)));
    Ext dp = 0;
    for (int it = 0; it < 100; ++it) {
      Ext p0 = 1;
      Ext p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Ext p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Ext dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 4 * kExtEps) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2 / ((1 - x * x) * dp * dp);
  }
}

}  // namespace

Perron perron(std::span<const double> kernel, std::size_t n, std::span<const double> exit) {
  double rho = 0.0;
  const Vector<double> phi = dominant<double>(square(kernel, n).transpose(), rho);
  return leak<double>(phi, rho, vec(exit, n));
}

double arl_direct(std::span<const double> kernel, std::size_t n, std::span<const double> start_row, bool& ok) {
  const auto k = square(kernel, n);
  const auto cols = static_cast<Eigen::Index>(n);
  const Matrix<double> system = Matrix<double>::Identity(cols, cols) - k;
  const Vector<double> a = system.partialPivLu().solve(Vector<double>::Ones(cols));
  const double arl = 1.0 + vec(start_row, n).dot(a);
  ok = std::isfinite(arl) && a.minCoeff() >= 1.0 - 1e-6 && arl >= 1.0 - 1e-9;
  return arl;
}

double arl_deflated(std::span<const double> kernel, std::size_t n, std::span<const double> start_row,
                    std::span<const double> exit) {
  Perron p;
  const double arl = deflated<double>(square(kernel, n), vec(start_row, n), vec(exit, n), p);
  if (!p.resolved()) {
    throw DivergenceError("Perron decay below rounding level: ARL not finite to double resolution", 0.0);
  }
  return arl;
}

ExtendedResult collocation_extended(const ChartConfig& config, double sigma2, const Limits& limits,
                                    const std::vector<Interval>& pieces, int basis_size, int quad_factor) {
  const int n = basis_size;
  const Ext lam = config.lambda;
  const Ext df = config.df();
  const Ext scale = df / (Ext(sigma2) * lam);
  const Ext lo = limits.lower_or_zero();
  const Ext hi = limits.upper;
  const Ext pi = std::numbers::pi_v<Ext>;

  std::vector<Ext> z;
  for (const auto& piece : pieces) {
    const Ext mid = (Ext(piece.hi) + piece.lo) / 2;
    const Ext half = (Ext(piece.hi) - piece.lo) / 2;
    for (int r = 1; r <= n; ++r) z.push_back(mid + half * std::cos((2 * r - 1) * pi / (2 * n)));
  }
  const auto cols = static_cast<Eigen::Index>(z.size());

  Matrix<Ext> cardinal(n, n);
  for (int s = 0; s < n; ++s)
    for (int j = 0; j < n; ++j) cardinal(s, j) = (s == 0 ? Ext(1) : Ext(2)) / n * std::cos(s * (2 * j + 1) * pi / (2 * n));

  std::vector<Ext> gl_nodes;
  std::vector<Ext> gl_weights;
  gauss_legendre_ext(quad_factor * n, gl_nodes, gl_weights);

  Matrix<Ext> k = Matrix<Ext>::Zero(cols, cols);
  Vector<Ext> k0 = Vector<Ext>::Zero(cols);
  Vector<Ext> e(cols);
  Vector<Ext> moments(n);
  std::vector<Ext> t(n);
  for (Eigen::Index row = 0; row <= cols; ++row) {
    const Ext from = row < cols ? z[row] : Ext(config.z0);
    const Ext edge = (1 - lam) * from;
    if (row < cols) {
      Ext out = hi > edge ? gamma_q_ext(df / 2, scale * (hi - edge) / 2) : Ext(1);
      if (lo > edge) out += chi2_cdf_ext(scale * (lo - edge), df);
      e(row) = std::min<Ext>(1, out);
    }
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      const Ext plo = pieces[p].lo;
      const Ext phi = pieces[p].hi;
      const Ext a = std::max(plo, edge);
      if (a >= phi) continue;
      const Ext ua = std::sqrt(a - edge);
      const Ext ub = std::sqrt(phi - edge);
      const Ext umid = (ua + ub) / 2;
      const Ext uhalf = (ub - ua) / 2;
      moments.setZero();
      for (std::size_t q = 0; q < gl_nodes.size(); ++q) {
        const Ext u = umid + uhalf * gl_nodes[q];
        const Ext y = edge + u * u;
        const Ext w = uhalf * gl_weights[q] * 2 * u * chi2_pdf_ext(scale * u * u, df) * scale;
        if (w == 0) continue;
        const Ext x = std::clamp<Ext>((2 * y - (plo + phi)) / (phi - plo), -1, 1);
        t[0] = 1;
        if (n > 1) t[1] = x;
        for (int s = 2; s < n; ++s) t[s] = 2 * x * t[s - 1] - t[s - 2];
        for (int s = 0; s < n; ++s) moments(s) += w * t[s];
      }
      const Vector<Ext> nodal = cardinal.transpose() * moments;
      if (row < cols) {
        k.block(row, static_cast<Eigen::Index>(p) * n, 1, n) = nodal.transpose();
      } else {
        k0.segment(static_cast<Eigen::Index>(p) * n, n) = nodal;
      }
    }
  }

  ExtendedResult result{};
  result.arl = static_cast<double>(deflated<Ext>(k, k0, e, result.perron));
  return result;
}

}  // namespace sewma::detail
