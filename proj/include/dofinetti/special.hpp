#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dofinetti {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

/// Lower regularized incomplete gamma P(a,x) by power series (valid x < a+1).
inline double gamma_p_series(double a, double x) {
  const double lg = std::lgamma(a);
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - lg);
}

/// Upper regularized incomplete gamma Q(a,x) by modified Lentz continued
/// fraction (valid x >= a+1).
inline double gamma_q_cf(double a, double x) {
  const double lg = std::lgamma(a);
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace detail

/// Lower regularized incomplete gamma P(a,x).
inline double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_p: bad args");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

/// Upper regularized incomplete gamma Q(a,x) = 1 - P(a,x).
inline double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("regularized_gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

/// Survival function of the chi-squared distribution with `dof` degrees.
inline double chi_squared_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * x);
}

/// One quadrature rule: nodes in (0,1) and probability weights summing to 1.
struct BetaQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

/// Symmetric tridiagonal QL with implicit shifts. d = diagonal, e = subdiagonal
/// (e[k] couples k and k+1). On return d holds the eigenvalues (unsorted) and
/// z0 the first component of each eigenvector, z0 = (1,0,...,0) on entry.
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e,
                           std::vector<double>& z0) {
  const std::size_t n = d.size();
  if (n == 0) return;
  e.push_back(0.0);
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw std::runtime_error("tridiagonal_ql: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ip1 = m; ip1 > l; --ip1) {
          const std::size_t i = ip1 - 1;
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z0[i + 1];
          z0[i + 1] = s * z0[i] + c * f;
          z0[i] = c * z0[i] - s * f;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace detail

/// Gauss quadrature for the Beta(alpha, beta) probability measure on (0,1),
/// computed by Golub-Welsch on the Jacobi-weight recurrence coefficients.
/// Exact for polynomial integrands up to degree 2n-1, for any alpha, beta > 0
/// (the weight absorbs endpoint singularities and concentration alike).
inline BetaQuadrature beta_gauss_quadrature(std::size_t n, double alpha, double beta) {
  if (n == 0) throw std::invalid_argument("beta_gauss_quadrature: n must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("beta_gauss_quadrature: alpha, beta must be > 0");
  }
  // Jacobi weight (1-x)^a (1+x)^b on [-1,1] with t = (1+x)/2.
  const double a = beta - 1.0;
  const double b = alpha - 1.0;
  const double ab = a + b;
  std::vector<double> diag(n), offdiag(n > 1 ? n - 1 : 0);
  diag[0] = (b - a) / (ab + 2.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double two_k = 2.0 * static_cast<double>(k);
    diag[k] = (b - a) * (b + a) / ((two_k + ab) * (two_k + ab + 2.0));
  }
  if (n > 1) {
    offdiag[0] = std::sqrt(4.0 * (a + 1.0) * (b + 1.0) /
                           ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)));
    for (std::size_t k = 2; k < n; ++k) {
      const double kk = static_cast<double>(k);
      const double two_k = 2.0 * kk;
      const double beta_k = 4.0 * kk * (kk + a) * (kk + b) * (kk + ab) /
                            ((two_k + ab) * (two_k + ab) * (two_k + ab + 1.0) *
                             (two_k + ab - 1.0));
      offdiag[k - 1] = std::sqrt(beta_k);
    }
  }
  std::vector<double> z0(n, 0.0);
  z0[0] = 1.0;
  detail::tridiagonal_ql(diag, offdiag, z0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 1; i < n; ++i) {  // insertion sort by node
    std::size_t j = i;
    while (j > 0 && diag[order[j - 1]] > diag[order[j]]) {
      std::swap(order[j - 1], order[j]);
      --j;
    }
  }
  BetaQuadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q.nodes[i] = 0.5 * (1.0 + diag[order[i]]);
    q.weights[i] = z0[order[i]] * z0[order[i]];
  }
  return q;
}

}  // namespace dofinetti
