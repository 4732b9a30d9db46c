#ifndef XDFLOW_QUADRATURE_HPP_
#define XDFLOW_QUADRATURE_HPP_

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xdflow {

inline constexpr int kMinDegree = 1;
inline constexpr int kMaxDegree = 8;

/// Gauss-Lobatto rule on the reference interval [-1, 1] together with the
/// nodal differentiation matrix of the Lagrange basis built on its nodes.
///
/// A polynomial of degree k on a cell is stored as its k+1 values at these
/// nodes, so the quadrature mass matrix is diagonal with entries (h/2) w_r.
struct QuadratureRule {
  int degree = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Row-major, entry (q, r) is the derivative of the r-th basis at node q.
  std::vector<double> diff;
  /// Barycentric weights used for evaluation away from the nodes.
  std::vector<double> bary;

  [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
  [[nodiscard]] double d(std::size_t q, std::size_t r) const noexcept {
    return diff[q * nodes.size() + r];
  }
};

namespace detail {

/// Legendre P_n(x) and P_{n-1}(x) by the three-term recurrence.
inline void legendre_pair(int n, double x, double& pn, double& pnm1) noexcept {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) {
    pn = p0;
    pnm1 = 0.0;
    return;
  }
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  pn = p1;
  pnm1 = p0;
}

}  // namespace detail

inline double legendre(int n, double x) noexcept {
  double pn = 0.0;
  double pnm1 = 0.0;
  detail::legendre_pair(n, x, pn, pnm1);
  return pn;
}

/// Reference differentiation matrix for the Lagrange basis on `rule.nodes`.
/// Off-diagonal entries use the barycentric formula; the diagonal is the
/// negated off-diagonal row sum so constants are differentiated to zero.
inline std::vector<double> differentiation_matrix(const QuadratureRule& rule) {
  const std::size_t n = rule.nodes.size();
  std::vector<double> lambda(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) lambda[j] /= (rule.nodes[j] - rule.nodes[i]);

  std::vector<double> d(n * n, 0.0);
  for (std::size_t q = 0; q < n; ++q) {
    double row = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == q) continue;
      const double v = (lambda[r] / lambda[q]) / (rule.nodes[q] - rule.nodes[r]);
      d[q * n + r] = v;
      row += v;
    }
    d[q * n + q] = -row;
  }
  return d;
}

/// (k+1)-point Gauss-Lobatto rule for polynomial degree k in [1, 8].
inline QuadratureRule gauss_lobatto_rule(int k) {
  if (k < kMinDegree || k > kMaxDegree) {
    throw std::invalid_argument("polynomial degree k=" + std::to_string(k) +
                                " outside supported range [" +
                                std::to_string(kMinDegree) + ", " +
                                std::to_string(kMaxDegree) + "]");
  }
  QuadratureRule rule;
  rule.degree = k;
  const std::size_t n = static_cast<std::size_t>(k) + 1;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;

  // Interior nodes are the roots of P'_k. Newton on (1-x^2) P'_k(x), which
  // equals k (P_{k-1} - x P_k) and has derivative -k (k+1) P_k.
  for (int j = 1; j < k; ++j) {
    double x = -std::cos(std::numbers::pi * j / k);
    for (int it = 0; it < 100; ++it) {
      double pk = 0.0;
      double pkm1 = 0.0;
      detail::legendre_pair(k, x, pk, pkm1);
      const double dx = (pkm1 - x * pk) / ((k + 1.0) * pk);
      x += dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    rule.nodes[static_cast<std::size_t>(j)] = x;
  }
  // Enforce exact symmetry about the origin.
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double s = 0.5 * (rule.nodes[n - 1 - j] - rule.nodes[j]);
    rule.nodes[j] = -s;
    rule.nodes[n - 1 - j] = s;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;

  for (std::size_t j = 0; j < n; ++j) {
    const double pk = legendre(k, rule.nodes[j]);
    rule.weights[j] = 2.0 / (k * (k + 1.0) * pk * pk);
  }
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double w = 0.5 * (rule.weights[j] + rule.weights[n - 1 - j]);
    rule.weights[j] = w;
    rule.weights[n - 1 - j] = w;
  }

  rule.bary.assign(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
      if (i != j) rule.bary[j] /= (rule.nodes[j] - rule.nodes[i]);
  rule.diff = differentiation_matrix(rule);
  return rule;
}

/// (cell_length / 2) * sum_r w_r * value_r
inline double quad_integrate(const QuadratureRule& rule,
                             std::span<const double> nodal_values,
                             double cell_length) {
  double s = 0.0;
  for (std::size_t r = 0; r < rule.size(); ++r) s += rule.weights[r] * nodal_values[r];
  return 0.5 * cell_length * s;
}

/// Values of all Lagrange basis functions at reference coordinate `xi`.
inline std::vector<double> lagrange_basis(const QuadratureRule& rule, double xi) {
  const std::size_t n = rule.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (xi == rule.nodes[j]) {
      out[j] = 1.0;
      return out;
    }
  }
  double denom = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = rule.bary[j] / (xi - rule.nodes[j]);
    denom += out[j];
  }
  for (double& v : out) v /= denom;
  return out;
}

/// Evaluates the interpolant of `nodal_values` at reference coordinate `xi`.
inline double interpolate(const QuadratureRule& rule,
                          std::span<const double> nodal_values, double xi) {
  const auto basis = lagrange_basis(rule, xi);
  double s = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) s += basis[j] * nodal_values[j];
  return s;
}

/// Applies the differentiation matrix: out_q = sum_r D(q, r) values_r.
inline std::vector<double> differentiate(const QuadratureRule& rule,
                                         std::span<const double> values) {
  const std::size_t n = rule.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t r = 0; r < n; ++r) out[q] += rule.d(q, r) * values[r];
  return out;
}

}  // namespace xdflow

#endif  // XDFLOW_QUADRATURE_HPP_
