// Independent reference implementations used only by the tests. None of these
// call into the solver, score or generator code they are compared against.
#ifndef LGGM_TESTS_ORACLES_HPP
#define LGGM_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXl = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXl = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

inline double log_det_or_ninf(const MatrixXd& m) {
  Eigen::LLT<MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Free parameters of a symmetric matrix: the diagonal plus the listed pairs.
struct FreeSet {
  int n = 0;
  std::vector<std::pair<int, int>> pairs;  // i < j

  int size() const { return n + static_cast<int>(pairs.size()); }

  MatrixXd basis(int p) const {
    MatrixXd e = MatrixXd::Zero(n, n);
    if (p < n) {
      e(p, p) = 1.0;
    } else {
      const auto [i, j] = pairs[static_cast<std::size_t>(p - n)];
      e(i, j) = e(j, i) = 1.0;
    }
    return e;
  }
};

// Maximizes log det T - tr(S T) - sum_{i != j} L_ij sign_ij T_ij over the
// free entries (others held at zero) by damped Newton steps. `signs` fixes the
// sign of each free pair's l1 term; pass zeros for an unpenalized problem.
inline MatrixXd newton_on_support(const MatrixXd& s, const FreeSet& free, const MatrixXd& lambda,
                                  const MatrixXd& signs, MatrixXd theta, int max_iter = 200) {
  const int m = free.size();
  std::vector<MatrixXd> basis;
  for (int p = 0; p < m; ++p) basis.push_back(free.basis(p));
  auto objective = [&](const MatrixXd& t) {
    const double ld = log_det_or_ninf(t);
    if (!std::isfinite(ld)) return -std::numeric_limits<double>::infinity();
    double pen = 0.0;
    for (const auto& [i, j] : free.pairs) pen += 2.0 * lambda(i, j) * signs(i, j) * t(i, j);
    return ld - (s * t).trace() - pen;
  };
  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd sigma = theta.inverse();
    VectorXd grad(m);
    MatrixXd hess(m, m);
    for (int p = 0; p < m; ++p) {
      const MatrixXd& e = basis[static_cast<std::size_t>(p)];
      grad(p) = ((sigma - s) * e).trace();
      if (p >= free.n) {
        const auto [i, j] = free.pairs[static_cast<std::size_t>(p - free.n)];
        grad(p) -= 2.0 * lambda(i, j) * signs(i, j);
      }
      const MatrixXd se = sigma * e;
      for (int q = 0; q <= p; ++q) {
        hess(p, q) = hess(q, p) = -(se * sigma * basis[static_cast<std::size_t>(q)]).trace();
      }
    }
    const VectorXd step = (-hess).ldlt().solve(grad);
    const double decrement = grad.dot(step);
    if (decrement < 1e-26) break;
    const double f0 = objective(theta);
    double t = 1.0;
    MatrixXd next = theta;
    for (int ls = 0; ls < 60; ++ls) {
      next = theta;
      for (int p = 0; p < m; ++p) next += t * step(p) * basis[static_cast<std::size_t>(p)];
      if (objective(next) >= f0 + 0.25 * t * decrement) break;
      t *= 0.5;
    }
    theta = next;
  }
  return theta;
}

// Proximal gradient ascent on the weighted graphical-lasso objective.
// Infinite penalties are hard zeros (projection). Backtracking keeps iterates
// positive definite.
inline MatrixXd proximal_glasso(const MatrixXd& s, const MatrixXd& lambda, int max_iter = 200000,
                                double tol = 1e-13) {
  const int n = static_cast<int>(s.rows());
  auto penalty = [&](const MatrixXd& t) {
    double p = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && std::isfinite(lambda(i, j))) p += lambda(i, j) * std::abs(t(i, j));
    return p;
  };
  auto objective = [&](const MatrixXd& t) {
    return log_det_or_ninf(t) - (s * t).trace() - penalty(t);
  };
  auto prox = [&](const MatrixXd& y, double step) {
    MatrixXd z = y;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        if (std::isinf(lambda(i, j))) {
          z(i, j) = 0.0;
          continue;
        }
        const double thr = step * lambda(i, j);
        const double v = y(i, j);
        z(i, j) = v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
      }
    return z;
  };
  MatrixXd theta = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) theta(i, i) = 1.0 / s(i, i);
  double f = objective(theta);
  double step = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd grad = theta.inverse() - s;
    MatrixXd next;
    double fn = -std::numeric_limits<double>::infinity();
    step = std::min(step * 2.0, 1e3);
    for (int ls = 0; ls < 80; ++ls) {
      next = prox(theta + step * grad, step);
      fn = objective(next);
      const MatrixXd d = next - theta;
      // Sufficient ascent for the smooth part's quadratic model.
      if (std::isfinite(fn) &&
          fn >= f + (grad.cwiseProduct(d)).sum() - d.squaredNorm() / (2.0 * step) - penalty(next) +
                    penalty(theta) - 1e-15)
        break;
      step *= 0.5;
    }
    const double change = (next - theta).norm();
    theta = next;
    f = fn;
    if (change < tol) break;
  }
  return theta;
}

// Weighted graphical lasso: proximal gradient to locate the support and signs,
// then Newton on that support with the l1 term linearized.
inline MatrixXd weighted_glasso(const MatrixXd& s, const MatrixXd& lambda) {
  const int n = static_cast<int>(s.rows());
  MatrixXd theta = proximal_glasso(s, lambda, 20000, 1e-12);
  FreeSet free{n, {}};
  MatrixXd signs = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(theta(i, j)) > 1e-7 && std::isfinite(lambda(i, j))) {
        free.pairs.emplace_back(i, j);
        signs(i, j) = signs(j, i) = theta(i, j) > 0 ? 1.0 : -1.0;
      }
  MatrixXd start = theta;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && signs(i, j) == 0.0) start(i, j) = 0.0;
  if (log_det_or_ninf(start) == -std::numeric_limits<double>::infinity()) return theta;
  MatrixXd lam = lambda;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!std::isfinite(lam(i, j))) lam(i, j) = 0.0;
  return newton_on_support(s, free, lam, signs, start);
}

// Maximum likelihood with T_ij = 0 on `zeros` (pairs i < j) and no penalty.
inline MatrixXd constrained_mle(const MatrixXd& s, const std::vector<std::pair<int, int>>& zeros) {
  const int n = static_cast<int>(s.rows());
  MatrixXd is_zero = MatrixXd::Zero(n, n);
  for (const auto& [i, j] : zeros) is_zero(i, j) = is_zero(j, i) = 1.0;
  FreeSet free{n, {}};
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (is_zero(i, j) == 0.0) free.pairs.emplace_back(i, j);
  MatrixXd start = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) start(i, i) = 1.0 / s(i, i);
  return newton_on_support(s, free, MatrixXd::Zero(n, n), MatrixXd::Zero(n, n), start, 500);
}

// (k/2)[log det T - tr(S T)] with T = theta o (A + I), in extended precision.
inline long double masked_log_likelihood(const MatrixXd& theta, const MatrixXd& a,
                                         const MatrixXd& s, double k) {
  const int n = static_cast<int>(theta.rows());
  MatrixXl t(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      t(i, j) = static_cast<long double>(theta(i, j)) *
                (static_cast<long double>(a(i, j)) + (i == j ? 1.0L : 0.0L));
  Eigen::LLT<MatrixXl> llt(t);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<long double>::infinity();
  long double ld = 0.0L;
  const MatrixXl l = llt.matrixL();
  for (int i = 0; i < n; ++i) ld += 2.0L * std::log(l(i, i));
  const long double tr = (s.cast<long double>() * t).trace();
  return static_cast<long double>(k) / 2.0L * (ld - tr);
}

// log (1/N) sum_i N(x; c_i, sigma^2 I), centers as columns, in extended precision.
inline long double mixture_log_density(const MatrixXd& centers, const VectorXd& x, double sigma) {
  const long double s2 = static_cast<long double>(sigma) * sigma;
  const auto d = static_cast<long double>(x.size());
  long double total = 0.0L;
  for (Eigen::Index c = 0; c < centers.cols(); ++c) {
    long double sq = 0.0L;
    for (Eigen::Index q = 0; q < x.size(); ++q) {
      const long double diff = static_cast<long double>(x(q)) - centers(q, c);
      sq += diff * diff;
    }
    total += std::exp(-sq / (2.0L * s2));
  }
  const long double pi = 3.141592653589793238462643383279502884L;
  return std::log(total / static_cast<long double>(centers.cols())) -
         d / 2.0L * std::log(2.0L * pi * s2);
}

// Central differences of a scalar function along each coordinate.
inline VectorXd central_gradient(const std::function<long double(const VectorXd&)>& f,
                                 const VectorXd& x, double h) {
  VectorXd g(x.size());
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    VectorXd up = x, down = x;
    up(q) += h;
    down(q) -= h;
    g(q) = static_cast<double>((f(up) - f(down)) / (2.0L * static_cast<long double>(h)));
  }
  return g;
}

inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  double out = 1.0;
  for (int q = 1; q <= r; ++q) out = out * (n - r + q) / q;
  return out;
}

inline std::vector<int> degrees(const MatrixXd& a) {
  std::vector<int> deg(static_cast<std::size_t>(a.rows()), 0);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) != 0.0) ++deg[static_cast<std::size_t>(i)];
  return deg;
}

// Number of d-stars: every (center, d-subset of its neighbours), counted by
// explicit subset enumeration.
inline long long count_stars(const MatrixXd& a, int d) {
  long long total = 0;
  const auto n = static_cast<int>(a.rows());
  for (int v = 0; v < n; ++v) {
    std::vector<int> nb;
    for (int u = 0; u < n; ++u)
      if (u != v && a(v, u) != 0.0) nb.push_back(u);
    const int m = static_cast<int>(nb.size());
    if (m > 20) return -1;
    for (unsigned mask = 0; mask < (1u << m); ++mask)
      if (__builtin_popcount(mask) == d) ++total;
  }
  return total;
}

inline double aks_by_enumeration(const MatrixXd& a, double gamma) {
  double total = 0.0;
  for (int d = 2; d < a.rows(); ++d)
    total += (d % 2 == 0 ? 1.0 : -1.0) * double(count_stars(a, d)) / std::pow(gamma, d - 2);
  return total;
}

inline double aks_direct(const MatrixXd& a, double gamma) {
  double total = 0.0;
  for (int deg : degrees(a))
    for (int d = 2; d < a.rows(); ++d)
      total += (d % 2 == 0 ? 1.0 : -1.0) * binomial(deg, d) / std::pow(gamma, d - 2);
  return total;
}

// Adjacency matrix of an n-node graph from a bitmask over row-major strict-upper pairs.
inline MatrixXd graph_from_bits(int n, unsigned bits) {
  MatrixXd a = MatrixXd::Zero(n, n);
  int p = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++p)
      if (bits & (1u << p)) a(i, j) = a(j, i) = 1.0;
  return a;
}

// Normalized ERGM probabilities of all graphs on n nodes (bit order as above),
// with statistics (AKS_gamma, number of ordered adjacent pairs).
inline std::vector<double> ergm_enumeration(int n, double beta_aks, double beta_edges,
                                            double gamma) {
  const int dim = n * (n - 1) / 2;
  std::vector<double> logw(static_cast<std::size_t>(1u << dim));
  for (unsigned b = 0; b < (1u << dim); ++b) {
    const MatrixXd a = graph_from_bits(n, b);
    logw[b] = beta_aks * aks_direct(a, gamma) + beta_edges * a.sum();
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  for (double& w : logw) z += (w = std::exp(w - mx));
  for (double& w : logw) w /= z;
  return logw;
}

}  // namespace oracle

#endif  // LGGM_TESTS_ORACLES_HPP
