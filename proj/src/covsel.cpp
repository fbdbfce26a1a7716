#include "lggm/covsel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <string>

namespace lggm {

namespace {

constexpr double kHardPenaltyFactor = 1e6;
constexpr double kRidgeFactor = 1e-8;
constexpr int kMaxInnerSweeps = 20000;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double sign_of(double x) { return (x > 0.0) - (x < 0.0); }

bool is_positive_definite(const Eigen::MatrixXd& m, double rel_floor = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) return false;
  const double hi = eig.eigenvalues().maxCoeff();
  return hi > 0.0 && eig.eigenvalues().minCoeff() > rel_floor * hi;
}

std::vector<Index> all_but(Index n, Index skip) {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i)
    if (i != skip) idx.push_back(i);
  return idx;
}

// Exact solve of the lasso subproblem restricted to its current active set.
// Succeeds only if the solution keeps the signs that defined it and every
// inactive coordinate satisfies its subgradient condition.
bool polish_active_set(const Eigen::MatrixXd& w, const Eigen::VectorXd& s,
                       const Eigen::VectorXd& lam, Eigen::VectorXd& beta) {
  const Index p = w.rows();
  std::vector<Index> active;
  for (Index k = 0; k < p; ++k)
    if (lam(k) == 0.0 || beta(k) != 0.0) active.push_back(k);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Index>(active.size()));
  if (!active.empty()) {
    const Eigen::MatrixXd waa = w(active, active);
    Eigen::VectorXd rhs(x.size());
    for (std::size_t q = 0; q < active.size(); ++q) {
      const Index k = active[q];
      rhs(static_cast<Index>(q)) = s(k) - lam(k) * sign_of(beta(k));
    }
    Eigen::LLT<Eigen::MatrixXd> llt(waa);
    if (llt.info() != Eigen::Success) return false;
    x = llt.solve(rhs);
    if (!x.allFinite()) return false;
    for (std::size_t q = 0; q < active.size(); ++q) {
      const Index k = active[q];
      if (lam(k) > 0.0 && sign_of(x(static_cast<Index>(q))) != sign_of(beta(k))) return false;
    }
  }
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(p);
  for (std::size_t q = 0; q < active.size(); ++q) candidate(active[q]) = x(static_cast<Index>(q));
  const Eigen::VectorXd grad = s - w * candidate;
  for (Index k = 0; k < p; ++k) {
    if (candidate(k) != 0.0 || lam(k) == 0.0) continue;
    if (std::abs(grad(k)) > lam(k) * (1.0 + 1e-12) + 1e-14 * w(k, k)) return false;
  }
  beta = candidate;
  return true;
}

// min_b 0.5 b'Wb - s'b + sum_k lam_k |b_k|, warm-started from `beta`.
void solve_lasso(const Eigen::MatrixXd& w, const Eigen::VectorXd& s, const Eigen::VectorXd& lam,
                 Eigen::VectorXd& beta) {
  const Index p = w.rows();
  const double scale = w.diagonal().maxCoeff();
  for (int sweep = 0; sweep < kMaxInnerSweeps; ++sweep) {
    double max_delta = 0.0;
    for (Index k = 0; k < p; ++k) {
      const double r = s(k) - w.row(k).dot(beta) + w(k, k) * beta(k);
      const double next = soft_threshold(r, lam(k)) / w(k, k);
      max_delta = std::max(max_delta, std::abs(next - beta(k)) * w(k, k));
      beta(k) = next;
    }
    if (!beta.allFinite()) return;
    if (max_delta < 1e-6 * scale && polish_active_set(w, s, lam, beta)) return;
    if (max_delta <= 1e-15 * scale) return;
  }
}

Eigen::MatrixXd assemble_precision(const Eigen::MatrixXd& w, const Eigen::MatrixXd& b) {
  const Index n = w.rows();
  Eigen::MatrixXd theta(n, n);
  for (Index j = 0; j < n; ++j) {
    const auto idx = all_but(n, j);
    const Eigen::VectorXd beta = b(idx, j);
    const Eigen::VectorXd w12 = w(idx, j);
    const double schur = w(j, j) - w12.dot(beta);
    const double tjj = schur > 0.0 ? 1.0 / schur : std::numeric_limits<double>::quiet_NaN();
    theta(j, j) = tjj;
    theta(idx, j) = -beta * tjj;
  }
  return 0.5 * (theta + theta.transpose());
}

// A singular S makes the problem well-posed only if the unpenalized pairs do
// not span a singular block: each connected component of the graph of
// zero-penalty pairs must have a positive-definite covariance block.
void check_well_posed(const Eigen::MatrixXd& s, const Eigen::MatrixXd& lam) {
  const Index n = s.rows();
  for (Index i = 0; i < n; ++i)
    if (!(s(i, i) > 0.0))
      throw InvalidArgument("ill-posed problem: variable " + std::to_string(i) +
                            " has zero sample variance");
  if (is_positive_definite(s)) return;

  std::vector<Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (lam(i, j) == 0.0) parent[find(i)] = find(j);

  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) groups[find(i)].push_back(i);
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    if (!is_positive_definite(s(g, g)))
      throw InvalidArgument(
          "ill-posed problem: sample covariance is singular on a block of unpenalized entries");
  }
}

}  // namespace

ObservationSet::ObservationSet(Eigen::MatrixXd x) : x_(std::move(x)) {
  if (x_.rows() < 1 || x_.cols() < 1)
    throw InvalidArgument("observation set needs at least one variable and one sample");
  if (!x_.allFinite()) throw InvalidArgument("observations must be finite");
}

PenaltyMatrix::PenaltyMatrix(Eigen::MatrixXd lambda) : lambda_(std::move(lambda)) {
  if (lambda_.rows() != lambda_.cols()) throw InvalidArgument("penalty matrix must be square");
  for (Index i = 0; i < lambda_.rows(); ++i) {
    if (lambda_(i, i) != 0.0) throw InvalidArgument("penalty matrix diagonal must be zero");
    for (Index j = 0; j < lambda_.cols(); ++j) {
      const double v = lambda_(i, j);
      if (std::isnan(v) || v < 0.0) throw InvalidArgument("penalties must be non-negative");
      if (v != lambda_(j, i)) throw InvalidArgument("penalty matrix must be symmetric");
    }
  }
}

PenaltyMatrix PenaltyMatrix::uniform(Index n, double lambda) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, lambda);
  m.diagonal().setZero();
  return PenaltyMatrix(std::move(m));
}

SampleCovariance sample_covariance(const ObservationSet& obs) {
  const Eigen::MatrixXd& x = obs.matrix();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.rows(), x.rows());
  s.selfadjointView<Eigen::Lower>().rankUpdate(x, 1.0 / double(x.cols()));
  return {s.selfadjointView<Eigen::Lower>()};
}

double penalized_objective(const Eigen::MatrixXd& theta, const SampleCovariance& s,
                           const PenaltyMatrix& lambda) {
  Eigen::LLT<Eigen::MatrixXd> llt(theta);
  if (!theta.allFinite() || llt.info() != Eigen::Success)
    return -std::numeric_limits<double>::infinity();
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  double penalty = 0.0;
  const Eigen::MatrixXd& lam = lambda.matrix();
  for (Index i = 0; i < theta.rows(); ++i)
    for (Index j = 0; j < theta.cols(); ++j)
      if (i != j && std::isfinite(lam(i, j))) penalty += lam(i, j) * std::abs(theta(i, j));
  return logdet - s.s.cwiseProduct(theta).sum() - penalty;
}

double kkt_residual(const Eigen::MatrixXd& theta, const SampleCovariance& s,
                    const PenaltyMatrix& lambda) {
  Eigen::LLT<Eigen::MatrixXd> llt(theta);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const Index n = theta.rows();
  const Eigen::MatrixXd grad = llt.solve(Eigen::MatrixXd::Identity(n, n)) - s.s;
  const Eigen::MatrixXd& lam = lambda.matrix();
  double worst = 0.0;
  for (Index i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(grad(i, i)));
    for (Index j = i + 1; j < n; ++j) {
      if (std::isinf(lam(i, j))) continue;
      const double g = 0.5 * (grad(i, j) + grad(j, i));
      const double r = theta(i, j) != 0.0 ? std::abs(g - lam(i, j) * sign_of(theta(i, j)))
                                          : std::max(0.0, std::abs(g) - lam(i, j));
      worst = std::max(worst, r);
    }
  }
  return worst;
}

PrecisionEstimate weighted_glasso(const SampleCovariance& s, const PenaltyMatrix& lambda,
                                  const GlassoOptions& options) {
  const Index n = s.dim();
  if (n < 1 || s.s.cols() != n || !s.s.allFinite())
    throw InvalidArgument("sample covariance must be a finite square matrix");
  if (lambda.matrix().rows() != n) throw InvalidArgument("penalty and covariance sizes differ");
  if (!(options.tol > 0.0) || options.max_iter < 1)
    throw InvalidArgument("glasso needs tol > 0 and max_iter >= 1");

  const double scale = s.s.cwiseAbs().maxCoeff();
  const double hard = kHardPenaltyFactor * scale;
  Eigen::MatrixXd lam = lambda.matrix();
  std::vector<Pair> zero_set;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (std::isinf(lam(i, j))) {
        lam(i, j) = lam(j, i) = hard;
        zero_set.push_back({i, j});
      }
  check_well_posed(s.s, lambda.matrix());

  PrecisionEstimate out;
  out.zero_set = zero_set;
  if (n == 1) {
    out.theta = s.s.cwiseInverse();
    return out;
  }

  Eigen::MatrixXd w = s.s;
  if (!is_positive_definite(s.s)) {
    const Eigen::VectorXd d = s.s.diagonal();
    w *= 0.9;
    w.diagonal() = d;
  }
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  const double kkt_tol = options.tol * s.s.diagonal().maxCoeff();

  double previous = -std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  for (int sweep = 1; sweep <= options.max_iter; ++sweep) {
    for (Index j = 0; j < n; ++j) {
      const auto idx = all_but(n, j);
      const Eigen::MatrixXd w11 = w(idx, idx);
      const Eigen::VectorXd s12 = s.s(idx, j);
      const Eigen::VectorXd lam12 = lam(idx, j);
      Eigen::VectorXd beta = b(idx, j);
      solve_lasso(w11, s12, lam12, beta);
      if (!beta.allFinite())
        throw NonConvergence("weighted_glasso: column subproblem diverged", sweep, residual);
      const Eigen::VectorXd w12 = w11 * beta;
      w(idx, j) = w12;
      w(j, idx) = w12.transpose();
      b(idx, j) = beta;
    }

    Eigen::MatrixXd theta = assemble_precision(w, b);
    for (const Pair& z : zero_set) theta(z.i, z.j) = theta(z.j, z.i) = 0.0;
    const double objective = penalized_objective(theta, s, lambda);
    if (!std::isfinite(objective)) continue;
    residual = kkt_residual(theta, s, lambda);
    const double change = std::abs(objective - previous) / std::max(1.0, std::abs(objective));
    previous = objective;
    if (change < options.tol && residual <= kkt_tol) {
      if (!is_positive_definite(theta, 0.0)) {
        theta.diagonal().array() += kRidgeFactor * s.s.trace() / double(n);
        if (!is_positive_definite(theta, 0.0))
          throw SingularMatrix("weighted_glasso: estimate is not positive definite", INFINITY);
      }
      out.theta = std::move(theta);
      out.iterations = sweep;
      out.kkt_residual = residual;
      return out;
    }
  }
  throw NonConvergence("weighted_glasso: no convergence after " +
                           std::to_string(options.max_iter) + " sweeps (KKT residual " +
                           std::to_string(residual) + ")",
                       options.max_iter, residual);
}

PenaltyMatrix hard_zero_penalty(const AdjacencyMatrix& a_obs, const MaskPartition& mask) {
  const Index n = a_obs.nodes();
  if (mask.nodes() != n) throw InvalidArgument("mask and adjacency sizes differ");
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(n, n);
  for (Index p : mask.observed()) {
    const Pair e = pair_at(n, p);
    if (!a_obs.has_edge(e.i, e.j)) lam(e.i, e.j) = lam(e.j, e.i) = INFINITY;
  }
  return PenaltyMatrix(std::move(lam));
}

PrecisionEstimate constrained_mle(const SampleCovariance& s, const AdjacencyMatrix& a_obs,
                                  const MaskPartition& mask, const GlassoOptions& options) {
  return weighted_glasso(s, hard_zero_penalty(a_obs, mask), options);
}

AdjacencyMatrix support(const Eigen::MatrixXd& theta) {
  Eigen::MatrixXd a = (theta.array() != 0.0).cast<double>();
  a.diagonal().setZero();
  return AdjacencyMatrix(std::move(a));
}

}  // namespace lggm
