// Sample covariance and (weighted, constrained) graphical-lasso precision estimation.
#ifndef LGGM_COVSEL_HPP
#define LGGM_COVSEL_HPP

#include "lggm/graph.hpp"

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace lggm {

/// n x k matrix whose columns are zero-mean observations.
class ObservationSet {
 public:
  explicit ObservationSet(Eigen::MatrixXd x);
  Index variables() const { return x_.rows(); }
  Index samples() const { return x_.cols(); }
  const Eigen::MatrixXd& matrix() const { return x_; }

 private:
  Eigen::MatrixXd x_;
};

struct SampleCovariance {
  Eigen::MatrixXd s;
  Index dim() const { return s.rows(); }
};

/// Per-entry l1 weights. Symmetric, non-negative, zero diagonal. An entry of
/// +infinity is a hard zero constraint on the corresponding precision entry.
class PenaltyMatrix {
 public:
  explicit PenaltyMatrix(Eigen::MatrixXd lambda);
  static PenaltyMatrix uniform(Index n, double lambda);

  const Eigen::MatrixXd& matrix() const { return lambda_; }
  bool is_hard_zero(Index i, Index j) const { return std::isinf(lambda_(i, j)); }

 private:
  Eigen::MatrixXd lambda_;
};

/// Symmetric positive-definite precision matrix, exactly zero on `zero_set`.
struct PrecisionEstimate {
  Eigen::MatrixXd theta;
  std::vector<Pair> zero_set;
  int iterations = 0;
  double kkt_residual = 0.0;

  Index dim() const { return theta.rows(); }
};

struct GlassoOptions {
  double tol = 1e-8;  // relative objective change and KKT residual
  int max_iter = 500;
};

SampleCovariance sample_covariance(const ObservationSet& obs);

/// Stationary point of log det T - tr(S T) - sum_ij L_ij |T_ij| over T > 0.
///
/// Block coordinate descent over columns (graphical lasso); each column's lasso
/// subproblem is solved by coordinate descent and polished by an exact solve on
/// its active set. Hard zeros (infinite penalties) are run as a penalty of
/// 1e6 * max|S| and then set to exactly zero.
///
/// Throws InvalidArgument on an ill-posed problem (singular S without enough
/// penalization) and NonConvergence after `max_iter` sweeps.
PrecisionEstimate weighted_glasso(const SampleCovariance& s, const PenaltyMatrix& lambda,
                                  const GlassoOptions& options = {});

/// Maximum-likelihood precision with T_ij = 0 wherever the observed adjacency is 0.
PrecisionEstimate constrained_mle(const SampleCovariance& s, const AdjacencyMatrix& a_obs,
                                  const MaskPartition& mask, const GlassoOptions& options = {});

/// Penalty used for constrained_mle: +inf on observed zeros, 0 elsewhere.
PenaltyMatrix hard_zero_penalty(const AdjacencyMatrix& a_obs, const MaskPartition& mask);

/// log det T - tr(S T) - sum_{i != j, finite L} L_ij |T_ij|; -inf if T is not PD.
double penalized_objective(const Eigen::MatrixXd& theta, const SampleCovariance& s,
                           const PenaltyMatrix& lambda);

/// Largest violation of the stationarity conditions at `theta`.
double kkt_residual(const Eigen::MatrixXd& theta, const SampleCovariance& s,
                    const PenaltyMatrix& lambda);

/// Support of the off-diagonal part of `theta` as an adjacency matrix.
AdjacencyMatrix support(const Eigen::MatrixXd& theta);

}  // namespace lggm

#endif  // LGGM_COVSEL_HPP
