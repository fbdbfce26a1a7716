// Score functions for the annealed Langevin sampler: the closed-form
// likelihood score of a masked precision, the annealed score of an empirical
// graph prior, and the denoising score-matching loss used to evaluate any
// score estimator.
#ifndef LGGM_SCORES_HPP
#define LGGM_SCORES_HPP

#include "lggm/covsel.hpp"
#include "lggm/graph.hpp"
#include "lggm/schedule.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace lggm {

/// Non-empty collection of adjacency matrices, possibly of different sizes.
class GraphDataset {
 public:
  explicit GraphDataset(std::vector<AdjacencyMatrix> graphs);

  const std::vector<AdjacencyMatrix>& graphs() const { return graphs_; }
  std::size_t size() const { return graphs_.size(); }

  /// Graphs with exactly n nodes.
  std::vector<AdjacencyMatrix> with_nodes(Index n) const;

 private:
  std::vector<AdjacencyMatrix> graphs_;
};

/// Estimates grad log p_sigma(a_tilde) for half-vectorized relaxed adjacencies.
/// Implementations must be safe to call concurrently from several threads.
class ScoreEstimator {
 public:
  virtual ~ScoreEstimator() = default;
  virtual Eigen::VectorXd evaluate(const Eigen::VectorXd& a_tilde, double sigma) const = 0;
};

class ZeroScore final : public ScoreEstimator {
 public:
  Eigen::VectorXd evaluate(const Eigen::VectorXd& a_tilde, double) const override {
    return Eigen::VectorXd::Zero(a_tilde.size());
  }
};

/// Exact annealed score of the empirical prior: the gradient of
/// log (1/N) sum_i N(a_tilde; a_i, sigma^2 I) over the same-size dataset graphs.
class EmpiricalPriorScore final : public ScoreEstimator {
 public:
  /// `relabelings` random node permutations of every graph are added to the
  /// mixture (0 keeps the dataset as given).
  explicit EmpiricalPriorScore(const GraphDataset& dataset, int relabelings = 0,
                               std::uint64_t seed = 0);

  Eigen::VectorXd evaluate(const Eigen::VectorXd& a_tilde, double sigma) const override;

  /// Number of mixture components for n-node graphs.
  Index components(Index n) const;

 private:
  // Each matrix holds one component's half-vector per column.
  std::map<Index, Eigen::MatrixXd> centers_;
};

/// Free-function form of EmpiricalPriorScore::evaluate (no augmentation).
Eigen::VectorXd empirical_prior_score(const GraphDataset& dataset, const Eigen::VectorXd& a_tilde,
                                      double sigma);

/// log p_sigma(a_tilde) of the same empirical mixture, including the Gaussian
/// normalizer.
double empirical_prior_log_density(const GraphDataset& dataset, const Eigen::VectorXd& a_tilde,
                                   double sigma);

struct LikelihoodScoreOptions {
  double clamp_low = -1.0;
  double clamp_high = 2.0;
  /// Diagonal ridge tried once when the masked precision is not positive
  /// definite. Defaults to 1e-4 * tr(Theta_hat) / n.
  std::optional<double> ridge;
};

/// Theta_hat o (A_tilde + I), with A_tilde clamped to [clamp_low, clamp_high].
Eigen::MatrixXd masked_precision(const Eigen::MatrixXd& theta_hat, const RelaxedAdjacency& a_tilde,
                                 double clamp_low = -1.0, double clamp_high = 2.0);

/// (k/2) [log det T - tr(S T)] for T = Theta_hat o (A_tilde + I); -inf when T is not PD.
double masked_log_likelihood(const Eigen::MatrixXd& theta_hat, const RelaxedAdjacency& a_tilde,
                             const SampleCovariance& s, double k);

/// Derivative of (k/2)[log det T - tr(S T)], T = Theta_hat o (A_tilde + I),
/// with respect to every half-vector entry of A_tilde. For pair (i, j) this
/// is k * Theta_hat_ij * (T^{-1} - S)_ij.
///
/// Throws SingularMatrix (carrying a condition estimate) when T stays
/// indefinite after one ridge retry.
Eigen::VectorXd likelihood_score(const PrecisionEstimate& theta_hat,
                                 const RelaxedAdjacency& a_tilde, const SampleCovariance& s,
                                 double k, const LikelihoodScoreOptions& options = {});

/// likelihood_score + prior.evaluate(vech(A_tilde), sigma).
Eigen::VectorXd posterior_score(const PrecisionEstimate& theta_hat,
                                const RelaxedAdjacency& a_tilde, const SampleCovariance& s,
                                double k, const ScoreEstimator& prior, double sigma,
                                const LikelihoodScoreOptions& options = {});

/// Score model that may peek at the clean sample (used for oracle estimators).
using DenoisingModel = std::function<Eigen::VectorXd(
    const Eigen::VectorXd& a_tilde, const Eigen::VectorXd& clean, double sigma)>;

/// Monte-Carlo estimate of (1/2L) sum_l sigma_l^2 E|g(a~, sigma_l) - (a - a~)/sigma_l^2|^2
/// with a uniform over the dataset and a~ = a + N(0, sigma_l^2 I).
double denoising_loss(const ScoreEstimator& estimator, const GraphDataset& dataset,
                      const NoiseSchedule& schedule, int mc_samples, std::uint64_t seed);

double denoising_loss(const DenoisingModel& model, const GraphDataset& dataset,
                      const NoiseSchedule& schedule, int mc_samples, std::uint64_t seed);

}  // namespace lggm

#endif  // LGGM_SCORES_HPP
