// Annealed Langevin sampling of the unknown part of an adjacency matrix,
// the sample-mean estimator, and an enumeration oracle for small problems.
#ifndef LGGM_SAMPLER_HPP
#define LGGM_SAMPLER_HPP

#include "lggm/covsel.hpp"
#include "lggm/graph.hpp"
#include "lggm/schedule.hpp"
#include "lggm/scores.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace lggm {

/// Everything the sampler conditions on.
struct LangevinProblem {
  PrecisionEstimate theta_hat;
  AdjacencyMatrix a_obs;  // values at unknown pairs are ignored
  MaskPartition mask;
  SampleCovariance s;
  double k = 0.0;  // number of observations behind `s`

  void validate() const;
};

enum class ScoreMode {
  posterior,        // likelihood + prior
  prior_only,       // prior score alone
  likelihood_only,  // likelihood score alone
};

struct SampleOptions {
  ScoreMode mode = ScoreMode::posterior;
  double init_mean = 0.5;
  double init_std = std::sqrt(0.5);  // N(0.5, 0.5 I) read as a covariance
  LikelihoodScoreOptions likelihood;
};

struct SamplerConfig {
  NoiseSchedule schedule = default_schedule();
  int samples = 10;
  std::uint64_t seed = 0;
  double tau = 0.5;
  SampleOptions options;
  int threads = 0;  // 0 = hardware concurrency
};

struct PosteriorSamples {
  std::vector<AdjacencyMatrix> samples;
  RelaxedAdjacency mean;  // fraction of samples with an edge, entry-wise
};

/// Raised when a Langevin chain cannot evaluate its score.
class SamplingError : public Error {
 public:
  SamplingError(const std::string& what, std::size_t level, int step)
      : Error(what), level_(level), step_(step) {}
  std::size_t level() const { return level_; }
  int step() const { return step_; }

 private:
  std::size_t level_;
  int step_;
};

/// One annealed Langevin chain. Unknown entries start at N(init_mean, init_std^2),
/// observed entries stay fixed at a_obs, and every step moves each unknown pair
/// by alpha_l * score + sqrt(2 alpha_l) * z with one z per pair. Returns the
/// final state projected onto {0, 1}. `prior` may be null (zero prior score).
///
/// When the likelihood is used, the state stays where Theta_hat o (A + I) is
/// positive definite: initial draws are repeated (falling back to 1 on every
/// unknown pair) and a step leaving that set is redrawn with half the increment,
/// up to 20 times, before the chain stays put. The state is also kept inside the
/// clamping box of the likelihood. A chain whose score evaluation
/// fails is restarted once.
AdjacencyMatrix sample_one(const LangevinProblem& problem, const ScoreEstimator* prior,
                           const NoiseSchedule& schedule, Rng& rng,
                           const SampleOptions& options = {});

/// `config.samples` independent chains; chain m uses the stream derive_seed(seed, m).
PosteriorSamples sample_posterior(const LangevinProblem& problem, const ScoreEstimator* prior,
                                  const SamplerConfig& config);

PosteriorSamples summarize(std::vector<AdjacencyMatrix> samples);

/// Indicator(mean >= tau). Observed entries, being identical across samples,
/// come out unchanged for every tau in (0, 1].
AdjacencyMatrix estimate(const PosteriorSamples& samples, double tau);

/// Probability of each completion of the unknown pairs. Bit b of a pattern
/// index is the value at half-vector position unknown[b].
struct PatternDistribution {
  std::vector<Index> unknown;
  std::vector<double> probability;

  std::size_t pattern_of(const AdjacencyMatrix& a) const;
  AdjacencyMatrix completion(const AdjacencyMatrix& a_obs, std::size_t pattern) const;
};

/// Enumerates every completion A of the unknown pairs with weight
/// L_X(Theta_hat o (A + I)) * p(A), where p is the empirical frequency of A's
/// unknown part among same-size dataset graphs that agree with a_obs on the
/// observed pairs (uniform when none agree). k == 0 drops the likelihood.
PatternDistribution exact_posterior_oracle(const LangevinProblem& problem,
                                           const GraphDataset& dataset);

/// Total-variation distance between the oracle and the empirical pattern
/// frequencies of `samples`.
double total_variation(const PatternDistribution& oracle,
                       const std::vector<AdjacencyMatrix>& samples);

}  // namespace lggm

#endif  // LGGM_SAMPLER_HPP
