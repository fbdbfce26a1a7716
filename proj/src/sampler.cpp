#include "lggm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lggm {

namespace {

constexpr Index kMaxOracleUnknowns = 12;
constexpr int kMaxInitDraws = 100;
constexpr int kMaxProposals = 20;

// The likelihood is zero unless Theta_hat o (A + I) is positive definite, so
// chains that use it are kept inside that set.
bool admissible(const LangevinProblem& problem, const SampleOptions& options,
                const Eigen::VectorXd& state) {
  const Eigen::MatrixXd t =
      masked_precision(problem.theta_hat.theta, RelaxedAdjacency::from_half(state),
                       options.likelihood.clamp_low, options.likelihood.clamp_high);
  return Eigen::LLT<Eigen::MatrixXd>(t).info() == Eigen::Success;
}

void run_chain(const LangevinProblem& problem, const ScoreEstimator* prior,
               const NoiseSchedule& schedule, Rng& rng, const SampleOptions& options,
               Eigen::VectorXd& state) {
  const auto& unknown = problem.mask.unknown();
  std::normal_distribution<double> normal;
  const bool use_likelihood = options.mode != ScoreMode::prior_only;
  const bool use_prior = options.mode != ScoreMode::likelihood_only && prior != nullptr;
  const Index dim = state.size();

  bool placed = false;
  for (int draw = 0; draw < kMaxInitDraws && !placed; ++draw) {
    for (Index q : unknown) state(q) = options.init_mean + options.init_std * normal(rng);
    placed = !use_likelihood || admissible(problem, options, state);
  }
  // All-ones on the unknown pairs gives Theta_hat itself.
  if (!placed)
    for (Index q : unknown) state(q) = 1.0;

  Eigen::VectorXd proposal = state;
  for (std::size_t level = 0; level < schedule.levels.size(); ++level) {
    const double sigma = schedule.levels[level];
    const double alpha = schedule.step_size(level);
    const double noise_scale = std::sqrt(2.0 * alpha);
    for (int t = 0; t < schedule.steps_per_level; ++t) {
      try {
        Eigen::VectorXd delta = Eigen::VectorXd::Zero(dim);
        if (use_likelihood)
          delta += likelihood_score(problem.theta_hat, RelaxedAdjacency::from_half(state),
                                    problem.s, problem.k, options.likelihood);
        if (use_prior) delta += prior->evaluate(state, sigma);
        // Rejected moves are retried with a fresh draw and half the increment.
        double shrink = 1.0;
        for (int attempt = 0; attempt < kMaxProposals; ++attempt, shrink *= 0.5) {
          proposal = state;
          for (Index q : unknown)
            proposal(q) += shrink * (alpha * delta(q) + noise_scale * normal(rng));
          if (!proposal.allFinite()) throw Error("state diverged");
          if (use_likelihood)
            for (Index q : unknown)
              proposal(q) = std::clamp(proposal(q), options.likelihood.clamp_low,
                                       options.likelihood.clamp_high);
          if (!use_likelihood || admissible(problem, options, proposal)) {
            state.swap(proposal);
            break;
          }
        }
      } catch (const Error& e) {
        throw SamplingError("Langevin chain failed at level " + std::to_string(level + 1) +
                                ", step " + std::to_string(t + 1) + ": " + e.what(),
                            level + 1, t + 1);
      }
    }
  }
}

}  // namespace

void LangevinProblem::validate() const {
  const Index n = a_obs.nodes();
  if (theta_hat.dim() != n || mask.nodes() != n || s.dim() != n)
    throw InvalidArgument("Langevin problem: dimension mismatch");
  if (!(k >= 0.0)) throw InvalidArgument("Langevin problem: k must be >= 0");
}

AdjacencyMatrix sample_one(const LangevinProblem& problem, const ScoreEstimator* prior,
                           const NoiseSchedule& schedule, Rng& rng, const SampleOptions& options) {
  problem.validate();
  schedule.validate();
  if (problem.mask.unknown().empty()) return problem.a_obs;

  const Eigen::VectorXd fixed = problem.a_obs.half();
  Eigen::VectorXd state = fixed;
  try {
    run_chain(problem, prior, schedule, rng, options, state);
  } catch (const SamplingError&) {
    state = fixed;
    run_chain(problem, prior, schedule, rng, options, state);
  }

  Eigen::VectorXd projected = (state.array() >= 0.5).cast<double>();
  for (Index q : problem.mask.observed()) projected(q) = fixed(q);
  return AdjacencyMatrix::from_half(projected);
}

PosteriorSamples summarize(std::vector<AdjacencyMatrix> samples) {
  if (samples.empty()) throw InvalidArgument("need at least one posterior sample");
  const Index n = samples.front().nodes();
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& a : samples) {
    if (a.nodes() != n) throw InvalidArgument("posterior samples differ in size");
    counts += a.matrix();
  }
  RelaxedAdjacency mean(counts / double(samples.size()));
  return {std::move(samples), std::move(mean)};
}

PosteriorSamples sample_posterior(const LangevinProblem& problem, const ScoreEstimator* prior,
                                  const SamplerConfig& config) {
  if (config.samples < 1) throw InvalidArgument("sampler needs at least one sample");
  std::vector<AdjacencyMatrix> samples(static_cast<std::size_t>(config.samples));
  parallel_for(config.samples, config.threads, [&](Index m) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(m)));
    samples[static_cast<std::size_t>(m)] =
        sample_one(problem, prior, config.schedule, rng, config.options);
  });
  return summarize(std::move(samples));
}

AdjacencyMatrix estimate(const PosteriorSamples& samples, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidArgument("threshold tau must lie in (0, 1]");
  Eigen::MatrixXd a = (samples.mean.matrix().array() >= tau).cast<double>();
  a.diagonal().setZero();
  return AdjacencyMatrix(std::move(a));
}

std::size_t PatternDistribution::pattern_of(const AdjacencyMatrix& a) const {
  const Index n = a.nodes();
  std::size_t pattern = 0;
  for (std::size_t b = 0; b < unknown.size(); ++b) {
    const Pair e = pair_at(n, unknown[b]);
    if (a.has_edge(e.i, e.j)) pattern |= std::size_t{1} << b;
  }
  return pattern;
}

AdjacencyMatrix PatternDistribution::completion(const AdjacencyMatrix& a_obs,
                                                std::size_t pattern) const {
  AdjacencyMatrix a = a_obs;
  for (std::size_t b = 0; b < unknown.size(); ++b) {
    const Pair e = pair_at(a.nodes(), unknown[b]);
    a.set_edge(e.i, e.j, (pattern >> b) & 1U);
  }
  return a;
}

PatternDistribution exact_posterior_oracle(const LangevinProblem& problem,
                                           const GraphDataset& dataset) {
  problem.validate();
  const auto& unknown = problem.mask.unknown();
  if (static_cast<Index>(unknown.size()) > kMaxOracleUnknowns)
    throw InvalidArgument("exact_posterior_oracle: at most 12 unknown pairs supported");

  PatternDistribution out;
  out.unknown = unknown;
  const std::size_t patterns = std::size_t{1} << unknown.size();

  // Empirical prior over completions among dataset graphs consistent with a_obs.
  std::vector<double> prior_counts(patterns, 0.0);
  double consistent = 0.0;
  const Index n = problem.a_obs.nodes();
  for (const auto& g : dataset.with_nodes(n)) {
    bool agrees = true;
    for (Index q : problem.mask.observed()) {
      const Pair e = pair_at(n, q);
      if (g.has_edge(e.i, e.j) != problem.a_obs.has_edge(e.i, e.j)) {
        agrees = false;
        break;
      }
    }
    if (!agrees) continue;
    prior_counts[out.pattern_of(g)] += 1.0;
    consistent += 1.0;
  }

  std::vector<double> logw(patterns);
  double top = -INFINITY;
  for (std::size_t pat = 0; pat < patterns; ++pat) {
    const double log_prior =
        consistent > 0.0 ? std::log(prior_counts[pat] / consistent) : -std::log(double(patterns));
    double log_lik = 0.0;
    if (problem.k > 0.0 && std::isfinite(log_prior))
      log_lik = masked_log_likelihood(problem.theta_hat.theta,
                                      RelaxedAdjacency(out.completion(problem.a_obs, pat)),
                                      problem.s, problem.k);
    logw[pat] = log_prior + log_lik;
    top = std::max(top, logw[pat]);
  }
  if (!std::isfinite(top))
    throw Error("exact_posterior_oracle: every completion has zero posterior weight");

  out.probability.resize(patterns);
  double total = 0.0;
  for (std::size_t pat = 0; pat < patterns; ++pat) {
    out.probability[pat] = std::exp(logw[pat] - top);
    total += out.probability[pat];
  }
  for (double& p : out.probability) p /= total;
  return out;
}

double total_variation(const PatternDistribution& oracle,
                       const std::vector<AdjacencyMatrix>& samples) {
  if (samples.empty()) throw InvalidArgument("total_variation: no samples");
  std::vector<double> freq(oracle.probability.size(), 0.0);
  for (const auto& a : samples) freq[oracle.pattern_of(a)] += 1.0 / double(samples.size());
  double tv = 0.0;
  for (std::size_t p = 0; p < freq.size(); ++p) tv += std::abs(freq[p] - oracle.probability[p]);
  return 0.5 * tv;
}

}  // namespace lggm
