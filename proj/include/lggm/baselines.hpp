// Comparator estimators and bootstrap edge fixing.
#ifndef LGGM_BASELINES_HPP
#define LGGM_BASELINES_HPP

#include "lggm/covsel.hpp"
#include "lggm/graph.hpp"

#include <span>
#include <utility>

namespace lggm {

/// lambda(k) = a log(k)^2 + b log(k) + c, clipped at zero.
struct LambdaCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double operator()(double k) const;
};

/// Indicator(|Theta_ij| >= t) off the diagonal; entries in the estimate's
/// zero set stay 0.
AdjacencyMatrix threshold_baseline(const PrecisionEstimate& theta_hat, double t);

/// Penalty lambda on unknown pairs, hard zero on observed zeros, none on observed ones.
PenaltyMatrix wgl_penalty(const AdjacencyMatrix& a_obs, const MaskPartition& mask, double lambda);

PrecisionEstimate wgl_estimate(const SampleCovariance& s, const AdjacencyMatrix& a_obs,
                               const MaskPartition& mask, double lambda,
                               const GlassoOptions& options = {});

/// Support of wgl_estimate.
AdjacencyMatrix wgl_baseline(const SampleCovariance& s, const AdjacencyMatrix& a_obs,
                             const MaskPartition& mask, double lambda,
                             const GlassoOptions& options = {});

/// Least-squares fit on (log k)^2, log k, 1. Needs at least three distinct k.
LambdaCurve fit_lambda_curve(std::span<const std::pair<double, double>> points);

struct BootstrapResult {
  RelaxedAdjacency frequency;  // fraction of resamples with a nonzero entry
  int resamples = 0;           // successful resamples
  int failures = 0;
  double margin = 0.0;
  AdjacencyMatrix a_obs;  // fixed values (unknown pairs hold 0)
  MaskPartition mask;
};

/// Fixes A_ij = 0 where frequency < 0.5 - p_m and A_ij = 1 where frequency > 0.5 + p_m.
BootstrapResult fix_from_frequencies(const RelaxedAdjacency& frequency, int resamples,
                                     double p_m);

/// Graphical random lasso: B column resamples of X (with replacement), a
/// uniform-lambda graphical lasso on each, averaged support indicators, then
/// the margin rule above. A failed resample is redrawn once and otherwise
/// counted in `failures`.
BootstrapResult bootstrap_fix(const ObservationSet& x, double lambda, int resamples, double p_m,
                              Rng& rng, int threads = 1, const GlassoOptions& options = {});

}  // namespace lggm

#endif  // LGGM_BASELINES_HPP
