#include "lggm/baselines.hpp"

#include <Eigen/QR>

#include <cmath>
#include <set>

namespace lggm {

double LambdaCurve::operator()(double k) const {
  const double l = std::log(k);
  return std::max(0.0, a * l * l + b * l + c);
}

AdjacencyMatrix threshold_baseline(const PrecisionEstimate& theta_hat, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("threshold must be >= 0");
  Eigen::MatrixXd a = (theta_hat.theta.array().abs() >= t).cast<double>();
  a.diagonal().setZero();
  for (const Pair& z : theta_hat.zero_set) a(z.i, z.j) = a(z.j, z.i) = 0.0;
  return AdjacencyMatrix(std::move(a));
}

PenaltyMatrix wgl_penalty(const AdjacencyMatrix& a_obs, const MaskPartition& mask, double lambda) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be >= 0");
  const Index n = a_obs.nodes();
  if (mask.nodes() != n) throw InvalidArgument("mask and adjacency sizes differ");
  Eigen::MatrixXd lam = Eigen::MatrixXd::Zero(n, n);
  for (Index p = 0; p < mask.dim(); ++p) {
    const Pair e = pair_at(n, p);
    double v = lambda;
    if (mask.is_observed(p)) v = a_obs.has_edge(e.i, e.j) ? 0.0 : INFINITY;
    lam(e.i, e.j) = lam(e.j, e.i) = v;
  }
  return PenaltyMatrix(std::move(lam));
}

PrecisionEstimate wgl_estimate(const SampleCovariance& s, const AdjacencyMatrix& a_obs,
                               const MaskPartition& mask, double lambda,
                               const GlassoOptions& options) {
  return weighted_glasso(s, wgl_penalty(a_obs, mask, lambda), options);
}

AdjacencyMatrix wgl_baseline(const SampleCovariance& s, const AdjacencyMatrix& a_obs,
                             const MaskPartition& mask, double lambda,
                             const GlassoOptions& options) {
  return support(wgl_estimate(s, a_obs, mask, lambda, options).theta);
}

LambdaCurve fit_lambda_curve(std::span<const std::pair<double, double>> points) {
  std::set<double> distinct;
  for (const auto& [k, lambda] : points) {
    if (!(k > 0.0)) throw InvalidArgument("fit_lambda_curve: k must be > 0");
    distinct.insert(k);
  }
  if (distinct.size() < 3)
    throw InvalidArgument("fit_lambda_curve: need at least three distinct k values");
  const auto m = static_cast<Index>(points.size());
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd target(m);
  for (Index r = 0; r < m; ++r) {
    const double l = std::log(points[static_cast<std::size_t>(r)].first);
    design.row(r) << l * l, l, 1.0;
    target(r) = points[static_cast<std::size_t>(r)].second;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw InvalidArgument("fit_lambda_curve: rank-deficient design");
  const Eigen::Vector3d coef = qr.solve(target);
  return {coef(0), coef(1), coef(2)};
}

BootstrapResult fix_from_frequencies(const RelaxedAdjacency& frequency, int resamples,
                                     double p_m) {
  if (!(p_m >= 0.0 && p_m <= 0.5)) throw InvalidArgument("margin p_m must lie in [0, 0.5]");
  const Index n = frequency.nodes();
  std::vector<bool> observed(static_cast<std::size_t>(half_dim(n)), false);
  AdjacencyMatrix fixed(n);
  for (Index p = 0; p < half_dim(n); ++p) {
    const Pair e = pair_at(n, p);
    const double f = frequency(e.i, e.j);
    if (f < 0.5 - p_m) {
      observed[static_cast<std::size_t>(p)] = true;
    } else if (f > 0.5 + p_m) {
      observed[static_cast<std::size_t>(p)] = true;
      fixed.set_edge(e.i, e.j, true);
    }
  }
  BootstrapResult out;
  out.frequency = frequency;
  out.resamples = resamples;
  out.margin = p_m;
  out.a_obs = std::move(fixed);
  out.mask = MaskPartition(n, std::move(observed));
  return out;
}

BootstrapResult bootstrap_fix(const ObservationSet& x, double lambda, int resamples, double p_m,
                              Rng& rng, int threads, const GlassoOptions& options) {
  if (resamples < 1) throw InvalidArgument("bootstrap needs at least one resample");
  if (!(p_m >= 0.0 && p_m <= 0.5)) throw InvalidArgument("margin p_m must lie in [0, 0.5]");
  const Index n = x.variables();
  const Index k = x.samples();
  const std::uint64_t base = rng();
  const PenaltyMatrix penalty = PenaltyMatrix::uniform(n, lambda);

  std::vector<Eigen::MatrixXd> supports(static_cast<std::size_t>(resamples));
  std::vector<bool> ok(static_cast<std::size_t>(resamples), false);
  parallel_for(resamples, threads, [&](Index b) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      Rng local(derive_seed(base, static_cast<std::uint64_t>(b + attempt * resamples)));
      std::uniform_int_distribution<Index> pick(0, k - 1);
      Eigen::MatrixXd xb(n, k);
      for (Index c = 0; c < k; ++c) xb.col(c) = x.matrix().col(pick(local));
      try {
        const auto est = weighted_glasso(sample_covariance(ObservationSet(xb)), penalty, options);
        supports[static_cast<std::size_t>(b)] = support(est.theta).matrix();
        ok[static_cast<std::size_t>(b)] = true;
        return;
      } catch (const Error&) {
      }
    }
  });

  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(n, n);
  int succeeded = 0;
  for (int b = 0; b < resamples; ++b)
    if (ok[static_cast<std::size_t>(b)]) {
      total += supports[static_cast<std::size_t>(b)];
      ++succeeded;
    }
  if (succeeded == 0) throw Error("bootstrap_fix: every resample failed to solve");
  BootstrapResult out = fix_from_frequencies(RelaxedAdjacency(total / double(succeeded)),
                                             succeeded, p_m);
  out.failures = resamples - succeeded;
  return out;
}

}  // namespace lggm
