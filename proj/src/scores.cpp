#include "lggm/scores.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace lggm {

namespace {

Eigen::MatrixXd stack_half_vectors(const std::vector<AdjacencyMatrix>& graphs) {
  const Index n = graphs.front().nodes();
  Eigen::MatrixXd c(half_dim(n), static_cast<Index>(graphs.size()));
  for (std::size_t g = 0; g < graphs.size(); ++g) c.col(static_cast<Index>(g)) = graphs[g].half();
  return c;
}

// Softmax responsibilities of each column of `centers` for point `a`.
Eigen::VectorXd responsibilities(const Eigen::MatrixXd& centers, const Eigen::VectorXd& a,
                                 double sigma, double* log_sum = nullptr) {
  const Eigen::VectorXd logw =
      -(centers.colwise() - a).colwise().squaredNorm().transpose() / (2.0 * sigma * sigma);
  const double top = logw.maxCoeff();
  Eigen::VectorXd w = (logw.array() - top).exp();
  const double total = w.sum();
  if (log_sum) *log_sum = top + std::log(total);
  return w / total;
}

void check_prior_inputs(const Eigen::VectorXd& a_tilde, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("noise level sigma must be > 0");
  if (!a_tilde.allFinite()) throw InvalidArgument("prior score input must be finite");
}

[[noreturn]] void throw_no_same_size(Index n) {
  throw InvalidArgument("dataset has no graph with " + std::to_string(n) +
                        " nodes; filter the problem or augment the dataset");
}

AdjacencyMatrix relabel(const AdjacencyMatrix& a, Rng& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(a.nodes()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  AdjacencyMatrix out(a.nodes());
  for (const Pair& e : a.edges()) out.set_edge(perm[e.i], perm[e.j], true);
  return out;
}

}  // namespace

GraphDataset::GraphDataset(std::vector<AdjacencyMatrix> graphs) : graphs_(std::move(graphs)) {
  if (graphs_.empty()) throw InvalidArgument("graph dataset must not be empty");
}

std::vector<AdjacencyMatrix> GraphDataset::with_nodes(Index n) const {
  std::vector<AdjacencyMatrix> out;
  for (const auto& g : graphs_)
    if (g.nodes() == n) out.push_back(g);
  return out;
}

EmpiricalPriorScore::EmpiricalPriorScore(const GraphDataset& dataset, int relabelings,
                                         std::uint64_t seed) {
  if (relabelings < 0) throw InvalidArgument("relabelings must be >= 0");
  Rng rng(seed);
  std::map<Index, std::vector<AdjacencyMatrix>> by_size;
  for (const auto& g : dataset.graphs()) {
    auto& bucket = by_size[g.nodes()];
    bucket.push_back(g);
    for (int r = 0; r < relabelings; ++r) bucket.push_back(relabel(g, rng));
  }
  for (const auto& [n, graphs] : by_size)
    if (n >= 2) centers_.emplace(n, stack_half_vectors(graphs));
}

Index EmpiricalPriorScore::components(Index n) const {
  const auto it = centers_.find(n);
  return it == centers_.end() ? 0 : it->second.cols();
}

Eigen::VectorXd EmpiricalPriorScore::evaluate(const Eigen::VectorXd& a_tilde, double sigma) const {
  check_prior_inputs(a_tilde, sigma);
  const Index n = nodes_from_half_dim(a_tilde.size());
  const auto it = centers_.find(n);
  if (it == centers_.end()) throw_no_same_size(n);
  const Eigen::VectorXd w = responsibilities(it->second, a_tilde, sigma);
  return (it->second * w - a_tilde) / (sigma * sigma);
}

Eigen::VectorXd empirical_prior_score(const GraphDataset& dataset, const Eigen::VectorXd& a_tilde,
                                      double sigma) {
  check_prior_inputs(a_tilde, sigma);
  const Index n = nodes_from_half_dim(a_tilde.size());
  const auto graphs = dataset.with_nodes(n);
  if (graphs.empty()) throw_no_same_size(n);
  const Eigen::MatrixXd centers = stack_half_vectors(graphs);
  const Eigen::VectorXd w = responsibilities(centers, a_tilde, sigma);
  return (centers * w - a_tilde) / (sigma * sigma);
}

double empirical_prior_log_density(const GraphDataset& dataset, const Eigen::VectorXd& a_tilde,
                                   double sigma) {
  check_prior_inputs(a_tilde, sigma);
  const Index n = nodes_from_half_dim(a_tilde.size());
  const auto graphs = dataset.with_nodes(n);
  if (graphs.empty()) throw_no_same_size(n);
  double log_sum = 0.0;
  responsibilities(stack_half_vectors(graphs), a_tilde, sigma, &log_sum);
  const double d = double(a_tilde.size());
  return log_sum - std::log(double(graphs.size())) -
         0.5 * d * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

Eigen::MatrixXd masked_precision(const Eigen::MatrixXd& theta_hat, const RelaxedAdjacency& a_tilde,
                                 double clamp_low, double clamp_high) {
  if (theta_hat.rows() != a_tilde.nodes() || theta_hat.cols() != a_tilde.nodes())
    throw InvalidArgument("masked_precision: dimension mismatch");
  Eigen::MatrixXd mask = a_tilde.matrix().cwiseMax(clamp_low).cwiseMin(clamp_high);
  mask.diagonal().setOnes();
  return theta_hat.cwiseProduct(mask);
}

double masked_log_likelihood(const Eigen::MatrixXd& theta_hat, const RelaxedAdjacency& a_tilde,
                             const SampleCovariance& s, double k) {
  const Eigen::MatrixXd t = masked_precision(theta_hat, a_tilde, -INFINITY, INFINITY);
  Eigen::LLT<Eigen::MatrixXd> llt(t);
  if (llt.info() != Eigen::Success) return -INFINITY;
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * k * (logdet - s.s.cwiseProduct(t).sum());
}

Eigen::VectorXd likelihood_score(const PrecisionEstimate& theta_hat,
                                 const RelaxedAdjacency& a_tilde, const SampleCovariance& s,
                                 double k, const LikelihoodScoreOptions& options) {
  const Index n = a_tilde.nodes();
  if (theta_hat.dim() != n || s.dim() != n)
    throw InvalidArgument("likelihood_score: dimension mismatch");
  Eigen::MatrixXd t =
      masked_precision(theta_hat.theta, a_tilde, options.clamp_low, options.clamp_high);
  Eigen::LLT<Eigen::MatrixXd> llt(t);
  if (llt.info() != Eigen::Success) {
    const double ridge = options.ridge.value_or(1e-4 * theta_hat.theta.trace() / double(n));
    t.diagonal().array() += ridge;
    llt.compute(t);
    if (llt.info() != Eigen::Success) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t, Eigen::EigenvaluesOnly);
      const Eigen::VectorXd ev = eig.eigenvalues().cwiseAbs();
      const double cond = ev.minCoeff() > 0.0 ? ev.maxCoeff() / ev.minCoeff() : INFINITY;
      throw SingularMatrix("likelihood_score: masked precision is not positive definite "
                           "after ridge (condition estimate " + std::to_string(cond) + ")",
                           cond);
    }
  }
  const Eigen::MatrixXd delta = llt.solve(Eigen::MatrixXd::Identity(n, n)) - s.s;
  Eigen::VectorXd score(half_dim(n));
  Index p = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      score(p++) = k * theta_hat.theta(i, j) * 0.5 * (delta(i, j) + delta(j, i));
  return score;
}

Eigen::VectorXd posterior_score(const PrecisionEstimate& theta_hat,
                                const RelaxedAdjacency& a_tilde, const SampleCovariance& s,
                                double k, const ScoreEstimator& prior, double sigma,
                                const LikelihoodScoreOptions& options) {
  return likelihood_score(theta_hat, a_tilde, s, k, options) +
         prior.evaluate(a_tilde.half(), sigma);
}

double denoising_loss(const DenoisingModel& model, const GraphDataset& dataset,
                      const NoiseSchedule& schedule, int mc_samples, std::uint64_t seed) {
  schedule.validate();
  if (mc_samples < 1) throw InvalidArgument("mc_samples must be >= 1");
  std::vector<Eigen::VectorXd> clean;
  clean.reserve(dataset.size());
  for (const auto& g : dataset.graphs()) clean.push_back(g.half());

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, clean.size() - 1);
  std::normal_distribution<double> normal;
  double total = 0.0;
  for (const double sigma : schedule.levels) {
    double acc = 0.0;
    for (int m = 0; m < mc_samples; ++m) {
      const Eigen::VectorXd& a = clean[pick(rng)];
      Eigen::VectorXd noisy(a.size());
      for (Index q = 0; q < a.size(); ++q) noisy(q) = a(q) + sigma * normal(rng);
      const Eigen::VectorXd target = (a - noisy) / (sigma * sigma);
      acc += (model(noisy, a, sigma) - target).squaredNorm();
    }
    total += sigma * sigma * acc / double(mc_samples);
  }
  return total / (2.0 * double(schedule.levels.size()));
}

double denoising_loss(const ScoreEstimator& estimator, const GraphDataset& dataset,
                      const NoiseSchedule& schedule, int mc_samples, std::uint64_t seed) {
  return denoising_loss(
      [&](const Eigen::VectorXd& noisy, const Eigen::VectorXd&, double sigma) {
        return estimator.evaluate(noisy, sigma);
      },
      dataset, schedule, mc_samples, seed);
}

}  // namespace lggm
