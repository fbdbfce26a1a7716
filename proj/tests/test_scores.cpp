#include "doctest.h"

#include "lggm/generators.hpp"
#include "lggm/scores.hpp"
#include "oracles.hpp"

using namespace lggm;

namespace {

Eigen::MatrixXd centers_of(const std::vector<AdjacencyMatrix>& graphs) {
  Eigen::MatrixXd c(graphs.front().half().size(), static_cast<Index>(graphs.size()));
  for (std::size_t g = 0; g < graphs.size(); ++g) c.col(static_cast<Index>(g)) = graphs[g].half();
  return c;
}

struct LikelihoodCase {
  PrecisionEstimate theta_hat;
  RelaxedAdjacency a_tilde;
  SampleCovariance s;
  double k;
};

LikelihoodCase random_likelihood_case(Rng& rng, Index n, double k) {
  std::bernoulli_distribution coin(0.6);
  std::uniform_real_distribution<double> u(0.2, 0.9);
  AdjacencyMatrix a(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (coin(rng)) a.set_edge(i, j, true);
  GgmInstance inst{a, precision_from_support(a, rng), "random"};
  RelaxedAdjacency at(n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) at.set(i, j, u(rng));
  const auto s = sample_covariance(sample_observations(inst, static_cast<Index>(k), rng));
  return {inst.theta0, at, s, k};
}

}  // namespace

TEST_CASE("single-component prior score") {
  const GraphDataset ds({AdjacencyMatrix::from_half(Eigen::Vector3d(1, 0, 0))});
  const Eigen::VectorXd g = empirical_prior_score(ds, Eigen::Vector3d(0.5, 0.5, 0.0), 0.5);
  CHECK(g(0) == doctest::Approx(2.0));
  CHECK(g(1) == doctest::Approx(-2.0));
  CHECK(g(2) == doctest::Approx(0.0));
  CHECK(empirical_prior_score(ds, Eigen::Vector3d(1, 0, 0), 0.2).isZero());
}

TEST_CASE("prior score of two components matches the numerical gradient") {
  const std::vector<AdjacencyMatrix> graphs{AdjacencyMatrix::from_half(Eigen::Vector3d(1, 0, 1)),
                                            AdjacencyMatrix::from_half(Eigen::Vector3d(0, 1, 1))};
  const GraphDataset ds(graphs);
  const Eigen::MatrixXd c = centers_of(graphs);
  const Eigen::Vector3d x(0.4, 0.7, 0.2);
  const double sigma = 0.3;
  const Eigen::VectorXd num = oracle::central_gradient(
      [&](const Eigen::VectorXd& v) { return oracle::mixture_log_density(c, v, sigma); }, x, 1e-5);
  CHECK((empirical_prior_score(ds, x, sigma) - num).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(empirical_prior_log_density(ds, x, sigma) ==
        doctest::Approx(double(oracle::mixture_log_density(c, x, sigma))).epsilon(1e-12));
}

TEST_CASE("prior score is unchanged by duplicating the dataset") {
  Rng rng(4);
  std::vector<AdjacencyMatrix> graphs;
  for (int g = 0; g < 6; ++g) graphs.push_back(dual_barabasi_albert(rng, 7, 1, 2, 0.5));
  std::vector<AdjacencyMatrix> doubled = graphs;
  doubled.insert(doubled.end(), graphs.begin(), graphs.end());
  std::normal_distribution<double> z(0.5, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd x(half_dim(7));
    for (Index p = 0; p < x.size(); ++p) x(p) = z(rng);
    const auto a = empirical_prior_score(GraphDataset(graphs), x, 0.4);
    const auto b = empirical_prior_score(GraphDataset(doubled), x, 0.4);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("prior score vanishes at a dataset point as sigma shrinks") {
  Rng rng(8);
  std::vector<AdjacencyMatrix> graphs;
  while (graphs.size() < 5) {
    auto g = dual_barabasi_albert(rng, 6, 1, 2, 0.5);
    if (std::find(graphs.begin(), graphs.end(), g) == graphs.end()) graphs.push_back(g);
  }
  const GraphDataset ds(graphs);
  for (const auto& g : graphs) CHECK(empirical_prior_score(ds, g.half(), 1e-3).norm() < 1e-9);
}

TEST_CASE("prior score needs a same-size graph") {
  const GraphDataset ds({AdjacencyMatrix(4)});
  CHECK_THROWS_AS(empirical_prior_score(ds, Eigen::Vector3d(0, 0, 0), 0.5), InvalidArgument);
  CHECK_THROWS_AS(empirical_prior_score(ds, Eigen::VectorXd::Zero(6), 0.0), InvalidArgument);
  CHECK_THROWS_AS(GraphDataset({}), InvalidArgument);
}

TEST_CASE("relabeled prior keeps the original components") {
  Rng rng(9);
  std::vector<AdjacencyMatrix> graphs{dual_barabasi_albert(rng, 6, 1, 2, 0.5)};
  const EmpiricalPriorScore plain{GraphDataset(graphs)};
  const EmpiricalPriorScore augmented(GraphDataset(graphs), 3, 77);
  CHECK(plain.components(6) == 1);
  CHECK(augmented.components(6) == 4);
  CHECK(augmented.components(5) == 0);
}

TEST_CASE("likelihood score is zero at a stationary point") {
  Rng rng(12);
  const AdjacencyMatrix a0 = AdjacencyMatrix::from_edges(4, std::vector<Pair>{{0, 1}, {1, 2}, {2, 3}});
  const auto theta = precision_from_support(a0, rng);
  const SampleCovariance s{theta.theta.inverse()};
  const Eigen::VectorXd g = likelihood_score(theta, RelaxedAdjacency(a0), s, 50.0);
  CHECK(g.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("likelihood score vanishes where the precision estimate is zero") {
  Rng rng(13);
  auto c = random_likelihood_case(rng, 5, 20);
  c.theta_hat.theta(1, 3) = c.theta_hat.theta(3, 1) = 0.0;
  const Eigen::VectorXd g = likelihood_score(c.theta_hat, c.a_tilde, c.s, c.k);
  CHECK(g(pair_index(5, 1, 3)) == 0.0);
}

TEST_CASE("likelihood score matches central differences") {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = random_likelihood_case(rng, 3 + trial % 3, 5);
    const Index n = c.a_tilde.nodes();
    const Eigen::VectorXd g = likelihood_score(c.theta_hat, c.a_tilde, c.s, c.k);
    const Eigen::VectorXd num = oracle::central_gradient(
        [&](const Eigen::VectorXd& v) {
          return oracle::masked_log_likelihood(c.theta_hat.theta, unvech(v), c.s.s, c.k);
        },
        c.a_tilde.half(), 1e-5);
    for (Index p = 0; p < half_dim(n); ++p)
      CHECK(std::abs(g(p) - num(p)) <= 1e-5 * std::max(std::abs(num(p)), num.cwiseAbs().maxCoeff()));
    CHECK(masked_log_likelihood(c.theta_hat.theta, c.a_tilde, c.s, c.k) ==
          doctest::Approx(double(oracle::masked_log_likelihood(c.theta_hat.theta,
                                                               c.a_tilde.matrix(), c.s.s, c.k))));
  }
}

TEST_CASE("masked precision clamps the relaxed adjacency") {
  Eigen::Matrix3d theta;
  theta << 2, 0.5, 0.4, 0.5, 2, 0.3, 0.4, 0.3, 2;
  RelaxedAdjacency a(3);
  a.set(0, 1, 5.0);
  a.set(0, 2, -4.0);
  a.set(1, 2, 0.5);
  const Eigen::MatrixXd t = masked_precision(theta, a);
  CHECK(t(0, 1) == doctest::Approx(1.0));
  CHECK(t(0, 2) == doctest::Approx(-0.4));
  CHECK(t(1, 2) == doctest::Approx(0.15));
  CHECK(t(0, 0) == 2.0);
}

TEST_CASE("indefinite masked precision raises SingularMatrix after the ridge retry") {
  Eigen::Matrix2d theta;
  theta << 1, 0.9, 0.9, 1;
  RelaxedAdjacency a(2);
  a.set(0, 1, 2.0);  // T_01 = 1.8, determinant negative
  PrecisionEstimate est{theta, {}, 0, 0.0};
  LikelihoodScoreOptions opts;
  opts.ridge = 1e-6;
  try {
    likelihood_score(est, a, {Eigen::Matrix2d::Identity()}, 10, opts);
    FAIL("expected SingularMatrix");
  } catch (const SingularMatrix& e) {
    CHECK(e.condition_estimate() > 0.0);
  }
  opts.ridge = 1.0;
  CHECK(likelihood_score(est, a, {Eigen::Matrix2d::Identity()}, 10, opts).allFinite());
}

TEST_CASE("posterior score is the bit-exact sum of its parts") {
  Rng rng(15);
  const auto c = random_likelihood_case(rng, 5, 30);
  std::vector<AdjacencyMatrix> graphs;
  for (int g = 0; g < 8; ++g) graphs.push_back(dual_barabasi_albert(rng, 5, 1, 2, 0.5));
  const EmpiricalPriorScore prior{GraphDataset(graphs)};
  const Eigen::VectorXd lik = likelihood_score(c.theta_hat, c.a_tilde, c.s, c.k);
  const Eigen::VectorXd pr = prior.evaluate(c.a_tilde.half(), 0.3);
  const Eigen::VectorXd post = posterior_score(c.theta_hat, c.a_tilde, c.s, c.k, prior, 0.3);
  CHECK(post == lik + pr);

  CHECK(posterior_score(c.theta_hat, c.a_tilde, c.s, c.k, ZeroScore{}, 0.3) == lik);
  CHECK(posterior_score(c.theta_hat, c.a_tilde, c.s, 0.0, prior, 0.3) == pr);
}

TEST_CASE("denoising loss references") {
  Rng rng(16);
  std::vector<AdjacencyMatrix> graphs;
  for (int g = 0; g < 20; ++g) graphs.push_back(dual_barabasi_albert(rng, 6, 1, 2, 0.5));
  const GraphDataset ds(graphs);
  const auto schedule = default_schedule();
  const double d = double(half_dim(6));

  const DenoisingModel exact = [](const Eigen::VectorXd& at, const Eigen::VectorXd& clean,
                                  double sigma) -> Eigen::VectorXd {
    return (clean - at) / (sigma * sigma);
  };
  CHECK(denoising_loss(exact, ds, schedule, 200, 1) < 1e-20);

  const double zero = denoising_loss(ZeroScore{}, ds, schedule, 4000, 2);
  CHECK(zero == doctest::Approx(d / 2).epsilon(0.05));

  const double empirical = denoising_loss(EmpiricalPriorScore{ds}, ds, schedule, 2000, 3);
  CHECK(empirical < zero);

  CHECK_THROWS_AS(denoising_loss(ZeroScore{}, ds, schedule, 0, 1), InvalidArgument);
}
