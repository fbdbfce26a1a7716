#include "doctest.h"

#include "lggm/baselines.hpp"
#include "lggm/generators.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <numeric>

using namespace lggm;

namespace {

struct Instance {
  GgmInstance ggm;
  ObservationSet x;
  SampleCovariance s;
  AdjacencyMatrix a_obs;
  MaskPartition mask;
};

Instance make_instance(Rng& rng, Index n, Index k, Index hidden) {
  const auto a0 = dual_barabasi_albert(rng, n, 1, 2, 0.5);
  GgmInstance ggm{a0, precision_from_support(a0, rng), "ba"};
  ObservationSet x = sample_observations(ggm, k, rng);
  const auto s = sample_covariance(x);
  std::vector<Index> order(static_cast<std::size_t>(half_dim(n)));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> flags(order.size(), true);
  for (Index q = 0; q < hidden; ++q) flags[static_cast<std::size_t>(order[q])] = false;
  MaskPartition mask(n, flags);
  AdjacencyMatrix a_obs(n);
  for (const Pair& p : mask.observed_pairs())
    if (a0.has_edge(p.i, p.j)) a_obs.set_edge(p.i, p.j, true);
  return {ggm, x, s, a_obs, mask};
}

}  // namespace

TEST_CASE("threshold baseline examples") {
  Eigen::Matrix3d t;
  t << 2, 0.3, -0.6, 0.3, 2, 0, -0.6, 0, 2;
  const PrecisionEstimate est{t, {{1, 2}}, 0, 0.0};
  const auto all = threshold_baseline(est, 0.0);
  CHECK(all.has_edge(0, 1));
  CHECK(all.has_edge(0, 2));
  CHECK_FALSE(all.has_edge(1, 2));
  CHECK(threshold_baseline(est, 0.7).edge_count() == 0);
  CHECK(threshold_baseline(est, 0.5).edges() == std::vector<Pair>{{0, 2}});
  CHECK_THROWS_AS(threshold_baseline(est, -0.1), InvalidArgument);
}

TEST_CASE("threshold baseline is monotone in t") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = make_instance(rng, 8, 40, 6);
    const auto est = constrained_mle(inst.s, inst.a_obs, inst.mask);
    AdjacencyMatrix previous = threshold_baseline(est, 0.0);
    for (double t = 0.05; t < 2.0; t += 0.05) {
      const auto cur = threshold_baseline(est, t);
      CHECK((cur.matrix().array() <= previous.matrix().array()).all());
      previous = cur;
    }
  }
}

TEST_CASE("WGL penalty layout") {
  const auto a_obs = AdjacencyMatrix::from_edges(3, std::vector<Pair>{{0, 1}});
  const auto mask = MaskPartition::from_unknown(3, std::vector<Pair>{{1, 2}});
  const auto pen = wgl_penalty(a_obs, mask, 0.3);
  CHECK(pen.matrix()(0, 1) == 0.0);
  CHECK(std::isinf(pen.matrix()(0, 2)));
  CHECK(pen.matrix()(2, 1) == 0.3);
  CHECK_THROWS_AS(wgl_penalty(a_obs, mask, -1.0), InvalidArgument);
}

TEST_CASE("WGL extremes") {
  Rng rng(2);
  const auto inst = make_instance(rng, 7, 60, 8);
  const auto mle = constrained_mle(inst.s, inst.a_obs, inst.mask);
  CHECK(wgl_baseline(inst.s, inst.a_obs, inst.mask, 0.0) == support(mle.theta));
  const auto heavy = wgl_baseline(inst.s, inst.a_obs, inst.mask, 100.0);
  for (Index q : inst.mask.unknown()) CHECK(heavy.half()(q) == 0.0);
  for (Index q : inst.mask.observed()) CHECK(heavy.half()(q) == inst.a_obs.half()(q));
}

TEST_CASE("WGL support matches an independent solver along the penalty grid") {
  Rng rng(3);
  int compared = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto inst = make_instance(rng, 8, 30, 10);
    for (double lambda : {0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0}) {
      const Eigen::VectorXd cur = wgl_baseline(inst.s, inst.a_obs, inst.mask, lambda).half();
      const Eigen::MatrixXd ref =
          oracle::weighted_glasso(inst.s.s, wgl_penalty(inst.a_obs, inst.mask, lambda).matrix());
      for (Index q : inst.mask.unknown()) {
        const Pair e = pair_at(8, q);
        const double mag = std::abs(ref(e.i, e.j));
        if (mag > 1e-9 && mag < 1e-6) continue;
        CHECK(cur(q) == (mag >= 1e-6 ? 1.0 : 0.0));
        ++compared;
      }
    }
  }
  CHECK(compared > 1500);
}

TEST_CASE("lambda curve fitting") {
  const std::vector<std::pair<double, double>> constant{{10, 0.2}, {100, 0.2}, {1000, 0.2}};
  const auto c = fit_lambda_curve(constant);
  CHECK(std::abs(c.a) < 1e-12);
  CHECK(std::abs(c.b) < 1e-12);
  CHECK(c.c == doctest::Approx(0.2).epsilon(1e-12));

  const LambdaCurve truth{0.1, -0.3, 0.5};
  std::vector<std::pair<double, double>> exact;
  for (double k : {5.0, 20.0, 80.0, 300.0}) {
    const double l = std::log(k);
    exact.emplace_back(k, 0.1 * l * l - 0.3 * l + 0.5);
  }
  const auto fit = fit_lambda_curve(exact);
  CHECK(std::abs(fit.a - 0.1) < 1e-10);
  CHECK(std::abs(fit.b + 0.3) < 1e-10);
  CHECK(std::abs(fit.c - 0.5) < 1e-10);

  const std::vector<std::pair<double, double>> two{{10, 0.1}, {100, 0.2}};
  CHECK_THROWS_AS(fit_lambda_curve(two), InvalidArgument);
  const std::vector<std::pair<double, double>> repeated{{10, 0.1}, {10, 0.2}, {100, 0.2}};
  CHECK_THROWS_AS(fit_lambda_curve(repeated), InvalidArgument);

  const LambdaCurve negative{0.0, 0.0, -1.0};
  CHECK(negative(50.0) == 0.0);
}

TEST_CASE("margin rule on given frequencies") {
  RelaxedAdjacency f(3);
  f.set(0, 1, 1.0);
  f.set(0, 2, 0.5);
  f.set(1, 2, 0.25);
  const auto zero = fix_from_frequencies(f, 10, 0.0);
  CHECK(zero.mask.observed().size() == 2);
  CHECK(zero.a_obs.has_edge(0, 1));
  CHECK_FALSE(zero.mask.is_observed(0, 2));
  CHECK(zero.mask.is_observed(1, 2));
  CHECK_FALSE(zero.a_obs.has_edge(1, 2));

  CHECK(fix_from_frequencies(f, 10, 0.5).mask.observed().empty());
  CHECK(fix_from_frequencies(f, 10, 0.3).mask.observed().size() == 1);
  CHECK_THROWS_AS(fix_from_frequencies(f, 10, 0.6), InvalidArgument);
}

TEST_CASE("bootstrap fixing") {
  Rng rng(4);
  const auto inst = make_instance(rng, 8, 60, 28);
  Rng b1(99), b2(99);
  const auto r1 = bootstrap_fix(inst.x, 0.1, 20, 0.1, b1, 1);
  const auto r2 = bootstrap_fix(inst.x, 0.1, 20, 0.1, b2, 2);
  CHECK(r1.frequency.matrix() == r2.frequency.matrix());
  CHECK(r1.resamples + r1.failures == 20);
  CHECK((r1.frequency.matrix().array() >= 0.0).all());
  CHECK((r1.frequency.matrix().array() <= 1.0).all());
  for (Index p = 0; p < half_dim(8); ++p) {
    const Pair e = pair_at(8, p);
    const double f = r1.frequency(e.i, e.j);
    if (r1.mask.is_observed(p)) {
      CHECK((f < 0.4 || f > 0.6));
      CHECK(r1.a_obs.has_edge(e.i, e.j) == (f > 0.6));
    } else {
      CHECK(f >= 0.4);
      CHECK(f <= 0.6);
    }
  }
  Rng b3(99);
  CHECK(bootstrap_fix(inst.x, 0.1, 20, 0.5, b3).mask.observed().empty());
  CHECK_THROWS_AS(bootstrap_fix(inst.x, 0.1, 0, 0.1, b3), InvalidArgument);
}
