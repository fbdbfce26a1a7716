#include "lggm/generators.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lggm {

AdjacencyMatrix grid_lattice(Index height, Index width) {
  if (height < 1 || width < 1) throw InvalidArgument("grid sides must be positive");
  AdjacencyMatrix a(height * width);
  for (Index r = 0; r < height; ++r)
    for (Index c = 0; c < width; ++c) {
      const Index v = r * width + c;
      if (c + 1 < width) a.set_edge(v, v + 1, true);
      if (r + 1 < height) a.set_edge(v, v + width, true);
    }
  return a;
}

AdjacencyMatrix grid_graph(Rng& rng, const GridParams& params) {
  if (params.n_min > params.n_max || params.n_min < 1)
    throw InvalidArgument("grid_graph: need 1 <= n_min <= n_max");
  if (params.extra_min < 0 || params.extra_min > params.extra_max)
    throw InvalidArgument("grid_graph: need 0 <= extra_min <= extra_max");

  auto factor_pairs = [](Index n) {
    std::vector<std::pair<Index, Index>> out;
    for (Index h = 2; h <= n / 2; ++h)
      if (n % h == 0 && n / h >= 2) out.emplace_back(h, n / h);
    return out;
  };
  bool any = false;
  for (Index n = params.n_min; n <= params.n_max && !any; ++n) any = !factor_pairs(n).empty();
  if (!any) throw InvalidArgument("grid_graph: no node count in range has a factorization h*w with h,w >= 2");

  std::uniform_int_distribution<Index> pick_n(params.n_min, params.n_max);
  std::vector<std::pair<Index, Index>> pairs;
  while (pairs.empty()) pairs = factor_pairs(pick_n(rng));
  std::uniform_int_distribution<std::size_t> pick_pair(0, pairs.size() - 1);
  const auto [h, w] = pairs[pick_pair(rng)];
  AdjacencyMatrix a = grid_lattice(h, w);

  std::uniform_int_distribution<int> pick_extra(params.extra_min, params.extra_max);
  const int extra = pick_extra(rng);
  std::vector<Pair> free_pairs;
  for (Index i = 0; i < a.nodes(); ++i)
    for (Index j = i + 1; j < a.nodes(); ++j)
      if (!a.has_edge(i, j)) free_pairs.push_back({i, j});
  std::shuffle(free_pairs.begin(), free_pairs.end(), rng);
  for (int e = 0; e < extra && e < static_cast<int>(free_pairs.size()); ++e)
    a.set_edge(free_pairs[static_cast<std::size_t>(e)].i, free_pairs[static_cast<std::size_t>(e)].j, true);
  return a;
}

AdjacencyMatrix dual_barabasi_albert(Rng& rng, Index n, int n1, int n2, double pi) {
  if (n1 < 1 || n2 < 1) throw InvalidArgument("dual_barabasi_albert: n1, n2 must be >= 1");
  if (!(pi >= 0.0 && pi <= 1.0)) throw InvalidArgument("dual_barabasi_albert: pi must lie in [0, 1]");
  const Index start = std::max(n1, n2);
  if (n <= start) throw InvalidArgument("dual_barabasi_albert: n must exceed max(n1, n2)");

  AdjacencyMatrix a(n);
  std::vector<double> degree(static_cast<std::size_t>(n), 0.0);
  std::bernoulli_distribution use_n1(pi);
  std::uniform_real_distribution<double> unit;
  for (Index v = start; v < n; ++v) {
    const int m = use_n1(rng) ? n1 : n2;
    std::vector<double> weight(degree.begin(), degree.begin() + v);
    std::vector<bool> taken(static_cast<std::size_t>(v), false);
    std::vector<Index> targets;
    for (int e = 0; e < m; ++e) {
      double total = 0.0;
      for (Index u = 0; u < v; ++u)
        if (!taken[u]) total += weight[u];
      const bool uniform = total <= 0.0;
      if (uniform) total = double(v - static_cast<Index>(targets.size()));
      double r = unit(rng) * total;
      Index chosen = -1;
      for (Index u = 0; u < v; ++u) {
        if (taken[u]) continue;
        const double wu = uniform ? 1.0 : weight[u];
        if (wu <= 0.0) continue;
        chosen = u;
        if (r < wu) break;
        r -= wu;
      }
      taken[chosen] = true;
      targets.push_back(chosen);
    }
    for (Index t : targets) {
      a.set_edge(v, t, true);
      degree[t] += 1.0;
      degree[v] += 1.0;
    }
  }
  return a;
}

double aks_node_term(Index degree, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("AKS decay gamma must be > 0");
  // sum_{d>=2} (-1)^d C(D, d) x^(d-2) with x = 1/gamma, in closed form.
  const long double x = 1.0L / gamma;
  const auto d = static_cast<long double>(degree);
  return static_cast<double>((std::pow(1.0L - x, d) - 1.0L + d * x) / (x * x));
}

double aks_statistic(const AdjacencyMatrix& a, double gamma) {
  double total = 0.0;
  for (int deg : a.degrees()) total += aks_node_term(deg, gamma);
  return total;
}

void ErgmSpec::validate() const {
  if (beta.size() != 2) throw InvalidArgument("ERGM beta must have two entries (AKS, edges)");
  if (!(gamma > 0.0)) throw InvalidArgument("ERGM gamma must be > 0");
  if (n < 2) throw InvalidArgument("ERGM needs n >= 2");
  if (burn_in < 0 || thin < 1) throw InvalidArgument("ERGM needs burn_in >= 0 and thin >= 1");
}

Eigen::Vector2d ergm_statistics(const AdjacencyMatrix& a, double gamma) {
  return {aks_statistic(a, gamma), 2.0 * double(a.edge_count())};
}

namespace {

class ErgmChain {
 public:
  explicit ErgmChain(const ErgmSpec& spec)
      : spec_(spec), state_(spec.n), degree_(static_cast<std::size_t>(spec.n), 0) {
    spec.validate();
    term_.resize(static_cast<std::size_t>(spec.n + 1));
    for (Index d = 0; d <= spec.n; ++d) term_[d] = aks_node_term(d, spec.gamma);
  }

  void advance(long flips, Rng& rng) {
    std::uniform_int_distribution<Index> node(0, spec_.n - 1);
    std::uniform_real_distribution<double> unit;
    for (long f = 0; f < flips; ++f) {
      Index i = node(rng);
      Index j = node(rng);
      while (j == i) j = node(rng);
      const bool present = state_.has_edge(i, j);
      const int step = present ? -1 : 1;
      const int di = degree_[i];
      const int dj = degree_[j];
      const double d_aks = term_[di + step] - term_[di] + term_[dj + step] - term_[dj];
      const double log_ratio = spec_.beta(0) * d_aks + spec_.beta(1) * 2.0 * step;
      if (log_ratio >= 0.0 || unit(rng) < std::exp(log_ratio)) {
        state_.set_edge(i, j, !present);
        degree_[i] += step;
        degree_[j] += step;
      }
    }
  }

  const AdjacencyMatrix& state() const { return state_; }

 private:
  ErgmSpec spec_;
  AdjacencyMatrix state_;
  std::vector<int> degree_;
  std::vector<double> term_;
};

}  // namespace

AdjacencyMatrix ergm_sample(const ErgmSpec& spec, Rng& rng) {
  ErgmChain chain(spec);
  chain.advance(spec.burn_in, rng);
  return chain.state();
}

std::vector<AdjacencyMatrix> ergm_chain(const ErgmSpec& spec, Rng& rng, int count) {
  ErgmChain chain(spec);
  chain.advance(spec.burn_in, rng);
  std::vector<AdjacencyMatrix> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int c = 0; c < count; ++c) {
    if (c > 0) chain.advance(spec.thin, rng);
    out.push_back(chain.state());
  }
  return out;
}

PrecisionEstimate precision_from_support(const AdjacencyMatrix& a, Rng& rng,
                                         const PrecisionSynthesis& synthesis) {
  if (!(0.0 < synthesis.magnitude_low && synthesis.magnitude_low <= synthesis.magnitude_high))
    throw InvalidArgument("precision magnitudes need 0 < low <= high");
  const Index n = a.nodes();
  std::uniform_real_distribution<double> magnitude(synthesis.magnitude_low, synthesis.magnitude_high);
  std::bernoulli_distribution negative(0.5);

  PrecisionEstimate out;
  out.theta = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (!a.has_edge(i, j)) {
        out.zero_set.push_back({i, j});
        continue;
      }
      double v = magnitude(rng);
      if (synthesis.sign_flip && negative(rng)) v = -v;
      out.theta(i, j) = out.theta(j, i) = v;
    }
  out.theta.diagonal() = out.theta.cwiseAbs().rowwise().sum().array() + 0.1;
  if (!(support(out.theta) == a)) throw Error("precision_from_support: support mismatch");
  return out;
}

ObservationSet sample_observations(const GgmInstance& instance, Index k, Rng& rng) {
  if (k < 1) throw InvalidArgument("sample_observations: k must be >= 1");
  const Eigen::MatrixXd& theta = instance.theta0.theta;
  Eigen::LLT<Eigen::MatrixXd> llt(theta);
  if (llt.info() != Eigen::Success)
    throw SingularMatrix("sample_observations: precision is not positive definite", INFINITY);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd z(theta.rows(), k);
  for (Index c = 0; c < k; ++c)
    for (Index r = 0; r < theta.rows(); ++r) z(r, c) = normal(rng);
  // Theta = L L', so x = L^{-T} z has covariance Theta^{-1}.
  return ObservationSet(llt.matrixU().solve(z));
}

}  // namespace lggm
