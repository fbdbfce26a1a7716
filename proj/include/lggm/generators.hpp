// Random graph families, precision synthesis from a support, GMRF sampling
// and on-disk graph datasets.
#ifndef LGGM_GENERATORS_HPP
#define LGGM_GENERATORS_HPP

#include "lggm/covsel.hpp"
#include "lggm/graph.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace lggm {

struct GridParams {
  Index n_min = 40;
  Index n_max = 50;
  int extra_min = 2;
  int extra_max = 5;
};

/// h x w lattice, node r * w + c.
AdjacencyMatrix grid_lattice(Index height, Index width);

/// Lattice with n ~ U{n_min..n_max} nodes (n redrawn until it has a factor pair
/// with both sides >= 2; the pair is then uniform among those), plus
/// U{extra_min..extra_max} uniformly placed non-lattice edges.
AdjacencyMatrix grid_graph(Rng& rng, const GridParams& params = {});

/// Dual Barabasi-Albert: start from max(n1, n2) isolated nodes; every arrival
/// attaches n1 edges with probability pi, n2 otherwise, to distinct targets
/// drawn proportionally to degree (uniformly while all candidates have degree 0).
AdjacencyMatrix dual_barabasi_albert(Rng& rng, Index n, int n1 = 2, int n2 = 4, double pi = 0.5);

/// sum_{d=2}^{n-1} (-1)^d S_d(A) / gamma^(d-2), S_d = sum_v C(deg v, d).
double aks_statistic(const AdjacencyMatrix& a, double gamma);

/// Contribution of a node of degree `degree` to aks_statistic.
double aks_node_term(Index degree, double gamma);

struct ErgmSpec {
  Eigen::VectorXd beta = Eigen::Vector2d(0.7, -2.0);  // weights of (AKS, edge statistic)
  double gamma = 0.3;
  Index n = 50;
  long burn_in = 100000;
  long thin = 1000;

  void validate() const;
};

/// ERGM sufficient statistics (AKS_gamma(A), sum_{i != j} A_ij).
Eigen::Vector2d ergm_statistics(const AdjacencyMatrix& a, double gamma);

/// Metropolis single-pair-flip chain targeting p(A) ~ exp(beta' psi(A)),
/// started from the empty graph; returns the state after `burn_in` flips.
AdjacencyMatrix ergm_sample(const ErgmSpec& spec, Rng& rng);

/// `count` states of one chain: after burn_in, then every `thin` flips.
std::vector<AdjacencyMatrix> ergm_chain(const ErgmSpec& spec, Rng& rng, int count);

struct PrecisionSynthesis {
  double magnitude_low = 0.5;
  double magnitude_high = 1.0;
  bool sign_flip = true;
};

/// Off-diagonal entries nonzero exactly on the edges of `a`, |value| uniform in
/// [low, high] (random sign when sign_flip); diagonal = row absolute sum + 0.1.
PrecisionEstimate precision_from_support(const AdjacencyMatrix& a, Rng& rng,
                                         const PrecisionSynthesis& synthesis = {});

struct GgmInstance {
  AdjacencyMatrix a0;
  PrecisionEstimate theta0;
  std::string provenance;
};

/// k i.i.d. draws from N(0, Theta0^{-1}), one per column.
ObservationSet sample_observations(const GgmInstance& instance, Index k, Rng& rng);

// Dataset directory: one edge-list file per graph plus "manifest.txt" with one
// "<file> <node count>" line per graph.
void write_dataset(const std::filesystem::path& dir, const std::vector<AdjacencyMatrix>& graphs);
std::vector<AdjacencyMatrix> read_dataset(const std::filesystem::path& manifest);

}  // namespace lggm

#endif  // LGGM_GENERATORS_HPP
