#include "lggm/harness.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace lggm {

// --- metrics ----------------------------------------------------------------

double metric_f1(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() != pred.size()) throw InvalidArgument("metric_f1: size mismatch");
  double tp = 0, fp = 0, fn = 0;
  for (Index q = 0; q < truth.size(); ++q) {
    const bool t = truth(q) != 0.0;
    const bool p = pred(q) != 0.0;
    tp += t && p;
    fp += !t && p;
    fn += t && !p;
  }
  if (tp == 0.0) return 0.0;
  return 2.0 * tp / (2.0 * tp + fp + fn);
}

double metric_accuracy(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred) {
  if (truth.size() != pred.size()) throw InvalidArgument("metric_accuracy: size mismatch");
  if (truth.size() == 0) return 0.0;
  const auto hits = ((truth.array() != 0.0) == (pred.array() != 0.0)).count();
  return double(hits) / double(truth.size());
}

std::optional<double> metric_auc(const Eigen::VectorXd& truth, const Eigen::VectorXd& score) {
  if (truth.size() != score.size()) throw InvalidArgument("metric_auc: size mismatch");
  const Index m = truth.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return score(a) < score(b); });
  std::vector<double> rank(static_cast<std::size_t>(m));
  for (Index lo = 0; lo < m;) {
    Index hi = lo;
    while (hi + 1 < m && score(order[hi + 1]) == score(order[lo])) ++hi;
    const double avg = 0.5 * double(lo + hi) + 1.0;
    for (Index q = lo; q <= hi; ++q) rank[order[q]] = avg;
    lo = hi + 1;
  }
  double positives = 0, rank_sum = 0;
  for (Index q = 0; q < m; ++q)
    if (truth(q) != 0.0) {
      positives += 1;
      rank_sum += rank[q];
    }
  const double negatives = double(m) - positives;
  if (positives == 0 || negatives == 0) return std::nullopt;
  return (rank_sum - positives * (positives + 1) / 2.0) / (positives * negatives);
}

std::vector<double> linear_grid(double first, double last, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] =
        count == 1 ? first : first + (last - first) * double(i) / double(count - 1);
  return g;
}

// --- threshold tuning ---------------------------------------------------------

namespace {

Eigen::VectorXd binarize(const Eigen::VectorXd& score, double tau) {
  return (score.array() >= tau).cast<double>();
}

double mean_metric(std::span<const TuningCase> cases, std::span<const std::size_t> members,
                   double tau, const Metric& metric) {
  double total = 0.0;
  for (std::size_t c : members) total += metric(cases[c].truth, binarize(cases[c].score, tau));
  return total / double(members.size());
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / double(v.size() - 1));
}

}  // namespace

TuneResult tune_and_score(std::span<const TuningCase> cases, std::span<const double> grid,
                          int splits, const Metric& metric, Rng& rng) {
  const std::size_t r = cases.size();
  if (r < 2 || r % 2 != 0) throw InvalidArgument("tune_and_score: need an even number >= 2 of cases");
  if (grid.empty()) throw InvalidArgument("tune_and_score: empty threshold grid");
  if (splits < 1) throw InvalidArgument("tune_and_score: need at least one split");
  std::vector<double> sorted_grid(grid.begin(), grid.end());
  std::sort(sorted_grid.begin(), sorted_grid.end());

  TuneResult out;
  std::vector<double> case_sum(r, 0.0);
  std::vector<int> case_hits(r, 0);
  std::vector<std::size_t> order(r);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int s = 0; s < splits; ++s) {
    std::shuffle(order.begin(), order.end(), rng);
    const std::span<const std::size_t> train(order.data(), r / 2);
    const std::span<const std::size_t> test(order.data() + r / 2, r / 2);

    double best_tau = sorted_grid.front();
    double best = -INFINITY;
    for (double tau : sorted_grid) {
      const double m = mean_metric(cases, train, tau, metric);
      if (m > best) {
        best = m;
        best_tau = tau;
      }
    }
    double total = 0.0;
    for (std::size_t c : test) {
      const double v = metric(cases[c].truth, binarize(cases[c].score, best_tau));
      total += v;
      case_sum[c] += v;
      case_hits[c] += 1;
    }
    out.split_means.push_back(total / double(test.size()));
    out.thresholds.push_back(best_tau);
  }
  out.mean = mean_of(out.split_means);
  out.stddev = stddev_of(out.split_means);
  out.per_case.resize(r);
  for (std::size_t c = 0; c < r; ++c)
    out.per_case[c] = case_hits[c] ? case_sum[c] / case_hits[c] : std::nan("");
  return out;
}

// --- configuration ------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("setting '" + key + "': expected a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw InvalidArgument("setting '" + key + "': expected an integer");
  return static_cast<long long>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InvalidArgument("setting '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  return out;
}

const std::set<std::string> kMethods{"lpost", "lpr", "ll", "threshold", "wgl", "bgl", "lpost_boot"};

}  // namespace

const std::vector<std::pair<std::string, std::string>>& setting_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys{
      {"family", "graph family: grid | ba | ergm | file"},
      {"grid_n_min", "smallest grid node count"},
      {"grid_n_max", "largest grid node count"},
      {"grid_extra_min", "fewest random extra grid edges"},
      {"grid_extra_max", "most random extra grid edges"},
      {"ba_nodes", "node counts for dual Barabasi-Albert graphs (list)"},
      {"ba_n1", "edges per arrival, first mode"},
      {"ba_n2", "edges per arrival, second mode"},
      {"ba_pi", "probability of the first mode"},
      {"ergm_n", "ERGM node count"},
      {"ergm_beta", "ERGM coefficients (AKS, edges)"},
      {"ergm_gamma", "alternating k-star decay"},
      {"ergm_burn_in", "ERGM burn-in flips"},
      {"ergm_thin", "ERGM thinning flips"},
      {"test_manifest", "dataset manifest of graphs to estimate (family = file)"},
      {"prior_manifest", "dataset manifest used as the structural prior"},
      {"unknown_fraction", "fraction of pairs hidden"},
      {"unknown_count", "number of pairs hidden (overrides the fraction)"},
      {"balanced_unknown", "hide zeros and ones in equal numbers"},
      {"k_ratios", "observation counts as multiples of |U| (list)"},
      {"k_values", "explicit observation counts (list)"},
      {"samples", "Langevin samples M per estimate"},
      {"sigma_max", "largest noise level"},
      {"sigma_min", "smallest noise level"},
      {"levels", "number of noise levels"},
      {"steps", "Langevin steps per level"},
      {"epsilon", "base step size"},
      {"methods", "lpost, lpr, ll, threshold, wgl, bgl, lpost_boot (list)"},
      {"instances", "instances R (even)"},
      {"splits", "train/test splits S"},
      {"thresholds", "threshold grid for sample means and bootstrap frequencies (list)"},
      {"theta_grid", "threshold grid for |Theta_hat| (list)"},
      {"lambda_grid", "WGL penalty grid (list)"},
      {"seed", "master seed"},
      {"dataset_size", "generated prior dataset size"},
      {"prior_relabelings", "random relabelings added per prior graph"},
      {"bootstrap_resamples", "bootstrap resamples B"},
      {"bootstrap_margins", "margins p_m for lpost_boot (list)"},
      {"bootstrap_lambda", "graphical lasso penalty inside the bootstrap"},
      {"magnitude_low", "smallest |Theta0_ij| on edges"},
      {"magnitude_high", "largest |Theta0_ij| on edges"},
      {"threads", "worker threads (0 = hardware)"},
      {"max_failures", "failed instances tolerated before a nonzero exit"},
  };
  return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (key == "family") cfg.family = v;
  else if (key == "grid_n_min") cfg.grid.n_min = to_int(key, v);
  else if (key == "grid_n_max") cfg.grid.n_max = to_int(key, v);
  else if (key == "grid_extra_min") cfg.grid.extra_min = static_cast<int>(to_int(key, v));
  else if (key == "grid_extra_max") cfg.grid.extra_max = static_cast<int>(to_int(key, v));
  else if (key == "ba_nodes") {
    cfg.ba_nodes.clear();
    for (double x : to_doubles(key, v)) cfg.ba_nodes.push_back(static_cast<Index>(x));
  } else if (key == "ba_n1") cfg.ba_n1 = static_cast<int>(to_int(key, v));
  else if (key == "ba_n2") cfg.ba_n2 = static_cast<int>(to_int(key, v));
  else if (key == "ba_pi") cfg.ba_pi = to_double(key, v);
  else if (key == "ergm_n") cfg.ergm.n = to_int(key, v);
  else if (key == "ergm_beta") {
    const auto b = to_doubles(key, v);
    cfg.ergm.beta = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Index>(b.size()));
  } else if (key == "ergm_gamma") cfg.ergm.gamma = to_double(key, v);
  else if (key == "ergm_burn_in") cfg.ergm.burn_in = to_int(key, v);
  else if (key == "ergm_thin") cfg.ergm.thin = to_int(key, v);
  else if (key == "test_manifest") cfg.test_manifest = v;
  else if (key == "prior_manifest") cfg.prior_manifest = v;
  else if (key == "unknown_fraction") cfg.unknown_fraction = to_double(key, v);
  else if (key == "unknown_count") cfg.unknown_count = to_int(key, v);
  else if (key == "balanced_unknown") cfg.balanced_unknown = to_bool(key, v);
  else if (key == "k_ratios") cfg.k_ratios = to_doubles(key, v);
  else if (key == "k_values") cfg.k_values = to_doubles(key, v);
  else if (key == "samples") cfg.samples = static_cast<int>(to_int(key, v));
  else if (key == "sigma_max") cfg.sigma_max = to_double(key, v);
  else if (key == "sigma_min") cfg.sigma_min = to_double(key, v);
  else if (key == "levels") cfg.levels = static_cast<int>(to_int(key, v));
  else if (key == "steps") cfg.steps = static_cast<int>(to_int(key, v));
  else if (key == "epsilon") cfg.epsilon = to_double(key, v);
  else if (key == "methods") cfg.methods = split_list(v);
  else if (key == "instances") cfg.instances = static_cast<int>(to_int(key, v));
  else if (key == "splits") cfg.splits = static_cast<int>(to_int(key, v));
  else if (key == "thresholds") cfg.thresholds = to_doubles(key, v);
  else if (key == "theta_grid") cfg.theta_grid = to_doubles(key, v);
  else if (key == "lambda_grid") cfg.lambda_grid = to_doubles(key, v);
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "dataset_size") cfg.dataset_size = static_cast<int>(to_int(key, v));
  else if (key == "prior_relabelings") cfg.prior_relabelings = static_cast<int>(to_int(key, v));
  else if (key == "bootstrap_resamples") cfg.bootstrap_resamples = static_cast<int>(to_int(key, v));
  else if (key == "bootstrap_margins") cfg.bootstrap_margins = to_doubles(key, v);
  else if (key == "bootstrap_lambda") cfg.bootstrap_lambda = to_double(key, v);
  else if (key == "magnitude_low") cfg.magnitude_low = to_double(key, v);
  else if (key == "magnitude_high") cfg.magnitude_high = to_double(key, v);
  else if (key == "threads") cfg.threads = static_cast<int>(to_int(key, v));
  else if (key == "max_failures") cfg.max_failures = static_cast<int>(to_int(key, v));
  else throw InvalidArgument("unknown setting '" + key + "'");
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

void ExperimentConfig::validate() const {
  static const std::set<std::string> families{"grid", "ba", "ergm", "file"};
  if (!families.count(family)) throw InvalidArgument("unknown graph family '" + family + "'");
  if (family == "file" && test_manifest.empty())
    throw InvalidArgument("family = file needs test_manifest");
  if (family == "ba" && ba_nodes.empty()) throw InvalidArgument("ba_nodes must not be empty");
  if (instances < 2 || instances % 2 != 0) throw InvalidArgument("instances R must be even and >= 2");
  if (splits < 1) throw InvalidArgument("splits must be >= 1");
  if (k_values.empty() && k_ratios.empty()) throw InvalidArgument("k grid must not be empty");
  if (thresholds.empty() || theta_grid.empty() || lambda_grid.empty())
    throw InvalidArgument("threshold grids must not be empty");
  if (methods.empty()) throw InvalidArgument("method list must not be empty");
  for (const auto& m : methods)
    if (!kMethods.count(m)) throw InvalidArgument("unknown method '" + m + "'");
  if (!(unknown_fraction > 0.0 && unknown_fraction <= 1.0) && unknown_count <= 0)
    throw InvalidArgument("unknown_fraction must lie in (0, 1]");
  if (samples < 1) throw InvalidArgument("samples must be >= 1");
  if (dataset_size < 1 && prior_manifest.empty()) throw InvalidArgument("dataset_size must be >= 1");
  NoiseSchedule::linear(sigma_max, sigma_min, levels, steps, epsilon);
}

// --- experiment runner --------------------------------------------------------

namespace {

struct MethodOutcome {
  bool ok = false;
  Eigen::VectorXd truth;
  Eigen::VectorXd score;
  double runtime_ms = 0.0;
  std::string error;
};

struct InstanceData {
  Index nodes = 0;
  Index unknown = 0;
  Index positives = 0;
  // outcome[k index][method name]
  std::vector<std::map<std::string, MethodOutcome>> outcome;
  bool failed = false;
};

std::vector<AdjacencyMatrix> load_graphs(const std::string& manifest) {
  auto graphs = read_dataset(manifest);
  if (graphs.empty()) throw InvalidArgument("manifest " + manifest + " lists no graphs");
  return graphs;
}

AdjacencyMatrix draw_graph(const ExperimentConfig& cfg, Rng& rng,
                           const std::vector<AdjacencyMatrix>& test_graphs, int index) {
  if (cfg.family == "grid") return grid_graph(rng, cfg.grid);
  if (cfg.family == "ba") {
    std::uniform_int_distribution<std::size_t> pick(0, cfg.ba_nodes.size() - 1);
    return dual_barabasi_albert(rng, cfg.ba_nodes[pick(rng)], cfg.ba_n1, cfg.ba_n2, cfg.ba_pi);
  }
  if (cfg.family == "ergm") return ergm_sample(cfg.ergm, rng);
  return test_graphs[static_cast<std::size_t>(index) % test_graphs.size()];
}

MaskPartition hide_pairs(const ExperimentConfig& cfg, const AdjacencyMatrix& a0, Rng& rng) {
  const Index n = a0.nodes();
  const Index dim = half_dim(n);
  Index hidden = cfg.unknown_count > 0
                     ? std::min(cfg.unknown_count, dim)
                     : std::max<Index>(1, std::llround(cfg.unknown_fraction * double(dim)));
  hidden = std::min(hidden, dim);
  const Eigen::VectorXd half = a0.half();
  std::vector<Index> chosen;
  if (cfg.balanced_unknown) {
    std::vector<Index> ones, zeros;
    for (Index p = 0; p < dim; ++p) (half(p) != 0.0 ? ones : zeros).push_back(p);
    std::shuffle(ones.begin(), ones.end(), rng);
    std::shuffle(zeros.begin(), zeros.end(), rng);
    const Index want_ones = std::min<Index>(hidden / 2, static_cast<Index>(ones.size()));
    const Index want_zeros = std::min<Index>(hidden - want_ones, static_cast<Index>(zeros.size()));
    chosen.assign(ones.begin(), ones.begin() + want_ones);
    chosen.insert(chosen.end(), zeros.begin(), zeros.begin() + want_zeros);
  } else {
    std::vector<Index> all(static_cast<std::size_t>(dim));
    std::iota(all.begin(), all.end(), Index{0});
    std::shuffle(all.begin(), all.end(), rng);
    chosen.assign(all.begin(), all.begin() + hidden);
  }
  std::vector<bool> observed(static_cast<std::size_t>(dim), true);
  for (Index p : chosen) observed[static_cast<std::size_t>(p)] = false;
  return MaskPartition(n, std::move(observed));
}

AdjacencyMatrix observed_part(const AdjacencyMatrix& a0, const MaskPartition& mask) {
  AdjacencyMatrix a(a0.nodes());
  for (Index p : mask.observed()) {
    const Pair e = pair_at(a0.nodes(), p);
    if (a0.has_edge(e.i, e.j)) a.set_edge(e.i, e.j, true);
  }
  return a;
}

std::vector<std::string> expand_methods(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& m : cfg.methods) {
    if (m != "lpost_boot") {
      out.push_back(m);
      continue;
    }
    for (double margin : cfg.bootstrap_margins) {
      char name[48];
      std::snprintf(name, sizeof name, "lpost_boot(%g)", margin);
      out.emplace_back(name);
    }
  }
  return out;
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

class InstanceRunner {
 public:
  InstanceRunner(const ExperimentConfig& cfg, const ScoreEstimator& prior,
                 const std::vector<AdjacencyMatrix>& test_graphs)
      : cfg_(cfg), prior_(prior), test_graphs_(test_graphs), methods_(expand_methods(cfg)) {
    schedule_ = NoiseSchedule::linear(cfg.sigma_max, cfg.sigma_min, cfg.levels, cfg.steps,
                                      cfg.epsilon);
  }

  const std::vector<std::string>& methods() const { return methods_; }

  InstanceData run(int index) const {
    const std::uint64_t seed = derive_seed(cfg_.seed, static_cast<std::uint64_t>(index));
    Rng rng(seed);
    GgmInstance inst;
    inst.a0 = draw_graph(cfg_, rng, test_graphs_, index);
    inst.theta0 = precision_from_support(inst.a0, rng, {cfg_.magnitude_low, cfg_.magnitude_high, true});
    inst.provenance = cfg_.family + "#" + std::to_string(index);
    const MaskPartition mask = hide_pairs(cfg_, inst.a0, rng);
    const AdjacencyMatrix a_obs = observed_part(inst.a0, mask);
    const Eigen::VectorXd truth = gather(inst.a0.half(), mask.unknown());

    InstanceData data;
    data.nodes = inst.a0.nodes();
    data.unknown = static_cast<Index>(mask.unknown().size());
    data.positives = static_cast<Index>(truth.sum());

    const auto ks = k_grid(data.unknown);
    data.outcome.resize(ks.size());
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
      const auto k = static_cast<Index>(ks[ki]);
      Rng obs_rng(derive_seed(seed, 1000 + ki));
      const ObservationSet x = sample_observations(inst, k, obs_rng);
      const SampleCovariance s = sample_covariance(x);
      std::optional<PrecisionEstimate> theta_hat;
      std::string mle_error;
      try {
        theta_hat = constrained_mle(s, a_obs, mask);
      } catch (const Error& e) {
        mle_error = e.what();
      }
      for (const auto& method : methods_) {
        MethodOutcome out;
        out.truth = truth;
        const auto start = std::chrono::steady_clock::now();
        try {
          const std::uint64_t method_seed = derive_seed(seed ^ name_hash(method), ki);
          out.score = run_method(method, method_seed, x, s, double(k), a_obs, mask, theta_hat,
                                 mle_error);
          out.ok = true;
        } catch (const Error& e) {
          out.error = e.what();
          data.failed = true;
        }
        out.runtime_ms = elapsed_ms(start);
        data.outcome[ki].emplace(method, std::move(out));
      }
    }
    return data;
  }

  std::vector<double> k_grid(Index unknown) const {
    if (!cfg_.k_values.empty()) return cfg_.k_values;
    std::vector<double> ks;
    for (double ratio : cfg_.k_ratios)
      ks.push_back(std::max<double>(2.0, std::round(ratio * double(unknown))));
    return ks;
  }

 private:
  Eigen::VectorXd run_method(const std::string& method, std::uint64_t seed,
                             const ObservationSet& x, const SampleCovariance& s, double k,
                             const AdjacencyMatrix& a_obs, const MaskPartition& mask,
                             const std::optional<PrecisionEstimate>& theta_hat,
                             const std::string& mle_error) const {
    const auto& unknown = mask.unknown();
    const bool needs_mle = method == "lpost" || method == "ll" || method == "threshold";
    if (needs_mle && !theta_hat) throw Error("constrained MLE failed: " + mle_error);

    SamplerConfig sampler;
    sampler.schedule = schedule_;
    sampler.samples = cfg_.samples;
    sampler.seed = seed;
    sampler.threads = 1;

    if (method == "lpost" || method == "lpr" || method == "ll") {
      PrecisionEstimate theta = theta_hat ? *theta_hat : PrecisionEstimate{};
      if (!theta_hat) theta.theta = Eigen::MatrixXd::Identity(a_obs.nodes(), a_obs.nodes());
      const LangevinProblem problem{theta, a_obs, mask, s, k};
      sampler.options.mode = method == "lpost" ? ScoreMode::posterior
                             : method == "lpr" ? ScoreMode::prior_only
                                               : ScoreMode::likelihood_only;
      const auto post = sample_posterior(problem, &prior_, sampler);
      return gather(post.mean.half(), unknown);
    }
    if (method == "threshold") {
      Eigen::MatrixXd magnitude = theta_hat->theta.cwiseAbs();
      magnitude.diagonal().setZero();
      return gather(vech(magnitude), unknown);
    }
    if (method == "wgl") {
      Eigen::VectorXd survival = Eigen::VectorXd::Zero(static_cast<Index>(unknown.size()));
      for (double lambda : cfg_.lambda_grid) {
        const auto est = wgl_estimate(s, a_obs, mask, lambda);
        for (std::size_t q = 0; q < unknown.size(); ++q) {
          const Pair e = pair_at(a_obs.nodes(), unknown[q]);
          if (est.theta(e.i, e.j) != 0.0)
            survival(static_cast<Index>(q)) = std::max(survival(static_cast<Index>(q)), lambda);
        }
      }
      return survival;
    }

    // Bootstrap-based methods only ever fix pairs that are unknown.
    Rng rng(seed);
    const auto boot = bootstrap_fix(x, cfg_.bootstrap_lambda, cfg_.bootstrap_resamples, 0.5, rng);
    if (method == "bgl") return gather(boot.frequency.half(), unknown);

    double margin = 0.0;
    std::sscanf(method.c_str(), "lpost_boot(%lf)", &margin);
    const auto fixed = fix_from_frequencies(boot.frequency, boot.resamples, margin);
    std::vector<bool> observed(static_cast<std::size_t>(mask.dim()));
    AdjacencyMatrix merged = a_obs;
    for (Index p = 0; p < mask.dim(); ++p) {
      const bool known = mask.is_observed(p) || fixed.mask.is_observed(p);
      observed[static_cast<std::size_t>(p)] = known;
      if (!mask.is_observed(p) && fixed.mask.is_observed(p)) {
        const Pair e = pair_at(a_obs.nodes(), p);
        merged.set_edge(e.i, e.j, fixed.a_obs.has_edge(e.i, e.j));
      }
    }
    const MaskPartition merged_mask(a_obs.nodes(), std::move(observed));
    const LangevinProblem problem{constrained_mle(s, merged, merged_mask), merged, merged_mask, s, k};
    sampler.options.mode = ScoreMode::posterior;
    const auto post = sample_posterior(problem, &prior_, sampler);
    return gather(post.mean.half(), unknown);
  }

  const ExperimentConfig& cfg_;
  const ScoreEstimator& prior_;
  const std::vector<AdjacencyMatrix>& test_graphs_;
  std::vector<std::string> methods_;
  NoiseSchedule schedule_;
};

const std::vector<double>& grid_for(const ExperimentConfig& cfg, const std::string& method) {
  if (method == "threshold") return cfg.theta_grid;
  if (method == "wgl") return cfg.lambda_grid;
  return cfg.thresholds;
}

std::vector<AdjacencyMatrix> build_prior(const ExperimentConfig& cfg,
                                         const std::vector<AdjacencyMatrix>& test_graphs) {
  if (!cfg.prior_manifest.empty()) return load_graphs(cfg.prior_manifest);
  if (cfg.family == "file") throw InvalidArgument("family = file needs prior_manifest");
  std::vector<AdjacencyMatrix> graphs(static_cast<std::size_t>(cfg.dataset_size));
  const std::uint64_t base = derive_seed(cfg.seed, 0xda7a5e7ULL);
  parallel_for(cfg.dataset_size, cfg.threads, [&](Index g) {
    Rng rng(derive_seed(base, static_cast<std::uint64_t>(g)));
    graphs[static_cast<std::size_t>(g)] = draw_graph(cfg, rng, test_graphs, 0);
  });
  return graphs;
}

}  // namespace

const MethodSummary* MetricReport::find(const std::string& method, double k) const {
  for (const auto& s : summaries)
    if (s.method == method && s.k == k) return &s;
  return nullptr;
}

MetricReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<AdjacencyMatrix> test_graphs =
      cfg.family == "file" ? load_graphs(cfg.test_manifest) : std::vector<AdjacencyMatrix>{};
  const GraphDataset dataset(build_prior(cfg, test_graphs));
  const EmpiricalPriorScore prior(dataset, cfg.prior_relabelings, derive_seed(cfg.seed, 0x5e1abe1ULL));
  const InstanceRunner runner(cfg, prior, test_graphs);

  std::vector<InstanceData> data(static_cast<std::size_t>(cfg.instances));
  parallel_for(cfg.instances, cfg.threads, [&](Index r) {
    data[static_cast<std::size_t>(r)] = runner.run(static_cast<int>(r));
  });

  MetricReport report;
  report.total_instances = cfg.instances;
  for (const auto& d : data) report.failed_instances += d.failed;

  // Per-instance k values can differ when k is a ratio of |U|; summaries are
  // keyed by the k index and labelled with the first instance's k.
  const std::size_t k_count = data.front().outcome.size();
  for (std::size_t ki = 0; ki < k_count; ++ki) {
    const double k_label = runner.k_grid(data.front().unknown)[ki];
    for (const auto& method : runner.methods()) {
      MethodSummary summary;
      summary.method = method;
      summary.k = k_label;
      std::vector<TuningCase> cases;
      std::vector<int> owners;
      std::vector<double> aucs;
      double runtime = 0.0;
      for (int r = 0; r < cfg.instances; ++r) {
        const auto& out = data[static_cast<std::size_t>(r)].outcome[ki].at(method);
        runtime += out.runtime_ms;
        if (!out.ok) {
          ++summary.failures;
          continue;
        }
        cases.push_back({out.truth, out.score});
        owners.push_back(r);
        if (const auto auc = metric_auc(out.truth, out.score)) aucs.push_back(*auc);
      }
      summary.runtime_ms = runtime / double(cfg.instances);
      if (cases.size() % 2 != 0) {
        cases.pop_back();
        owners.pop_back();
      }
      summary.cases = static_cast<int>(cases.size());
      if (!aucs.empty()) {
        summary.auc_mean = mean_of(aucs);
        summary.auc_std = stddev_of(aucs);
        summary.auc_cases = static_cast<int>(aucs.size());
      }
      std::vector<double> cv_f1(static_cast<std::size_t>(cfg.instances), std::nan(""));
      std::vector<double> cv_acc(static_cast<std::size_t>(cfg.instances), std::nan(""));
      if (cases.size() >= 2) {
        const auto& grid = grid_for(cfg, method);
        Rng split_rng(derive_seed(cfg.seed ^ name_hash(method), 7919 + ki));
        summary.f1 = tune_and_score(cases, grid, cfg.splits, metric_f1, split_rng);
        Rng acc_rng(derive_seed(cfg.seed ^ name_hash(method), 104729 + ki));
        summary.accuracy = tune_and_score(cases, grid, cfg.splits, metric_accuracy, acc_rng);
        for (std::size_t c = 0; c < owners.size(); ++c) {
          cv_f1[static_cast<std::size_t>(owners[c])] = summary.f1.per_case[c];
          cv_acc[static_cast<std::size_t>(owners[c])] = summary.accuracy.per_case[c];
        }
        if (method == "wgl")
          report.tuned_lambdas.emplace_back(k_label, mean_of(summary.f1.thresholds));
      }
      for (int r = 0; r < cfg.instances; ++r) {
        const auto& d = data[static_cast<std::size_t>(r)];
        const auto& out = d.outcome[ki].at(method);
        InstanceRow row;
        row.instance = r;
        row.k = runner.k_grid(d.unknown)[ki];
        row.method = method;
        row.nodes = d.nodes;
        row.unknown = d.unknown;
        row.positives = d.positives;
        row.ok = out.ok;
        const auto auc = out.ok ? metric_auc(out.truth, out.score) : std::nullopt;
        row.auc = auc ? *auc : std::nan("");
        row.cv_f1 = cv_f1[static_cast<std::size_t>(r)];
        row.cv_accuracy = cv_acc[static_cast<std::size_t>(r)];
        row.error = out.error;
        report.rows.push_back(std::move(row));
      }
      report.summaries.push_back(std::move(summary));
    }
  }
  std::set<double> distinct_k;
  for (const auto& [k, lambda] : report.tuned_lambdas) distinct_k.insert(k);
  if (distinct_k.size() >= 3) report.lambda_curve = fit_lambda_curve(report.tuned_lambdas);
  return report;
}

// --- reports ------------------------------------------------------------------

namespace {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

nlohmann::json tune_json(const TuneResult& t) {
  return {{"mean", t.mean}, {"std", t.stddev}, {"split_means", t.split_means},
          {"thresholds", t.thresholds}};
}

}  // namespace

std::string report_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "instance,k,method,nodes,unknown,positives,ok,auc,cv_f1,cv_accuracy\n";
  for (const auto& r : report.rows) {
    char k[32];
    std::snprintf(k, sizeof k, "%g", r.k);
    out << r.instance << ',' << k << ',' << r.method << ',' << r.nodes << ',' << r.unknown << ','
        << r.positives << ',' << (r.ok ? 1 : 0) << ',' << fmt_double(r.auc) << ','
        << fmt_double(r.cv_f1) << ',' << fmt_double(r.cv_accuracy) << '\n';
  }
  return out.str();
}

std::string report_json(const MetricReport& report, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["family"] = cfg.family;
  j["seed"] = cfg.seed;
  j["instances"] = report.total_instances;
  j["failed_instances"] = report.failed_instances;
  j["splits"] = cfg.splits;
  j["samples"] = cfg.samples;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& s : report.summaries) {
    nlohmann::json row{{"method", s.method},
                       {"k", s.k},
                       {"cases", s.cases},
                       {"failures", s.failures},
                       {"f1", tune_json(s.f1)},
                       {"accuracy", tune_json(s.accuracy)},
                       {"auc", {{"mean", s.auc_mean}, {"std", s.auc_std}, {"cases", s.auc_cases}}},
                       {"runtime_ms", s.runtime_ms}};
    results.push_back(std::move(row));
  }
  j["results"] = std::move(results);
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& r : report.rows)
    if (!r.ok)
      failures.push_back({{"instance", r.instance}, {"k", r.k}, {"method", r.method}, {"error", r.error}});
  j["failures"] = std::move(failures);
  nlohmann::json lambdas = nlohmann::json::array();
  for (const auto& [k, lambda] : report.tuned_lambdas) lambdas.push_back({{"k", k}, {"lambda", lambda}});
  j["wgl_tuned_lambda"] = std::move(lambdas);
  if (report.lambda_curve)
    j["lambda_curve"] = {{"a", report.lambda_curve->a}, {"b", report.lambda_curve->b},
                         {"c", report.lambda_curve->c}};
  // Comparison slots for externally computed baselines.
  j["external"] = {{"tiger", nullptr}, {"graphsage", nullptr}};
  return j.dump(2) + "\n";
}

void write_report(const MetricReport& report, const ExperimentConfig& cfg,
                  const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "instances.csv");
  std::ofstream json(dir / "summary.json");
  if (!csv || !json) throw Error("cannot write report files under " + dir.string());
  csv << report_csv(report);
  json << report_json(report, cfg);
}

}  // namespace lggm
