// Command-line front end: dataset generation, experiments, score audits and
// bootstrap edge fixing.
#include "lggm/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace lggm;

namespace {

// Registers one --<key> option per experiment setting; values are applied
// after any config file so flags win.
struct SettingFlags {
  std::map<std::string, std::string> values;

  void attach(CLI::App& app) {
    for (const auto& [key, help] : setting_keys()) app.add_option("--" + key, values[key], help);
  }

  ExperimentConfig resolve(const std::string& config_path) const {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    for (const auto& [key, value] : values)
      if (!value.empty()) apply_setting(cfg, key, value);
    return cfg;
  }
};

int cmd_generate(const ExperimentConfig& cfg, int count, const std::string& out) {
  if (count < 1) throw InvalidArgument("--count must be >= 1");
  std::vector<AdjacencyMatrix> graphs(static_cast<std::size_t>(count));
  if (cfg.family == "ergm") {
    Rng rng(cfg.seed);
    graphs = ergm_chain(cfg.ergm, rng, count);
  } else {
    parallel_for(count, cfg.threads, [&](Index g) {
      Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(g)));
      if (cfg.family == "grid") {
        graphs[static_cast<std::size_t>(g)] = grid_graph(rng, cfg.grid);
      } else if (cfg.family == "ba") {
        std::uniform_int_distribution<std::size_t> pick(0, cfg.ba_nodes.size() - 1);
        graphs[static_cast<std::size_t>(g)] =
            dual_barabasi_albert(rng, cfg.ba_nodes[pick(rng)], cfg.ba_n1, cfg.ba_n2, cfg.ba_pi);
      } else {
        throw InvalidArgument("generate supports families grid, ba and ergm");
      }
    });
  }
  write_dataset(out, graphs);
  std::printf("wrote %d graphs to %s\n", count, out.c_str());
  return 0;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& out) {
  const auto report = run_experiment(cfg);
  write_report(report, cfg, out);
  std::printf("%-18s %8s %6s %8s %8s %8s %8s\n", "method", "k", "cases", "f1", "f1_sd", "acc",
              "auc");
  for (const auto& s : report.summaries)
    std::printf("%-18s %8g %6d %8.4f %8.4f %8.4f %8.4f\n", s.method.c_str(), s.k, s.cases,
                s.f1.mean, s.f1.stddev, s.accuracy.mean, s.auc_mean);
  std::printf("failed instances: %d of %d\n", report.failed_instances, report.total_instances);
  if (report.failed_instances > cfg.max_failures) {
    std::fprintf(stderr, "error: %d failed instances exceed the tolerance of %d\n",
                 report.failed_instances, cfg.max_failures);
    return 3;
  }
  return 0;
}

double central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x, Index q, double h) {
  Eigen::VectorXd up = x, down = x;
  up(q) += h;
  down(q) -= h;
  return (f(up) - f(down)) / (2.0 * h);
}

int cmd_score_check(int instances, std::uint64_t seed, double tol) {
  Rng rng(seed);
  std::uniform_int_distribution<Index> nodes(3, 8);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  std::bernoulli_distribution coin(0.5);
  double worst_lik = 0.0, worst_prior = 0.0;
  for (int r = 0; r < instances; ++r) {
    const Index n = nodes(rng);
    AdjacencyMatrix a(n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (coin(rng)) a.set_edge(i, j, true);
    GgmInstance inst{a, precision_from_support(a, rng), "audit"};
    const double k = coin(rng) ? 5.0 : 50.0;
    const auto s = sample_covariance(sample_observations(inst, static_cast<Index>(k), rng));
    Eigen::VectorXd x(half_dim(n));
    for (Index q = 0; q < x.size(); ++q) x(q) = unit(rng);

    const Eigen::VectorXd g = likelihood_score(inst.theta0, RelaxedAdjacency::from_half(x), s, k);
    const auto lik = [&](const Eigen::VectorXd& v) {
      return masked_log_likelihood(inst.theta0.theta, RelaxedAdjacency::from_half(v), s, k);
    };
    const double scale_l = std::max(1e-8, g.cwiseAbs().maxCoeff());
    for (Index q = 0; q < x.size(); ++q)
      worst_lik = std::max(worst_lik, std::abs(g(q) - central_difference(lik, x, q, 1e-5)) / scale_l);

    std::vector<AdjacencyMatrix> graphs;
    for (int m = 0; m < 4; ++m) {
      AdjacencyMatrix b(n);
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j)
          if (coin(rng)) b.set_edge(i, j, true);
      graphs.push_back(b);
    }
    const GraphDataset ds(graphs);
    const double sigma = 0.3 + 0.5 * unit(rng);
    const Eigen::VectorXd p = empirical_prior_score(ds, x, sigma);
    const auto dens = [&](const Eigen::VectorXd& v) { return empirical_prior_log_density(ds, v, sigma); };
    const double scale_p = std::max(1.0, p.cwiseAbs().maxCoeff());
    for (Index q = 0; q < x.size(); ++q)
      worst_prior = std::max(worst_prior, std::abs(p(q) - central_difference(dens, x, q, 1e-5)) / scale_p);
  }
  std::printf("likelihood score: max relative error %.3e over %d instances\n", worst_lik, instances);
  std::printf("prior score:      max relative error %.3e over %d instances\n", worst_prior, instances);
  const bool ok = worst_lik <= tol && worst_prior <= tol;
  std::printf("%s (tolerance %.1e)\n", ok ? "ok" : "FAILED", tol);
  return ok ? 0 : 4;
}

ObservationSet read_observations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open observations file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidArgument("observations file has rows of different lengths");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("observations file is empty");
  // One observation per line; columns are variables.
  Eigen::MatrixXd x(static_cast<Index>(rows.front().size()), static_cast<Index>(rows.size()));
  for (std::size_t c = 0; c < rows.size(); ++c)
    for (std::size_t v = 0; v < rows[c].size(); ++v)
      x(static_cast<Index>(v), static_cast<Index>(c)) = rows[c][v];
  return ObservationSet(x);
}

int cmd_bootstrap(const std::string& observations, Index nodes, Index k, double lambda,
                  int resamples, double margin, std::uint64_t seed, int threads) {
  Rng rng(seed);
  std::optional<ObservationSet> x;
  std::optional<AdjacencyMatrix> truth;
  if (!observations.empty()) {
    x = read_observations(observations);
  } else {
    const auto a = dual_barabasi_albert(rng, nodes, 2, 4, 0.5);
    GgmInstance inst{a, precision_from_support(a, rng), "synthetic"};
    x = sample_observations(inst, k, rng);
    truth = a;
  }
  const auto res = bootstrap_fix(*x, lambda, resamples, margin, rng, threads);
  std::printf("# resamples %d, failures %d, margin %g, fixed %zu of %lld pairs\n", res.resamples,
              res.failures, res.margin, res.mask.observed().size(),
              static_cast<long long>(res.mask.dim()));
  std::printf("# i j value frequency%s\n", truth ? " truth" : "");
  for (const Pair& p : res.mask.observed_pairs()) {
    std::printf("%lld %lld %d %.4f", static_cast<long long>(p.i), static_cast<long long>(p.j),
                res.a_obs.has_edge(p.i, p.j) ? 1 : 0, res.frequency(p.i, p.j));
    if (truth) std::printf(" %d", truth->has_edge(p.i, p.j) ? 1 : 0);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Annealed Langevin estimation of Gaussian graphical model edges"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write a graph dataset directory");
  SettingFlags gen_flags;
  std::string gen_config, gen_out;
  int gen_count = 100;
  gen->add_option("--config", gen_config, "key = value settings file");
  gen->add_option("--count", gen_count, "number of graphs");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen_flags.attach(*gen);

  auto* run = app.add_subcommand("run", "run an experiment and write instances.csv and summary.json");
  SettingFlags run_flags;
  std::string run_config, run_out = "results";
  run->add_option("--config", run_config, "key = value settings file");
  run->add_option("--out", run_out, "output directory");
  run_flags.attach(*run);

  auto* check = app.add_subcommand("score-check", "finite-difference audit of the score functions");
  int check_instances = 50;
  std::uint64_t check_seed = 1;
  double check_tol = 1e-5;
  check->add_option("--instances", check_instances, "random instances");
  check->add_option("--seed", check_seed, "seed");
  check->add_option("--tol", check_tol, "largest accepted relative error");

  auto* boot = app.add_subcommand("bootstrap-fix", "fix confident entries by bootstrapped graphical lasso");
  std::string boot_obs;
  Index boot_nodes = 20, boot_k = 100;
  double boot_lambda = 0.1, boot_margin = 0.2;
  int boot_resamples = 50, boot_threads = 0;
  std::uint64_t boot_seed = 1;
  boot->add_option("--observations", boot_obs, "CSV file, one observation per line");
  boot->add_option("--nodes", boot_nodes, "synthetic instance size when no file is given");
  boot->add_option("--k", boot_k, "synthetic observation count");
  boot->add_option("--lambda", boot_lambda, "graphical lasso penalty");
  boot->add_option("--resamples", boot_resamples, "bootstrap resamples B");
  boot->add_option("--margin", boot_margin, "probability margin p_m");
  boot->add_option("--seed", boot_seed, "seed");
  boot->add_option("--threads", boot_threads, "worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(gen_flags.resolve(gen_config), gen_count, gen_out);
    if (*run) return cmd_run(run_flags.resolve(run_config), run_out);
    if (*check) return cmd_score_check(check_instances, check_seed, check_tol);
    if (*boot)
      return cmd_bootstrap(boot_obs, boot_nodes, boot_k, boot_lambda, boot_resamples, boot_margin,
                           boot_seed, boot_threads);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
