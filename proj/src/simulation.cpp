#include "ssate/simulation.hpp"

#include <cmath>
#include <mutex>

#include "ssate/parallel.hpp"
#include "ssate/resampling.hpp"
#include "ssate/rng.hpp"
#include "ssate/stats.hpp"

namespace ssate {

namespace {
constexpr std::uint64_t kDataStream = 0xDA7A0003;
constexpr std::uint64_t kTruthStream = 0x72074004;
constexpr std::uint64_t kRepStream = 0x4E9C0005;
constexpr std::uint64_t kSimStream = 0xC07E0006;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
}  // namespace

std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::both_correct: return "both-correct";
    case ScenarioKind::mis_mu: return "mis-mu";
    case ScenarioKind::mis_pi: return "mis-pi";
  }
  return "unknown";
}

ScenarioKind parse_scenario(const std::string& name) {
  if (name == "both-correct" || name == "both_correct") return ScenarioKind::both_correct;
  if (name == "mis-mu" || name == "mis_mu") return ScenarioKind::mis_mu;
  if (name == "mis-pi" || name == "mis_pi") return ScenarioKind::mis_pi;
  throw InputError("unknown scenario '" + name +
                   "' (expected both-correct, mis-mu, or mis-pi)");
}

SimulationScenario make_scenario(ScenarioKind kind) {
  SimulationScenario s;
  s.kind = kind;

  s.alpha1 = Eigen::VectorXd::Constant(10, 0.35);
  s.beta1.resize(10);
  s.beta1 << 1, 1, 1, 0.5, 0.5, 0.5, -1.15, -1, -1, -1;

  s.alpha1_1.resize(10);
  s.alpha1_1 << 0, .35, 0, .35, 0, .35, 0, .35, 0, .35;
  s.alpha1_1 *= 0.5;
  s.alpha1_2.resize(10);
  s.alpha1_2 << .35, 0, .35, 0, .35, 0, .35, 0, .35, 0;

  s.beta1_1.resize(10);
  s.beta1_1 << 1, 0, 1, 0, .5, 0, -.5, 0, -1, 0;
  s.beta1_1 *= 0.5;
  s.beta1_2.resize(10);
  s.beta1_2 << 0, .5, 0, .5, 0, .5, 0, .5, 0, .5;

  // Columns: intercept | X1..X5 | X6..X10 | T | Y.
  s.gamma.resize(5, 13);
  s.gamma.setZero();
  s.gamma.block(0, 1, 5, 5).setConstant(0.1);
  s.gamma.block(0, 6, 5, 5).setConstant(-0.1);
  s.gamma.col(11).setConstant(0.1);
  s.gamma.col(12) << 5, 5, 2.5, 0, 0;
  return s;
}

double SimulationScenario::true_ps(const Eigen::VectorXd& x) const {
  if (kind == ScenarioKind::mis_pi)
    return logistic(alpha0 + alpha1_1.dot(x) * (alpha1_2.dot(x) + 1.0));
  return logistic(alpha0 + alpha1.dot(x));
}

double SimulationScenario::true_mu(const Eigen::VectorXd& x, double treatment) const {
  if (kind == ScenarioKind::mis_mu)
    return logistic(beta0 + beta1_1.dot(x) * (beta1_2.dot(x) + 1.0) + beta2 * treatment);
  return logistic(beta0 + beta1.dot(x) + beta2 * treatment);
}

Dataset generate_dataset(const SimulationScenario& sc, int n, int total, std::uint64_t seed) {
  if (n < 2 || n > total) throw InputError("generate_dataset: need 2 <= n <= N");
  Rng rng(seed, kDataStream);

  Dataset d;
  d.x.resize(total, sc.p_x);
  d.w.resize(total, sc.p_w);
  d.t.resize(total);
  d.y.resize(total);

  const double sx_common = std::sqrt(sc.sigma2_x * sc.rho_x);
  const double sx_own = std::sqrt(sc.sigma2_x * (1.0 - sc.rho_x));
  const double sw_common = std::sqrt(sc.sigma2_w * sc.rho_w);
  const double sw_own = std::sqrt(sc.sigma2_w * (1.0 - sc.rho_w));

  Eigen::VectorXd x(sc.p_x);
  Eigen::VectorXd gz(1 + sc.p_x + 2);
  for (int i = 0; i < total; ++i) {
    double z0 = rng.normal();
    for (int j = 0; j < sc.p_x; ++j) x[j] = sx_common * z0 + sx_own * rng.normal();
    double t = rng.uniform01() < sc.true_ps(x) ? 1.0 : 0.0;
    double y = rng.uniform01() < sc.true_mu(x, t) ? 1.0 : 0.0;

    gz[0] = 1.0;
    gz.segment(1, sc.p_x) = x;
    gz[1 + sc.p_x] = t;
    gz[2 + sc.p_x] = y;
    Eigen::VectorXd loading = sc.gamma * gz;
    double e0 = rng.normal();
    for (int j = 0; j < sc.p_w; ++j)
      d.w(i, j) = std::floor(loading[j] + sw_common * e0 + sw_own * rng.normal());

    d.x.row(i) = x;
    d.t[i] = t;
    d.y[i] = i < n ? y : std::numeric_limits<double>::quiet_NaN();
  }
  d.labeled.resize(n);
  for (int i = 0; i < n; ++i) d.labeled[i] = i;
  return d;
}

DeltaTruth delta_true(const SimulationScenario& sc, long draws, std::uint64_t seed) {
  struct Key {
    ScenarioKind kind;
    long draws;
    std::uint64_t seed;
    double beta2;
    bool operator<(const Key& o) const {
      return std::tie(kind, draws, seed, beta2) < std::tie(o.kind, o.draws, o.seed, o.beta2);
    }
  };
  static std::map<Key, DeltaTruth> cache;
  static std::mutex mutex;
  Key key{sc.kind, draws, seed, sc.beta2};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }

  Rng rng(seed, kTruthStream, static_cast<std::uint64_t>(sc.kind));
  const double sx_common = std::sqrt(sc.sigma2_x * sc.rho_x);
  const double sx_own = std::sqrt(sc.sigma2_x * (1.0 - sc.rho_x));
  Eigen::VectorXd x(sc.p_x);
  double mean = 0.0, m2 = 0.0;
  for (long r = 0; r < draws; ++r) {
    double z0 = rng.normal();
    for (int j = 0; j < sc.p_x; ++j) x[j] = sx_common * z0 + sx_own * rng.normal();
    double d = sc.true_mu(x, 1.0) - sc.true_mu(x, 0.0);
    double delta = d - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (d - mean);
  }
  DeltaTruth out;
  out.value = mean;
  out.mc_se = std::sqrt(m2 / static_cast<double>(draws - 1) / static_cast<double>(draws));
  {
    std::lock_guard<std::mutex> lock(mutex);
    cache[key] = out;
  }
  return out;
}

BenchmarkResult run_benchmark(const std::vector<ScenarioKind>& scenarios,
                              const std::vector<SizeSpec>& sizes,
                              const std::vector<EstimatorKind>& kinds, int reps,
                              std::uint64_t seed, const ModelConfig& config) {
  if (reps < 2) throw InputError("run_benchmark: need at least 2 replications");
  if (scenarios.empty() || sizes.empty() || kinds.empty())
    throw InputError("run_benchmark: empty scenario/size/estimator list");

  BenchmarkResult result;
  for (ScenarioKind sk : scenarios) {
    SimulationScenario sc = make_scenario(sk);
    DeltaTruth truth = delta_true(sc);
    for (const SizeSpec& size : sizes) {
      std::vector<std::map<EstimatorKind, EstimateReport>> reports(reps);
      std::vector<char> failed(reps, 0);
      parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
        std::uint64_t rep_seed =
            seed ^ (kRepStream + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(r) + 1));
        try {
          Dataset data = generate_dataset(sc, size.n, size.total,
                                          rep_seed + static_cast<std::uint64_t>(sk) * 131);
          reports[r] = run_estimators(kinds, data, config);
        } catch (const std::exception&) {
          failed[r] = 1;
        }
      });

      int failures = 0;
      for (char f : failed) failures += f;
      if (failures > 0.02 * reps)
        throw EstimationError("run_benchmark: " + std::to_string(failures) + " of " +
                              std::to_string(reps) + " replications failed (over the 2% cap)");

      std::map<EstimatorKind, std::vector<double>> deltas;
      for (int r = 0; r < reps; ++r) {
        if (failed[r]) continue;
        for (const auto& [k, rep] : reports[r]) deltas[k].push_back(rep.delta);
      }

      double mse_cc_dr = std::numeric_limits<double>::quiet_NaN();
      if (deltas.count(EstimatorKind::cc_dr)) {
        double s = 0.0;
        for (double v : deltas[EstimatorKind::cc_dr]) s += (v - truth.value) * (v - truth.value);
        mse_cc_dr = s / static_cast<double>(deltas[EstimatorKind::cc_dr].size());
      }

      for (EstimatorKind k : kinds) {
        const std::vector<double>& d = deltas[k];
        BenchmarkRow row;
        row.scenario = sk;
        row.n = size.n;
        row.total = size.total;
        row.kind = k;
        row.reps_used = static_cast<int>(d.size());
        row.failures = failures;
        row.seed = seed;
        row.delta_true = truth.value;
        row.delta_true_se = truth.mc_se;
        double mean = sample_mean(d);
        double mse = 0.0;
        for (double v : d) mse += (v - truth.value) * (v - truth.value);
        mse /= static_cast<double>(d.size());
        row.bias = mean - truth.value;
        row.rmse = std::sqrt(mse);
        row.re_vs_cc_dr = mse_cc_dr / mse;
        result.rows.push_back(row);
      }
    }
  }
  return result;
}

CoverageReport run_coverage(int n, int total, int sims, int draws, std::uint64_t seed,
                            const ModelConfig& config) {
  if (sims < 50) throw InputError("run_coverage: need at least 50 simulations");
  if (draws < 100) throw InputError("run_coverage: need at least 100 draws");

  SimulationScenario sc = make_scenario(ScenarioKind::both_correct);
  DeltaTruth truth = delta_true(sc);

  struct SimOut {
    bool ok = false;
    double point = 0.0;
    double se_sd = 0.0;
    double se_mad = 0.0;
    bool covered = false;
  };
  std::vector<SimOut> outs(sims);

  parallel_for(static_cast<std::size_t>(sims), [&](std::size_t s) {
    std::uint64_t sim_seed =
        seed ^ (kSimStream + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(s) + 1));
    try {
      Dataset data = generate_dataset(sc, n, total, sim_seed);
      TuningSelections tuning;
      auto point =
          run_estimators({EstimatorKind::ss_dr}, data, config, Eigen::VectorXd(), nullptr,
                         &tuning);
      double delta_hat = point.at(EstimatorKind::ss_dr).delta;

      PerturbationScheme scheme;
      scheme.distribution = config.perturb_dist;
      scheme.draws = draws;
      scheme.seed = sim_seed;
      std::vector<double> star;
      star.reserve(draws);
      int excluded = 0;
      for (int b = 0; b < draws; ++b) {
        Eigen::VectorXd w = draw_weights(scheme, data.rows(), b);
        try {
          star.push_back(perturb_estimate(data, config, w, EstimatorKind::ss_dr, &tuning));
        } catch (const EstimationError&) {
          ++excluded;
        }
      }
      if (excluded > 0.05 * draws)
        throw EstimationError("coverage: too many degenerate draws");
      ResampleSummary summary = summarize(star, delta_hat, config.ci_level);

      SimOut& o = outs[s];
      o.ok = true;
      o.point = delta_hat;
      o.se_sd = summary.se_sd;
      o.se_mad = summary.se_mad;
      o.covered = summary.ci_lo <= truth.value && truth.value <= summary.ci_hi;
    } catch (const std::exception&) {
      outs[s].ok = false;
    }
  });

  std::vector<double> points, sds, mads;
  int covered = 0, used = 0;
  for (const SimOut& o : outs) {
    if (!o.ok) continue;
    ++used;
    points.push_back(o.point);
    sds.push_back(o.se_sd);
    mads.push_back(o.se_mad);
    if (o.covered) ++covered;
  }
  int failures = sims - used;
  if (failures > 0.02 * sims)
    throw EstimationError("run_coverage: " + std::to_string(failures) + " of " +
                          std::to_string(sims) + " simulations failed (over the 2% cap)");

  CoverageReport rep;
  rep.n = n;
  rep.total = total;
  rep.sims_used = used;
  rep.failures = failures;
  rep.delta_true = truth.value;
  rep.bias = sample_mean(points) - truth.value;
  rep.emp_se = sample_sd(points);
  rep.ase_sd = sample_mean(sds);
  rep.ase_mad = sample_mean(mads);
  double mse = 0.0;
  for (double v : points) mse += (v - truth.value) * (v - truth.value);
  rep.rmse = std::sqrt(mse / static_cast<double>(points.size()));
  rep.coverage = static_cast<double>(covered) / static_cast<double>(used);
  return rep;
}

}  // namespace ssate
