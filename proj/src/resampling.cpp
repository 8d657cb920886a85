#include "ssate/resampling.hpp"

#include <algorithm>
#include <cmath>

#include "ssate/parallel.hpp"
#include "ssate/rng.hpp"
#include "ssate/stats.hpp"

namespace ssate {

namespace {
constexpr std::uint64_t kBetaStream = 0xB3740001;
constexpr std::uint64_t kBootStream = 0xB0070002;
}  // namespace

Eigen::VectorXd draw_weights(const PerturbationScheme& scheme, int n_rows, int draw_index) {
  if (n_rows <= 0) throw InputError("draw_weights: need at least one row");
  if (draw_index < 0) throw InputError("draw_weights: negative draw index");
  Eigen::VectorXd w(n_rows);
  if (scheme.distribution == PerturbDist::scaled_beta) {
    Rng rng(scheme.seed, kBetaStream, static_cast<std::uint64_t>(draw_index));
    for (int i = 0; i < n_rows; ++i) w[i] = 4.0 * rng.beta(0.5, 1.5);
  } else {
    Rng rng(scheme.seed, kBootStream, static_cast<std::uint64_t>(draw_index));
    w.setZero();
    for (int i = 0; i < n_rows; ++i)
      w[static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_rows)))] += 1.0;
  }
  return w;
}

double perturb_estimate(const Dataset& data, const ModelConfig& config,
                        const Eigen::VectorXd& weights, EstimatorKind kind,
                        const TuningSelections* tuning) {
  return run_estimators({kind}, data, config, weights, tuning).at(kind).delta;
}

ResampleSummary summarize(const std::vector<double>& draws, double point_estimate, double level) {
  (void)point_estimate;  // intervals and p-values are percentile-based
  if (draws.size() < 100)
    throw EstimationError("summarize: need at least 100 valid draws, have " +
                          std::to_string(draws.size()));
  if (!(level > 0.0 && level < 1.0)) throw InputError("summarize: level must lie in (0, 1)");

  ResampleSummary s;
  s.draws = draws;
  s.se_sd = sample_sd(draws);
  s.se_mad = mad_scale(draws);

  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  double a = 1.0 - level;
  s.ci_lo = quantile_sorted_type7(sorted, a / 2.0);
  s.ci_hi = quantile_sorted_type7(sorted, 1.0 - a / 2.0);

  // Smallest level at which the percentile CI excludes zero: twice the
  // smaller tail mass at zero, floored at the 2/B resolution.
  double b = static_cast<double>(draws.size());
  double n_le = static_cast<double>(std::count_if(sorted.begin(), sorted.end(),
                                                  [](double v) { return v <= 0.0; }));
  double n_ge = static_cast<double>(std::count_if(sorted.begin(), sorted.end(),
                                                  [](double v) { return v >= 0.0; }));
  double p = 2.0 * std::min(n_le, n_ge) / b;
  s.pvalue = std::clamp(p, 2.0 / b, 1.0);
  return s;
}

InferenceResult resample_inference(const Dataset& data, const ModelConfig& config,
                                   const std::vector<EstimatorKind>& kinds) {
  data.validate();
  config.validate();

  InferenceResult result;
  std::vector<EstimatorKind> active;

  // Phase 1: one shared pass computes the point estimates and freezes every
  // grid and penalty level the active estimators touch.
  {
    std::map<EstimatorKind, std::string> point_errors;
    auto reps = run_estimators_tolerant(kinds, data, config, Eigen::VectorXd(), nullptr,
                                        &result.tuning, &point_errors);
    for (EstimatorKind kind : kinds) {
      auto it = reps.find(kind);
      if (it != reps.end()) {
        result.point[kind] = it->second;
        active.push_back(kind);
      } else {
        result.errors[kind] = point_errors[kind];
      }
    }
  }
  if (active.empty()) return result;

  PerturbationScheme scheme;
  scheme.distribution = config.perturb_dist;
  scheme.draws = config.n_perturb;
  scheme.seed = config.seed;
  scheme.validate();

  const int b_total = scheme.draws;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::map<EstimatorKind, std::vector<double>> all_draws;
  for (EstimatorKind k : active) all_draws[k].assign(b_total, nan);

  parallel_for(static_cast<std::size_t>(b_total), [&](std::size_t b) {
    Eigen::VectorXd w = draw_weights(scheme, data.rows(), static_cast<int>(b));
    try {
      auto reps = run_estimators_tolerant(active, data, config, w, &result.tuning, nullptr,
                                          nullptr);
      for (const auto& [k, rep] : reps) all_draws[k][b] = rep.delta;
    } catch (const EstimationError&) {
      // whole draw excluded for every estimator
    }
  });

  for (EstimatorKind k : active) {
    std::vector<double> valid;
    valid.reserve(b_total);
    int excluded = 0;
    for (double v : all_draws[k]) {
      if (std::isfinite(v))
        valid.push_back(v);
      else
        ++excluded;
    }
    if (excluded > 0.05 * b_total) {
      result.errors[k] = "resampling: " + std::to_string(excluded) + " of " +
                         std::to_string(b_total) + " draws degenerate (over the 5% cap)";
      result.point.erase(k);
      continue;
    }
    try {
      ResampleSummary s = summarize(valid, result.point.at(k).delta, config.ci_level);
      s.excluded = excluded;
      result.summaries[k] = std::move(s);
    } catch (const EstimationError& e) {
      result.errors[k] = e.what();
      result.point.erase(k);
    }
  }
  return result;
}

}  // namespace ssate
