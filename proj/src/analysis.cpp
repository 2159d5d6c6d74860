#include "ocimix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ocimix/metrics.hpp"
#include "ocimix/rng.hpp"

namespace ocimix::analysis {

RiskWeights RiskWeights::from_counts(std::size_t current_count, std::size_t memory_count,
                                     std::size_t seen_total) {
  if (current_count == 0 || memory_count == 0 || seen_total == 0) {
    throw std::invalid_argument("RiskWeights: zero count");
  }
  RiskWeights w;
  w.lambda = static_cast<double>(current_count) / static_cast<double>(memory_count);
  w.beta = 1.0 / (1.0 + 2.0 * static_cast<double>(current_count) /
                            static_cast<double>(seen_total));
  w.validate();
  return w;
}

void RiskWeights::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("RiskWeights: lambda must be > 0");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("RiskWeights: beta outside (0,1)");
}

SetTransform pipeline_transform(std::vector<augment::AugmentOp> ops) {
  return [ops = std::move(ops)](const std::vector<stream::Example>& items,
                                std::mt19937_64& rng) {
    std::vector<stream::Example> out;
    out.reserve(items.size());
    for (const auto& e : items) out.push_back(augment::apply_pipeline(ops, e, rng));
    return out;
  };
}

SetTransform shared_pipeline_transform(std::vector<augment::AugmentOp> ops) {
  return [ops = std::move(ops)](const std::vector<stream::Example>& items,
                                std::mt19937_64& rng) {
    // Every item replays the same rng state, so each op draws identical
    // parameters (crop window, jitter factor, noise field) across the set.
    const std::uint64_t params = rng();
    std::vector<stream::Example> out;
    out.reserve(items.size());
    for (const auto& e : items) {
      std::mt19937_64 item_rng(params);
      out.push_back(augment::apply_pipeline(ops, e, item_rng));
    }
    return out;
  };
}

namespace {

double mean_ce(const nn::Model& model, const std::vector<stream::Example>& data) {
  if (data.empty()) throw std::invalid_argument("risk estimate: empty data");
  const std::size_t dim = model.input_dim();
  Tensor batch({data.size(), dim});
  std::vector<nn::SoftLabel> labels;
  labels.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::copy(data[i].features.data.begin(), data[i].features.data.end(),
              batch.data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    labels.push_back(nn::SoftLabel::one_hot(data[i].label, model.class_count));
  }
  const auto fwd = nn::forward(model, batch);
  return nn::cross_entropy(fwd.probabilities, labels);
}

std::vector<double> per_item_ce(const nn::Model& model,
                                const std::vector<stream::Example>& data) {
  const std::size_t dim = model.input_dim();
  Tensor batch({data.size(), dim});
  std::vector<nn::SoftLabel> labels;
  labels.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::copy(data[i].features.data.begin(), data[i].features.data.end(),
              batch.data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    labels.push_back(nn::SoftLabel::one_hot(data[i].label, model.class_count));
  }
  const auto fwd = nn::forward(model, batch);
  return nn::per_sample_cross_entropy(fwd.probabilities, labels);
}

McEstimate summarize(const std::vector<double>& values) {
  McEstimate est;
  est.n = values.size();
  for (double v : values) est.mean += v;
  est.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) {
    const double d = v - est.mean;
    var += d * d;
  }
  est.stddev = values.size() > 1
                   ? std::sqrt(var / static_cast<double>(values.size() - 1))
                   : 0.0;
  return est;
}

}  // namespace

double McEstimate::standard_error() const {
  return n > 0 ? stddev / std::sqrt(static_cast<double>(n)) : 0.0;
}

double memory_risk(const nn::Model& model, const std::vector<stream::Example>& augmented_memory,
                   const RiskWeights& weights) {
  // Count-derived weights satisfy beta < 1; hand-set unit weights are fine
  // here and useful for factoring the scaling out of checks.
  if (!(weights.lambda > 0.0) || !(weights.beta > 0.0)) {
    throw std::invalid_argument("memory_risk: weights must be positive");
  }
  return weights.beta * weights.lambda * mean_ce(model, augmented_memory);
}

double objective_risk(const nn::Model& model, const std::vector<stream::Example>& all_seen) {
  return mean_ce(model, all_seen);
}

McEstimate forgetting_gap_detailed(const nn::Model& model, const SetTransform& g,
                                   const std::vector<stream::Example>& memory,
                                   const std::vector<stream::Example>& all_seen,
                                   const RiskWeights& weights, std::size_t mc_samples,
                                   std::uint64_t seed) {
  if (mc_samples < 1) throw std::invalid_argument("forgetting_gap: mc_samples must be >= 1");
  if (memory.empty()) throw std::invalid_argument("forgetting_gap: empty memory");
  const double objective = objective_risk(model, all_seen);

  // Realizations are independent with per-index seeds; results land in
  // preallocated slots, so the parallel loop is order-independent and the
  // final reduction is a fixed-order serial sum. Exceptions are parked and
  // rethrown after the region.
  std::vector<double> sq(mc_samples);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(mc_samples); ++r) {
    try {
      auto rng = make_rng(seed, SeedTag::analysis, static_cast<std::uint64_t>(r));
      auto transformed = g(memory, rng);
      std::vector<stream::Example> expansion = memory;
      expansion.insert(expansion.end(), transformed.begin(), transformed.end());
      const double risk = memory_risk(model, expansion, weights);
      const double d = risk - objective;
      sq[static_cast<std::size_t>(r)] = d * d;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return summarize(sq);
}

double forgetting_gap(const nn::Model& model, const SetTransform& g,
                      const std::vector<stream::Example>& memory,
                      const std::vector<stream::Example>& all_seen,
                      const RiskWeights& weights, std::size_t mc_samples,
                      std::uint64_t seed) {
  return forgetting_gap_detailed(model, g, memory, all_seen, weights, mc_samples, seed).mean;
}

McEstimate ce_covariance_detailed(const nn::Model& model, const SetTransform& g,
                                  const std::vector<stream::Example>& memory,
                                  std::size_t mc_samples, std::uint64_t seed,
                                  std::size_t max_pairs) {
  if (mc_samples < 2) throw std::invalid_argument("ce_covariance: mc_samples must be >= 2");
  if (memory.size() < 2) throw std::invalid_argument("ce_covariance: need >= 2 memory items");

  const std::size_t n = memory.size();
  std::vector<std::vector<double>> q(mc_samples);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < static_cast<std::int64_t>(mc_samples); ++r) {
    try {
      auto rng = make_rng(seed, SeedTag::analysis, static_cast<std::uint64_t>(r));
      auto transformed = g(memory, rng);
      q[static_cast<std::size_t>(r)] = per_item_ce(model, transformed);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  for (const auto& row : q) {
    if (row.size() != n) {
      throw std::invalid_argument("ce_covariance: transform must preserve item count");
    }
  }

  std::vector<double> item_mean(n, 0.0);
  for (std::size_t r = 0; r < mc_samples; ++r) {
    for (std::size_t i = 0; i < n; ++i) item_mean[i] += q[r][i];
  }
  for (double& m : item_mean) m /= static_cast<double>(mc_samples);

  // Pair sample: all unordered pairs when feasible, otherwise a seeded
  // uniform draw of max_pairs pairs.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t all_pairs = n * (n - 1) / 2;
  if (all_pairs <= max_pairs) {
    pairs.reserve(all_pairs);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
  } else {
    auto rng = make_rng(seed, SeedTag::analysis, 0xfadedULL);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    pairs.reserve(max_pairs);
    while (pairs.size() < max_pairs) {
      const std::size_t i = pick(rng);
      const std::size_t j = pick(rng);
      if (i != j) pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }

  std::vector<double> covs(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t p = 0; p < static_cast<std::int64_t>(pairs.size()); ++p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    double cov = 0.0;
    for (std::size_t r = 0; r < mc_samples; ++r) {
      cov += (q[r][i] - item_mean[i]) * (q[r][j] - item_mean[j]);
    }
    covs[static_cast<std::size_t>(p)] = cov / static_cast<double>(mc_samples);
  }
  return summarize(covs);
}

double ce_covariance(const nn::Model& model, const SetTransform& g,
                     const std::vector<stream::Example>& memory, std::size_t mc_samples,
                     std::uint64_t seed, std::size_t max_pairs) {
  return ce_covariance_detailed(model, g, memory, mc_samples, seed, max_pairs).mean;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("spearman: need two equal-length series of >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return v[x] < v[y];
    });
    std::vector<double> rank(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
      i = j + 1;
    }
    return rank;
  };
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    mean_a += ra[i];
    mean_b += rb[i];
  }
  mean_a /= static_cast<double>(ra.size());
  mean_b /= static_cast<double>(rb.size());
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - mean_a) * (rb[i] - mean_b);
    da += (ra[i] - mean_a) * (ra[i] - mean_a);
    db += (rb[i] - mean_b) * (rb[i] - mean_b);
  }
  if (da == 0.0 || db == 0.0) return 0.0;
  return num / std::sqrt(da * db);
}

ScanResult da_strength_scan(const std::vector<DAConfig>& configs, const ScanSetup& setup) {
  if (configs.size() < 3) throw std::invalid_argument("da_strength_scan: need >= 3 configs");
  if (setup.tasks.size() < 2) throw std::invalid_argument("da_strength_scan: need >= 2 tasks");

  // Frozen pre-task state: train on every task but the last.
  std::vector<stream::TaskSpec> prefix(setup.tasks.begin(), setup.tasks.end() - 1);
  trainer::TrainerConfig base = setup.base;
  base.method = trainer::Method::er_plain;
  base.pipeline.clear();
  auto prefix_run = trainer::train_stream(base, prefix);
  const nn::Model& model_old = prefix_run.model;
  const std::vector<stream::Example>& memory = prefix_run.buffer.items();

  std::vector<stream::Example> all_seen;
  std::size_t seen_total = 0;
  for (const auto& task : prefix) {
    all_seen.insert(all_seen.end(), task.train_examples.begin(), task.train_examples.end());
  }
  const std::size_t current_count = setup.tasks.back().train_examples.size();
  seen_total = all_seen.size() + current_count;
  const auto weights = RiskWeights::from_counts(current_count, memory.size(), seen_total);

  std::vector<std::size_t> old_classes;
  for (const auto& task : prefix) {
    old_classes.insert(old_classes.end(), task.class_ids.begin(), task.class_ids.end());
  }

  ScanResult result;
  result.points.reserve(configs.size());
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    const DAConfig& cfg = configs[ci];
    const std::uint64_t cfg_seed = derive_seed(setup.base.seed, SeedTag::analysis, ci);
    // Risk/covariance estimators treat a realization as one member of the
    // transform family applied to the whole memory; the expansion set for
    // the strength indicator uses per-item draws like the training path.
    const auto g_shared = shared_pipeline_transform(cfg.ops);
    const auto g_items = pipeline_transform(cfg.ops);

    DAConfigPoint point;
    point.pipeline = cfg.name.empty() ? augment::pipeline_to_string(cfg.ops) : cfg.name;
    point.strength = augment::pipeline_strength(cfg.ops);
    point.co = ce_covariance(model_old, g_shared, memory, setup.mc_samples, cfg_seed);
    point.fg = forgetting_gap(model_old, g_shared, memory, all_seen, weights,
                              setup.mc_samples, splitmix64(cfg_seed));

    // Strength indicator, averaged over a few expansion realizations.
    double mbar_sum = 0.0;
    for (std::size_t r = 0; r < setup.mbar_realizations; ++r) {
      auto rng = make_rng(cfg_seed, SeedTag::indicator, r);
      auto transformed = g_items(memory, rng);
      std::vector<Tensor> feats;
      feats.reserve(2 * memory.size());
      for (const auto& e : memory) feats.push_back(e.features);
      if (cfg.enmix) {
        for (std::size_t i = 0; i < transformed.size(); ++i) {
          std::uniform_int_distribution<std::size_t> pick(0, transformed.size() - 1);
          std::size_t j = pick(rng);
          if (transformed.size() > 1 && j == i) j = (j + 1) % transformed.size();
          const double mu = augment::sample_beta(setup.base.mix.alpha, rng);
          feats.push_back(augment::enmix(transformed[i], transformed[j], mu,
                                         prefix_run.model.class_count)
                              .features);
        }
      } else {
        for (const auto& e : transformed) feats.push_back(e.features);
      }
      mbar_sum += metrics::variance_indicator(model_old, feats, old_classes);
    }
    point.m_bar = mbar_sum / static_cast<double>(setup.mbar_realizations);

    // Final average accuracy of full runs with this DA recipe.
    double aa_sum = 0.0;
    for (std::size_t s = 0; s < setup.aa_seeds; ++s) {
      trainer::TrainerConfig run_cfg = setup.base;
      run_cfg.method = cfg.enmix ? trainer::Method::er_enmix : trainer::Method::er_da;
      if (cfg.ops.empty() && !cfg.enmix) run_cfg.method = trainer::Method::er_plain;
      run_cfg.pipeline = cfg.ops;
      run_cfg.seed = setup.base.seed + s;
      auto run = trainer::train_stream(run_cfg, setup.tasks);
      aa_sum += metrics::average_accuracy(run.log.accuracy, setup.tasks.size());
    }
    point.final_aa = aa_sum / static_cast<double>(setup.aa_seeds);
    result.points.push_back(std::move(point));
  }

  std::vector<double> co, fg, mbar, aa;
  for (const auto& p : result.points) {
    co.push_back(p.co);
    fg.push_back(p.fg);
    mbar.push_back(p.m_bar);
    aa.push_back(p.final_aa);
  }
  result.spearman_co_fg = spearman(co, fg);
  result.spearman_mbar_aa = spearman(mbar, aa);
  return result;
}

}  // namespace ocimix::analysis
