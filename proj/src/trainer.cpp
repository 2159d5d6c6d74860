#include "ocimix/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ocimix/rng.hpp"

namespace ocimix::trainer {

Method method_from_string(const std::string& name) {
  if (name == "finetune") return Method::finetune;
  if (name == "er_plain") return Method::er_plain;
  if (name == "er_da") return Method::er_da;
  if (name == "er_enmix") return Method::er_enmix;
  if (name == "er_adpmix") return Method::er_adpmix;
  if (name == "er_dualmix") return Method::er_dualmix;
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::string method_to_string(Method m) {
  switch (m) {
    case Method::finetune: return "finetune";
    case Method::er_plain: return "er_plain";
    case Method::er_da: return "er_da";
    case Method::er_enmix: return "er_enmix";
    case Method::er_adpmix: return "er_adpmix";
    case Method::er_dualmix: return "er_dualmix";
  }
  throw std::logic_error("method_to_string: bad enum");
}

namespace {

augment::MixedExample lift(const stream::Example& e, std::size_t class_count,
                           std::ptrdiff_t source) {
  augment::MixedExample m;
  m.features = e.features;
  m.label = nn::SoftLabel::one_hot(e.label, class_count);
  m.provenance.source_i = source;
  m.provenance.source_j = source;
  return m;
}

// Random pairing with no fixed points when the batch has >= 2 items; any
// fixed point left by the shuffle is swapped with its cyclic successor.
std::vector<std::size_t> derangement_pairing(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  if (n >= 2) {
    for (std::size_t i = 0; i < n; ++i) {
      if (perm[i] == i) std::swap(perm[i], perm[(i + 1) % n]);
    }
  }
  return perm;
}

// Mean head-row norm over a class set; nullopt when the set is empty.
std::optional<double> mean_head_norm(const nn::Model& model,
                                     const std::vector<std::size_t>& classes) {
  if (classes.empty()) return std::nullopt;
  const auto norms = nn::classifier_weight_norms(model, classes);
  double sum = 0.0;
  for (double v : norms) sum += v;
  return sum / static_cast<double>(norms.size());
}

std::vector<augment::MixedExample> enmix_block(const std::vector<stream::Example>& memory_batch,
                                               const ComposeContext& ctx) {
  std::vector<stream::Example> augmented;
  augmented.reserve(memory_batch.size());
  for (const auto& e : memory_batch) {
    augmented.push_back(augment::apply_pipeline(*ctx.pipeline, e, *ctx.rng_augment));
  }
  const auto partner = derangement_pairing(augmented.size(), *ctx.rng_mix);
  std::vector<augment::MixedExample> out;
  out.reserve(augmented.size());
  for (std::size_t i = 0; i < augmented.size(); ++i) {
    const double mu = augment::sample_beta(ctx.mix->alpha, *ctx.rng_mix);
    auto mixed = augment::enmix(augmented[i], augmented[partner[i]], mu, ctx.class_count);
    mixed.provenance.source_i = static_cast<std::ptrdiff_t>(i);
    mixed.provenance.source_j = static_cast<std::ptrdiff_t>(partner[i]);
    out.push_back(std::move(mixed));
  }
  return out;
}

std::vector<augment::MixedExample> adpmix_block(const stream::StreamBatch& current,
                                                const std::vector<stream::Example>& memory_batch,
                                                const nn::Model& model,
                                                const ComposeContext& ctx) {
  std::vector<augment::MixedExample> out;
  if (current.examples.empty() || memory_batch.empty()) return out;

  // Only memory samples from outside the current task qualify as the old
  // side of a cross pair.
  std::set<std::size_t> current_set(ctx.current_classes.begin(), ctx.current_classes.end());
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < memory_batch.size(); ++i) {
    if (!current_set.count(memory_batch[i].label)) eligible.push_back(i);
  }
  if (eligible.empty()) return out;

  const auto new_mean = mean_head_norm(model, ctx.current_classes);
  const auto old_mean = mean_head_norm(model, ctx.old_classes);
  const double norm_new = new_mean.value_or(0.0);
  const double norm_old = old_mean.value_or(0.0);

  std::uniform_int_distribution<std::size_t> pick_old(0, eligible.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_new(0, current.examples.size() - 1);
  out.reserve(memory_batch.size());
  for (std::size_t j = 0; j < memory_batch.size(); ++j) {
    const std::size_t oi = eligible[pick_old(*ctx.rng_mix)];
    const std::size_t ni = pick_new(*ctx.rng_mix);
    const double mu_x = augment::sample_beta(ctx.mix->alpha, *ctx.rng_mix);
    const double mu_y = augment::adaptive_mu_y(mu_x, norm_new, norm_old, *ctx.mix);
    auto mixed = augment::adpmix(memory_batch[oi], current.examples[ni], mu_x, mu_y,
                                 ctx.class_count);
    mixed.provenance.source_i = static_cast<std::ptrdiff_t>(oi);
    mixed.provenance.source_j = static_cast<std::ptrdiff_t>(ni);
    out.push_back(std::move(mixed));
  }
  return out;
}

}  // namespace

std::vector<augment::MixedExample> compose_training_batch(
    const stream::StreamBatch& current, const std::vector<stream::Example>& memory_batch,
    const nn::Model& model, const ComposeContext& ctx) {
  std::vector<augment::MixedExample> batch;
  batch.reserve(current.examples.size() + 2 * memory_batch.size());

  for (std::size_t i = 0; i < current.examples.size(); ++i) {
    if (ctx.augment_current && ctx.pipeline && !ctx.pipeline->empty()) {
      auto aug = augment::apply_pipeline(*ctx.pipeline, current.examples[i], *ctx.rng_augment);
      batch.push_back(lift(aug, ctx.class_count, static_cast<std::ptrdiff_t>(i)));
    } else {
      batch.push_back(lift(current.examples[i], ctx.class_count,
                           static_cast<std::ptrdiff_t>(i)));
    }
  }
  if (ctx.method == Method::finetune || memory_batch.empty()) return batch;

  switch (ctx.method) {
    case Method::er_plain:
      for (std::size_t i = 0; i < memory_batch.size(); ++i) {
        batch.push_back(lift(memory_batch[i], ctx.class_count,
                             static_cast<std::ptrdiff_t>(i)));
      }
      break;
    case Method::er_da:
      for (std::size_t i = 0; i < memory_batch.size(); ++i) {
        auto aug = augment::apply_pipeline(*ctx.pipeline, memory_batch[i], *ctx.rng_augment);
        batch.push_back(lift(aug, ctx.class_count, static_cast<std::ptrdiff_t>(i)));
      }
      break;
    case Method::er_enmix: {
      auto mixed = enmix_block(memory_batch, ctx);
      std::move(mixed.begin(), mixed.end(), std::back_inserter(batch));
      break;
    }
    case Method::er_adpmix: {
      for (std::size_t i = 0; i < memory_batch.size(); ++i) {
        batch.push_back(lift(memory_batch[i], ctx.class_count,
                             static_cast<std::ptrdiff_t>(i)));
      }
      auto cross = adpmix_block(current, memory_batch, model, ctx);
      std::move(cross.begin(), cross.end(), std::back_inserter(batch));
      break;
    }
    case Method::er_dualmix: {
      if (ctx.include_plain_aug) {
        for (std::size_t i = 0; i < memory_batch.size(); ++i) {
          auto aug = augment::apply_pipeline(*ctx.pipeline, memory_batch[i], *ctx.rng_augment);
          batch.push_back(lift(aug, ctx.class_count, static_cast<std::ptrdiff_t>(i)));
        }
      }
      auto mixed = enmix_block(memory_batch, ctx);
      std::move(mixed.begin(), mixed.end(), std::back_inserter(batch));
      auto cross = adpmix_block(current, memory_batch, model, ctx);
      std::move(cross.begin(), cross.end(), std::back_inserter(batch));
      break;
    }
    case Method::finetune:
      break;
  }
  return batch;
}

std::pair<std::vector<double>, metrics::Confusion> evaluate(
    const nn::Model& model, const std::vector<stream::TaskSpec>& tasks_seen) {
  if (tasks_seen.empty()) throw std::invalid_argument("evaluate: no tasks");
  const std::size_t dim = model.input_dim();
  std::vector<double> accuracies;
  accuracies.reserve(tasks_seen.size());
  metrics::Confusion confusion(model.class_count,
                               std::vector<std::size_t>(model.class_count, 0));

  for (const auto& task : tasks_seen) {
    std::size_t correct = 0;
    const auto& tests = task.test_examples;
    if (tests.empty()) {
      accuracies.push_back(0.0);
      continue;
    }
    Tensor batch({tests.size(), dim});
    for (std::size_t i = 0; i < tests.size(); ++i) {
      std::copy(tests[i].features.data.begin(), tests[i].features.data.end(),
                batch.data.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
    const auto fwd = nn::forward(model, batch);
    for (std::size_t i = 0; i < tests.size(); ++i) {
      std::size_t pred = 0;
      double best = fwd.probabilities.at(i, 0);
      for (std::size_t c = 1; c < model.class_count; ++c) {
        if (fwd.probabilities.at(i, c) > best) {
          best = fwd.probabilities.at(i, c);
          pred = c;
        }
      }
      ++confusion[tests[i].label][pred];
      if (pred == tests[i].label) ++correct;
    }
    accuracies.push_back(static_cast<double>(correct) / static_cast<double>(tests.size()));
  }
  return {accuracies, confusion};
}

TrainResult train_stream(const TrainerConfig& config,
                         const std::vector<stream::TaskSpec>& tasks) {
  if (tasks.empty()) throw std::invalid_argument("train_stream: no tasks");
  config.mix.validate();
  std::set<std::size_t> seen_classes_check;
  std::size_t class_count = 0;
  for (const auto& task : tasks) {
    if (task.train_examples.empty()) {
      throw std::invalid_argument("train_stream: task without training data");
    }
    for (std::size_t c : task.class_ids) {
      if (!seen_classes_check.insert(c).second) {
        throw std::invalid_argument("train_stream: task class sets overlap");
      }
      class_count = std::max(class_count, c + 1);
    }
  }
  const std::size_t input_dim = tasks.front().train_examples.front().features.size();

  nn::Model model = nn::Model::make(input_dim, config.hidden, class_count,
                                    derive_seed(config.seed, SeedTag::init));
  memory::ReplayBuffer buffer(config.memory_capacity);

  auto rng_buffer = make_rng(config.seed, SeedTag::buffer);
  auto rng_retrieve = make_rng(config.seed, SeedTag::retrieve);
  auto rng_augment = make_rng(config.seed, SeedTag::augment);
  auto rng_mix = make_rng(config.seed, SeedTag::mix);

  RunLog log;
  std::size_t global_step = 0;
  std::vector<std::size_t> old_classes;
  const bool uses_memory = config.method != Method::finetune;

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& task = tasks[t];

    // Pre-task snapshot for the augmentation-strength indicator.
    std::optional<nn::Model> model_old;
    std::vector<stream::Example> memory_old;
    const bool want_mbar = uses_memory && !config.pipeline.empty() && t > 0 && buffer.size() > 0;
    if (want_mbar) {
      model_old = model;
      memory_old = buffer.items();
    }

    ComposeContext ctx;
    ctx.method = config.method;
    ctx.mix = &config.mix;
    ctx.pipeline = &config.pipeline;
    ctx.current_classes = task.class_ids;
    ctx.old_classes = old_classes;
    ctx.class_count = class_count;
    ctx.augment_current = config.augment_current;
    ctx.include_plain_aug = config.dualmix_include_plain_aug;
    ctx.rng_augment = &rng_augment;
    ctx.rng_mix = &rng_mix;

    stream::BatchStream batches(task, config.batch_size,
                                derive_seed(config.seed, SeedTag::stream, t));
    std::vector<stream::Example> pending;

    while (auto batch = batches.next()) {
      std::vector<stream::Example> memory_batch;
      if (uses_memory && buffer.size() > 0 && config.memory_batch_size > 0) {
        if (config.retrieval == Retrieval::mir) {
          const std::size_t cand = config.mir_candidates > 0
                                       ? config.mir_candidates
                                       : 2 * config.memory_batch_size;
          memory_batch = memory::mir_retrieve(buffer, config.memory_batch_size, cand, model,
                                              *batch, config.lr, rng_retrieve);
        } else {
          memory_batch = memory::random_retrieve(buffer, config.memory_batch_size, rng_retrieve);
        }
      }

      const auto composed = compose_training_batch(*batch, memory_batch, model, ctx);
      Tensor x({composed.size(), input_dim});
      std::vector<nn::SoftLabel> labels;
      labels.reserve(composed.size());
      for (std::size_t i = 0; i < composed.size(); ++i) {
        if (composed[i].features.size() != input_dim) {
          throw std::invalid_argument("train_stream: feature width mismatch in batch");
        }
        std::copy(composed[i].features.data.begin(), composed[i].features.data.end(),
                  x.data.begin() + static_cast<std::ptrdiff_t>(i * input_dim));
        labels.push_back(composed[i].label);
      }

      const auto fwd = nn::forward(model, x);
      const double loss = nn::cross_entropy(fwd.probabilities, labels);
      const auto grads = nn::backward(model, x, labels);
      nn::sgd_step(model, grads, config.lr);

      if (uses_memory) {
        for (const auto& e : batch->examples) {
          if (config.freeze_buffer) {
            pending.push_back(e);
          } else {
            buffer.insert(e, rng_buffer);
          }
        }
      }

      ++global_step;
      log.loss_trace.push_back({global_step, t, loss});
      const auto new_mean = mean_head_norm(model, task.class_ids);
      log.norm_trace.push_back(
          {global_step, t, new_mean.value_or(0.0), mean_head_norm(model, old_classes)});

      if (config.trace_every > 0 && global_step % config.trace_every == 0) {
        std::vector<stream::TaskSpec> seen(tasks.begin(), tasks.begin() + t + 1);
        const auto [accs, confusion] = evaluate(model, seen);
        (void)accs;
        const auto report = metrics::misclass_ratios(confusion, old_classes, task.class_ids);
        log.boundary_trace.push_back(
            {global_step, t, report.er_new_as_old, report.er_old_as_new});
      }
    }

    if (config.freeze_buffer) {
      for (const auto& e : pending) buffer.insert(e, rng_buffer);
    }

    std::vector<stream::TaskSpec> seen(tasks.begin(), tasks.begin() + t + 1);
    auto [accuracies, confusion] = evaluate(model, seen);
    log.accuracy.push_back(std::move(accuracies));
    log.confusions.push_back(std::move(confusion));

    if (want_mbar) {
      // Expansion set: the pre-task memory plus one transformed copy of each
      // item, scored under the pre-task model.
      auto rng_ind = make_rng(config.seed, SeedTag::indicator, t);
      std::vector<stream::Example> expansion = memory_old;
      expansion.reserve(2 * memory_old.size());
      for (const auto& e : memory_old) {
        expansion.push_back(augment::apply_pipeline(config.pipeline, e, rng_ind));
      }
      log.m_bar.push_back(metrics::variance_indicator(*model_old, expansion, old_classes));
    } else {
      log.m_bar.push_back(std::nullopt);
    }

    std::vector<std::pair<std::size_t, std::size_t>> hist;
    for (const auto& [label, count] : memory::label_histogram(buffer)) {
      hist.emplace_back(label, count);
    }
    log.buffer_histograms.push_back(std::move(hist));

    for (std::size_t c : task.class_ids) old_classes.push_back(c);
  }

  return {std::move(model), std::move(buffer), std::move(log)};
}

}  // namespace ocimix::trainer
