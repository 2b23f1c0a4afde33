#include <cmath>
#include <numeric>

#include "drr/drrnn.hpp"
#include "drr/error.hpp"
#include "drr/parallel.hpp"

namespace drr::drrnn {

std::vector<int> stratified_folds(std::span<const Label> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k must be at least 2");
  if (labels.size() < static_cast<std::size_t>(k))
    throw DataError("dataset of " + std::to_string(labels.size()) + " rows is smaller than k=" + std::to_string(k));
  RngStream rng(seed);
  std::vector<int> folds(labels.size(), -1);
  std::size_t offset = 0;
  for (Label c : kAllLabels) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) rows.push_back(i);
    if (rows.empty()) continue;
    if (rows.size() < static_cast<std::size_t>(k)) {
      throw DataError("class " + std::string(label_name(c)) + " has " + std::to_string(rows.size()) +
                      " members, fewer than k=" + std::to_string(k));
    }
    rng.shuffle(rows);
    for (std::size_t j = 0; j < rows.size(); ++j) folds[rows[j]] = static_cast<int>((offset + j) % static_cast<std::size_t>(k));
    offset = (offset + rows.size()) % static_cast<std::size_t>(k);
  }
  return folds;
}

SplitPlan make_splits(std::span<const Label> labels, std::span<const std::uint64_t> seeds, int k) {
  SplitPlan plan;
  plan.seeds.assign(seeds.begin(), seeds.end());
  plan.k = k;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const auto folds = stratified_folds(labels, k, seeds[s]);
    for (int f = 0; f < k; ++f) {
      SplitPair pair;
      pair.id = {static_cast<int>(s), f};
      for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? pair.val : pair.learn).push_back(i);
      plan.pairs.push_back(std::move(pair));
    }
  }
  return plan;
}

ModelCheckpoint train_single(const Matrix& learn_x, std::span<const Label> learn_y, const Matrix& val_x,
                             std::span<const Label> val_y, const HyperParams& hp, std::uint64_t seed,
                             TrainLog* log) {
  hp.validate();
  if (learn_y.empty() || val_y.empty()) throw DataError("learning and validation sets must be non-empty");
  if (static_cast<std::size_t>(learn_x.rows()) != learn_y.size() ||
      static_cast<std::size_t>(val_x.rows()) != val_y.size())
    throw ShapeError("feature rows and labels disagree in count");

  const RngStream root(seed);
  RngStream init_rng = root.derive({0});
  RngStream dropout_rng = root.derive({1});

  ModelCheckpoint m = build_model(hp, init_rng);
  nn::AdamState adam(m.params);
  const nn::LRSchedule schedule{hp.base_lr, hp.warmup_epochs};

  nn::ParamSet best = m.params;
  double best_acc = accuracy(m, val_x, val_y);
  int best_epoch = 0;
  if (log) {
    log->val_accuracy.assign(1, best_acc);
    log->train_loss.clear();
    log->train_accuracy.clear();
  }

  ForwardCache cache;
  for (int epoch = 0; epoch < hp.max_epochs; ++epoch) {
    const Matrix logits = forward(m, learn_x, true, &dropout_rng, &cache);
    const auto xent = nn::softmax_xent(logits, learn_y);
    backward(m, cache, nn::softmax_xent_backward(xent.probs, learn_y));
    const double loss = xent.loss + nn::l2_penalty(m.params, hp.l2_lambda);
    if (!std::isfinite(loss)) throw NumericError("non-finite loss at epoch " + std::to_string(epoch));
    nn::adam_step(adam, m.params, nn::lr_at(schedule, epoch));

    const double acc = accuracy(m, val_x, val_y);
    if (log) {
      log->train_loss.push_back(loss);
      std::size_t hit = 0;
      for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index arg;
        logits.row(r).maxCoeff(&arg);
        hit += static_cast<int>(arg) == index_of(learn_y[static_cast<std::size_t>(r)]);
      }
      log->train_accuracy.push_back(static_cast<double>(hit) / static_cast<double>(logits.rows()));
      log->val_accuracy.push_back(acc);
    }
    if (acc > best_acc) {
      best_acc = acc;
      best_epoch = epoch + 1;
      best.copy_values_from(m.params);
    }
  }

  m.params.copy_values_from(best);
  m.params.zero_grad();
  m.best_val_acc = best_acc;
  m.best_epoch = best_epoch;
  return m;
}

std::uint64_t run_seed(std::uint64_t global_seed, int seed_index, int fold_index) {
  return RngStream(global_seed)
      .derive({static_cast<std::uint64_t>(seed_index), static_cast<std::uint64_t>(fold_index)})
      .seed();
}

std::vector<ModelCheckpoint> train_ensemble(const Matrix& x, std::span<const Label> y, const HyperParams& hp,
                                            const EnsembleConfig& cfg, const SplitPlan* plan) {
  hp.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("feature rows and labels disagree in count");
  SplitPlan own;
  if (!plan) {
    own = make_splits(y, cfg.seeds, cfg.k);
    plan = &own;
  }
  std::vector<ModelCheckpoint> out(plan->pairs.size());
  parallel_for(plan->pairs.size(), cfg.jobs, [&](std::size_t i) {
    const auto& pair = plan->pairs[i];
    const std::string where = " (split seed " + std::to_string(pair.id.seed_index) + ", fold " +
                              std::to_string(pair.id.fold_index) + ")";
    try {
      out[i] = train_single(gather_rows(x, pair.learn), gather(y, std::span<const std::size_t>(pair.learn)),
                            gather_rows(x, pair.val), gather(y, std::span<const std::size_t>(pair.val)), hp,
                            run_seed(cfg.global_seed, pair.id.seed_index, pair.id.fold_index));
      out[i].split = pair.id;
    } catch (const NumericError& e) {
      throw NumericError(e.what() + where);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what() + where);
    } catch (const Error& e) {
      throw DataError(e.what() + where);
    }
  });
  return out;
}

void SearchSpace::validate() const {
  auto check = [](const char* name, double lo, double hi, bool log) {
    if (!(lo <= hi)) throw ConfigError(std::string("search space: empty range for ") + name);
    if (log && !(lo > 0.0)) throw ConfigError(std::string("search space: ") + name + " needs a positive lower bound");
  };
  check("base_lr", base_lr.lo, base_lr.hi, true);
  check("l2_lambda", l2_lambda.lo, l2_lambda.hi, true);
  check("input_dropout", input_dropout.lo, input_dropout.hi, false);
  check("block_dropout", block_dropout.lo, block_dropout.hi, false);
  check("n_blocks", n_blocks.lo, n_blocks.hi, false);
  check("block_dim", block_dim.lo, block_dim.hi, false);
}

namespace {

double sample_uniform(RngStream& rng, Range r) { return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi); }
double sample_log(RngStream& rng, Range r) {
  return r.lo == r.hi ? r.lo : std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
}

}  // namespace

SearchResult random_search(const SearchSpace& space, int budget, const Matrix& x, std::span<const Label> y,
                           const HyperParams& base, int k, std::uint64_t seed, int jobs) {
  space.validate();
  if (budget < 1) throw ConfigError("search budget must be at least 1");

  RngStream rng(seed);
  SearchResult result;
  for (int t = 0; t < budget; ++t) {
    HyperParams hp = base;
    hp.base_lr = sample_log(rng, space.base_lr);
    hp.l2_lambda = sample_log(rng, space.l2_lambda);
    hp.input_dropout = sample_uniform(rng, space.input_dropout);
    hp.block_dropout = sample_uniform(rng, space.block_dropout);
    hp.n_blocks = static_cast<int>(rng.range(space.n_blocks.lo, space.n_blocks.hi));
    hp.block_dim = static_cast<int>(rng.range(space.block_dim.lo, space.block_dim.hi));
    hp.validate();
    result.trials.push_back({hp, 0.0});
  }

  const std::uint64_t split_seed = RngStream(seed).derive({0x5EA7C4}).seed();
  const auto plan = make_splits(y, std::span<const std::uint64_t>(&split_seed, 1), k);
  const auto n_folds = plan.pairs.size();
  std::vector<double> fold_acc(result.trials.size() * n_folds);
  parallel_for(fold_acc.size(), jobs, [&](std::size_t job) {
    const auto t = job / n_folds, f = job % n_folds;
    const auto& pair = plan.pairs[f];
    const auto m = train_single(gather_rows(x, pair.learn), gather(y, std::span<const std::size_t>(pair.learn)),
                                gather_rows(x, pair.val), gather(y, std::span<const std::size_t>(pair.val)),
                                result.trials[t].hp, run_seed(seed, 0, static_cast<int>(f)));
    fold_acc[job] = m.best_val_acc;
  });

  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    double s = 0.0;
    for (std::size_t f = 0; f < n_folds; ++f) s += fold_acc[t * n_folds + f];
    result.trials[t].cv_accuracy = s / static_cast<double>(n_folds);
    if (t == 0 || result.trials[t].cv_accuracy > result.cv_accuracy) {
      result.cv_accuracy = result.trials[t].cv_accuracy;
      result.best_hp = result.trials[t].hp;
    }
  }
  return result;
}

}  // namespace drr::drrnn
