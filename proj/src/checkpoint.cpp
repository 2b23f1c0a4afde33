#include "drr/container.hpp"
#include "drr/drrnn.hpp"
#include "drr/error.hpp"

namespace drr::drrnn {

namespace {

constexpr const char* kKind = "drrnn-checkpoint";

std::vector<std::uint64_t> shape_of(const nn::ParamArray& p) {
  if (p.is_vector()) return {static_cast<std::uint64_t>(p.value.cols())};
  return {static_cast<std::uint64_t>(p.value.rows()), static_cast<std::uint64_t>(p.value.cols())};
}

int as_int(const Container& c, const char* key) { return static_cast<int>(c.scalar(key)); }

}  // namespace

void save_checkpoint(const ModelCheckpoint& m, const std::filesystem::path& path) {
  Container c;
  c.kind = kKind;
  const auto& hp = m.hp;
  c.set_scalar("hp.input_dim", hp.input_dim);
  c.set_scalar("hp.block_dim", hp.block_dim);
  c.set_scalar("hp.n_blocks", hp.n_blocks);
  c.set_scalar("hp.input_dropout", hp.input_dropout);
  c.set_scalar("hp.block_dropout", hp.block_dropout);
  c.set_scalar("hp.base_lr", hp.base_lr);
  c.set_scalar("hp.warmup_epochs", hp.warmup_epochs);
  c.set_scalar("hp.l2_lambda", hp.l2_lambda);
  c.set_scalar("hp.max_epochs", hp.max_epochs);
  c.set_scalar("hp.n_classes", hp.n_classes);
  c.set_scalar("best_val_acc", m.best_val_acc);
  c.set_scalar("best_epoch", m.best_epoch);
  c.set_scalar("split.seed_index", m.split.seed_index);
  c.set_scalar("split.fold_index", m.split.fold_index);
  for (const auto& p : m.params) {
    c.add_array(p.name, shape_of(p), std::vector<double>(p.value.data(), p.value.data() + p.value.size()));
  }
  save_container(c, path);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const Container c = load_container(path);
  if (c.kind != kKind) throw DataError("'" + path.string() + "' holds a '" + c.kind + "', not a checkpoint");

  HyperParams hp;
  hp.input_dim = as_int(c, "hp.input_dim");
  hp.block_dim = as_int(c, "hp.block_dim");
  hp.n_blocks = as_int(c, "hp.n_blocks");
  hp.input_dropout = c.scalar("hp.input_dropout");
  hp.block_dropout = c.scalar("hp.block_dropout");
  hp.base_lr = c.scalar("hp.base_lr");
  hp.warmup_epochs = as_int(c, "hp.warmup_epochs");
  hp.l2_lambda = c.scalar("hp.l2_lambda");
  hp.max_epochs = as_int(c, "hp.max_epochs");
  hp.n_classes = as_int(c, "hp.n_classes");

  // Allocate the expected layout, then fill it; any disagreement is a shape error.
  RngStream rng(0);
  ModelCheckpoint m;
  try {
    m = build_model(hp, rng);
  } catch (const ConfigError& e) {
    throw ShapeError("checkpoint '" + path.string() + "' records an invalid architecture: " + e.what());
  }
  if (c.arrays.size() != m.params.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(c.arrays.size()) + " arrays, expected " +
                     std::to_string(m.params.size()));
  }
  for (auto& p : m.params) {
    const auto* a = c.find_array(p.name);
    if (!a) throw ShapeError("checkpoint is missing array '" + p.name + "'");
    if (a->shape != shape_of(p)) throw ShapeError("array '" + p.name + "' has an unexpected shape");
    std::copy(a->data.begin(), a->data.end(), p.value.data());
  }
  m.best_val_acc = c.scalar("best_val_acc");
  m.best_epoch = as_int(c, "best_epoch");
  m.split = {as_int(c, "split.seed_index"), as_int(c, "split.fold_index")};
  return m;
}

}  // namespace drr::drrnn
