#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "skysweep/common/errors.hpp"
#include "skysweep/common/rng.hpp"
#include "skysweep/core/checkpoint.hpp"
#include "skysweep/core/optimizer.hpp"
#include "skysweep/core/tape.hpp"
#include "skysweep/net/rednet.hpp"
#include "skysweep/synth/dataset.hpp"

namespace skysweep {

struct TrainConfig {
  std::string dataset_root;
  std::string checkpoint_path;
  double lr = 1e-3;
  double decay = 0.9;
  std::int64_t decay_period = 500;  // iterations per staircase decay step
  std::int64_t epochs = 3;
  std::int64_t max_iterations = 0;  // 0 means run all epochs
  int n_views = 0;                  // 0 means use the dataset's n
  std::uint64_t seed = 7;
};

struct TrainStatus {
  std::int64_t iteration = 0;  // 1-based, after the step
  std::int64_t epoch = 0;
  double lr = 0;
  double loss = 0;
};

// Called after every optimizer step; return true to stop training early.
using TrainHook = std::function<bool(const TrainStatus&)>;

struct TrainResult {
  std::int64_t iterations = 0;
  double final_loss = 0;
  bool stopped_early = false;
};

// The dataset stores views in file-ID order with the reference at ID 1;
// the network wants the reference first.
template <typename T>
UnitInputs<T> unit_inputs(const LoadedTile& tile) {
  UnitInputs<T> in;
  const std::size_t n = tile.images.size();
  if (n < 2) throw contract_error("unit_inputs: tile has fewer than two views");
  in.images.push_back(tile.images[1]);
  in.cams.push_back(tile.cams[1]);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == 1) continue;
    in.images.push_back(tile.images[v]);
    in.cams.push_back(tile.cams[v]);
  }
  return in;
}

// SGD over the training split: one tile per step, staircase lr decay,
// RMSProp updates, a checkpoint after every epoch and at the end. Tiles
// are cached in memory after first load (desk-scale sets fit easily).
inline TrainResult train_rednet(RedNetParams<float>& net, const TrainConfig& cfg,
                                std::FILE* log = nullptr, const TrainHook& hook = nullptr) {
  if (!(cfg.lr > 0)) throw contract_error("train: lr must be positive");
  if (!(cfg.decay > 0 && cfg.decay <= 1)) throw contract_error("train: decay must be in (0,1]");
  if (cfg.decay_period < 1) throw contract_error("train: decay_period must be >= 1");
  if (cfg.epochs < 1 && cfg.max_iterations < 1)
    throw contract_error("train: need epochs or max_iterations");

  const DatasetIndex index = read_dataset_index(cfg.dataset_root);
  const int n = cfg.n_views > 0 ? cfg.n_views : index.n;
  if (n > index.n)
    throw contract_error("train: requested " + std::to_string(n) + " views but dataset has " +
                         std::to_string(index.n));
  std::vector<std::size_t> train_ids;
  for (std::size_t i = 0; i < index.tiles.size(); ++i)
    if (!index.tiles[i].test) train_ids.push_back(i);
  if (train_ids.empty()) throw degenerate_error("train: dataset has no training tiles");

  std::map<std::size_t, LoadedTile> cache;
  auto tile = [&](std::size_t id) -> const LoadedTile& {
    auto it = cache.find(id);
    if (it == cache.end()) it = cache.emplace(id, load_tile(index, index.tiles[id], n)).first;
    return it->second;
  };

  auto params = net.parameters();
  auto save = [&] {
    if (cfg.checkpoint_path.empty()) return;
    std::vector<const Parameter<float>*> view(params.begin(), params.end());
    save_checkpoint(cfg.checkpoint_path, view);
  };

  Rng shuffle_rng(hash_u64(cfg.seed ^ 0x7261696e6e657278ull));
  TrainResult result;
  std::int64_t iter = 0;
  const auto per_epoch = static_cast<std::int64_t>(train_ids.size());
  const std::int64_t epochs =
      cfg.epochs >= 1 ? cfg.epochs : (cfg.max_iterations + per_epoch - 1) / per_epoch;

  if (log) std::fprintf(log, "iter,lr,loss\n");
  for (std::int64_t epoch = 0; epoch < epochs && !result.stopped_early; ++epoch) {
    std::vector<std::size_t> order = train_ids;
    for (std::int64_t i = per_epoch - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.uniform_int(0, i)]);

    for (std::size_t id : order) {
      const LoadedTile& t = tile(id);
      const double lr = cfg.lr * std::pow(cfg.decay, static_cast<double>(iter / cfg.decay_period));

      Tape<float> tape;
      auto volume = forward_volume(tape, unit_inputs<float>(t), t.ref_plan, net);
      auto loss = rednet_loss(tape, volume, t.ref_depth, t.ref_plan);
      const double loss_value = loss.value.data()[0];
      tape.backward(loss);
      rmsprop_step<float>(params, lr);

      ++iter;
      result.final_loss = loss_value;
      if (log) {
        std::fprintf(log, "%lld,%.8g,%.8g\n", static_cast<long long>(iter), lr, loss_value);
        std::fflush(log);
      }
      if (hook && hook({iter, epoch, lr, loss_value})) {
        result.stopped_early = true;
        break;
      }
      if (cfg.max_iterations > 0 && iter >= cfg.max_iterations) {
        result.stopped_early = true;
        break;
      }
    }
    save();
  }
  save();
  result.iterations = iter;
  return result;
}

}  // namespace skysweep
