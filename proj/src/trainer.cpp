#include "toolwear/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "toolwear/error.hpp"

namespace toolwear::neural {

namespace {
constexpr std::uint64_t kTrainStream = 0x7a1;
}

bool EarlyStopping::update(double val_loss) {
  ++epochs_;
  last_was_best_ = val_loss < best_;
  if (last_was_best_) {
    best_ = val_loss;
    best_epoch_ = epochs_;
  }
  if (val_loss < reference_ - min_delta_) {
    reference_ = val_loss;
    wait_ = 0;
  } else {
    ++wait_;
  }
  return exhausted();
}

double validation_mae(const LstmModel& model, const dataset::WindowedDataset& val) {
  const auto pred = predict_scaled(model, val);
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) total += std::abs(pred[i] - val.targets[i]);
  return total / static_cast<double>(pred.size());
}

Trainer::Trainer(LstmModel model, const dataset::WindowedDataset& train,
                 const dataset::WindowedDataset& val)
    : model_(std::move(model)),
      best_(model_),
      train_(train),
      val_(val),
      adam_(make_adam_state(model_.params)),
      rng_(derive_seed(model_.hp.seed, kTrainStream)),
      stopper_(model_.hp.patience, model_.hp.min_delta) {
  model_.hp.validate();
  if (train.size() == 0 || val.size() == 0) {
    throw DatasetError("training and validation sets must be non-empty");
  }
  if (train.n_features() != model_.input_dim || val.n_features() != model_.input_dim) {
    throw DimensionError("dataset feature count does not match the model input");
  }
  val_batch_ = make_batch(val);
}

int Trainer::run(int epochs, bool early_stopping) {
  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = train_.size();
  const auto batch_size = static_cast<std::size_t>(model_.hp.batch_size);
  std::vector<std::size_t> order(n);
  int ran = 0;
  for (; ran < epochs; ++ran) {
    if (early_stopping && stopper_.exhausted()) break;
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng_.shuffle(std::span<std::size_t>(order));

    double weighted = 0.0;
    for (std::size_t first = 0; first < n; first += batch_size) {
      const std::size_t count = std::min(batch_size, n - first);
      const Batch batch = make_batch(train_, std::span<const std::size_t>(order).subspan(first, count));
      const ForwardCache cache = forward_batch(model_, batch, true, &rng_);
      const std::vector<double> pred(cache.predictions.data(),
                                     cache.predictions.data() + cache.predictions.size());
      const std::vector<double> tgt(batch.targets.data(), batch.targets.data() + batch.targets.size());
      const double batch_loss = loss(pred, tgt, model_);
      if (!std::isfinite(batch_loss)) {
        throw NumericError("training loss became non-finite at epoch " +
                           std::to_string(report_.stopped_epoch + 1));
      }
      weighted += batch_loss * static_cast<double>(count);
      const ParameterSet grads = backward(model_, cache, batch.targets);
      adam_step(model_.params, grads, adam_, model_.hp.learning_rate);
    }
    const ForwardCache val_cache = forward_batch(model_, val_batch_, false, nullptr);
    double val_loss = (val_cache.predictions - val_batch_.targets).cwiseAbs().mean();
    if (!std::isfinite(val_loss)) throw NumericError("validation loss became non-finite");

    report_.train_loss.push_back(weighted / static_cast<double>(n));
    report_.val_loss.push_back(val_loss);
    ++report_.stopped_epoch;
    const bool exhausted = stopper_.update(val_loss);
    if (stopper_.last_was_best()) {
      best_.params = model_.params;
      report_.best_epoch = stopper_.best_epoch();
      report_.best_val_loss = stopper_.best();
    }
    if (early_stopping && exhausted) {
      report_.early_stopped = true;
      ++ran;
      break;
    }
  }
  report_.wall_time_s +=
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return ran;
}

LstmModel Trainer::best_model() const {
  LstmModel out = best_;
  out.hp = model_.hp;
  out.scaler = model_.scaler;
  out.training.seed = model_.hp.seed;
  out.training.stopped_epoch = report_.stopped_epoch;
  out.training.best_epoch = report_.best_epoch;
  return out;
}

TrainReport train(LstmModel& model, const dataset::WindowedDataset& train,
                  const dataset::WindowedDataset& val, const Hyperparameters& hp) {
  hp.validate();
  if (hp.units != model.hp.units) {
    throw ConfigError("hyperparameter layer layout does not match the model");
  }
  LstmModel working = model;
  working.hp = hp;
  Trainer trainer(std::move(working), train, val);
  trainer.run(hp.max_epochs, true);
  model = trainer.best_model();
  return trainer.report();
}

}  // namespace toolwear::neural
