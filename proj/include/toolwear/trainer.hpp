#pragma once

#include <limits>
#include <vector>

#include "toolwear/lstm.hpp"

namespace toolwear::neural {

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  /// Number of epochs run (1-based index of the last epoch).
  int stopped_epoch = 0;
  /// 1-based epoch with the lowest validation loss; its weights are the ones kept.
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool early_stopped = false;
  double wall_time_s = 0.0;
};

/// Patience counter. A validation loss counts as an improvement when it beats the last
/// improving value by more than min_delta; the best epoch is tracked separately as the
/// plain minimum so restored weights always match the lowest recorded loss.
class EarlyStopping {
 public:
  EarlyStopping(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}

  /// Records one epoch's validation loss. Returns true when patience is exhausted.
  bool update(double val_loss);
  /// True when the epoch just recorded is the new minimum.
  bool last_was_best() const { return last_was_best_; }
  int epochs() const { return epochs_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  bool exhausted() const { return wait_ >= patience_; }

 private:
  int patience_;
  double min_delta_;
  double reference_ = std::numeric_limits<double>::infinity();
  double best_ = std::numeric_limits<double>::infinity();
  int wait_ = 0;
  int epochs_ = 0;
  int best_epoch_ = 0;
  bool last_was_best_ = false;
};

/// Resumable mini-batch training of one model on scaled datasets. Each epoch shuffles the
/// training windows with a seeded generator, keeps the final partial batch, applies one Adam
/// step per batch, then scores validation MAE without dropout or regularizer.
class Trainer {
 public:
  Trainer(LstmModel model, const dataset::WindowedDataset& train,
          const dataset::WindowedDataset& val);

  /// Runs up to `epochs` more epochs. With `early_stopping`, stops as soon as patience
  /// is exhausted (including immediately if it already is). Returns epochs actually run.
  int run(int epochs, bool early_stopping);

  int epochs_run() const { return report_.stopped_epoch; }
  double best_val_loss() const { return report_.best_val_loss; }
  bool patience_exhausted() const { return stopper_.exhausted(); }
  const TrainReport& report() const { return report_; }
  /// The model with the best-epoch weights restored and training metadata filled in.
  LstmModel best_model() const;

 private:
  LstmModel model_;
  LstmModel best_;
  const dataset::WindowedDataset& train_;
  const dataset::WindowedDataset& val_;
  Batch val_batch_;
  AdamState adam_;
  Rng rng_;
  EarlyStopping stopper_;
  TrainReport report_;
};

/// Validation MAE of `model` on a scaled dataset (no dropout, no regularizer).
double validation_mae(const LstmModel& model, const dataset::WindowedDataset& val);

/// Trains with `hp` (architecture must match the model) until max_epochs or early stop,
/// then restores the best-epoch weights into `model`. Throws DatasetError on empty sets.
TrainReport train(LstmModel& model, const dataset::WindowedDataset& train,
                  const dataset::WindowedDataset& val, const Hyperparameters& hp);

}  // namespace toolwear::neural
