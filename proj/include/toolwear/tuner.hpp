#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "toolwear/trainer.hpp"

namespace toolwear::tuner {

struct SearchSpace {
  int min_layers = 1;
  int max_layers = 10;
  int min_units = 16;
  int max_units = 128;
  int units_step = 16;
  std::vector<neural::Activation> activations{neural::Activation::Relu, neural::Activation::Tanh};
  double max_dropout = 0.5;
  double max_recurrent_dropout = 0.5;
  std::vector<neural::Regularizer> regularizers{neural::Regularizer::L1, neural::Regularizer::L2};
  std::vector<double> regularization_factors{1e-5, 1e-4, 1e-3, 1e-2};
  double min_learning_rate = 1e-4;
  double max_learning_rate = 1e-2;
  int batch_size = 32;
  int patience = 10;
  double min_delta = 1e-4;

  /// Every sampled configuration must satisfy Hyperparameters::validate. Throws ConfigError.
  void validate() const;
};

/// Uniform over discrete choices, uniform dropout rates, log-uniform learning rate.
/// The returned config carries `seed` as its training seed.
neural::Hyperparameters sample_config(const SearchSpace& space, std::uint64_t seed);

struct TrialResult {
  std::size_t trial = 0;
  neural::Hyperparameters config;
  double best_val_loss = 0.0;
  int epochs_run = 0;
  /// Index of the last rung this trial trained in.
  std::size_t rung_reached = 0;
  bool early_stopped = false;
  double wall_time_s = 0.0;
};

struct RungSummary {
  int budget = 0;     // cumulative epochs a trial has seen after this rung
  int increment = 0;  // epochs added per trial in this rung
  std::size_t trials = 0;
  long epochs_budgeted = 0;  // trials × increment
  long epochs_consumed = 0;  // epochs actually run; less than budgeted only via early stopping
};

struct SearchOptions {
  std::size_t n_trials = 16;
  /// Cumulative epoch budgets, strictly increasing.
  std::vector<int> rungs{5, 20, 100};
  double keep_fraction = 0.5;
  std::uint64_t seed = 7;
  /// Trials within a rung may train concurrently; results do not depend on this.
  std::size_t threads = 1;

  void validate() const;
};

struct SearchResult {
  TrialResult best;
  std::vector<TrialResult> trials;  // indexed by trial
  std::vector<RungSummary> rungs;
  long epochs_budgeted = 0;
  long epochs_consumed = 0;
  neural::LstmModel best_model;
};

/// Trial counts per rung: n, ceil(n·keep), ceil(ceil(n·keep)·keep), … (never below 1).
std::vector<std::size_t> rung_sizes(std::size_t n_trials, std::size_t n_rungs, double keep_fraction);

/// Single-bracket successive halving. All trials train to the first budget; after each rung the
/// best keep_fraction (by best validation loss, ties to the lower trial index) resume from their
/// current weights. The final rung runs with early stopping enabled. Trial seeds are
/// derive_seed(options.seed, trial).
SearchResult run_search(const SearchSpace& space, const dataset::WindowedDataset& train,
                        const dataset::WindowedDataset& val, const SearchOptions& options);

nlohmann::json to_json(const SearchResult& result, bool include_timing);
/// CSV `trial,val_loss,epochs,seconds`.
void write_leaderboard(const SearchResult& result, const std::filesystem::path& path);

}  // namespace toolwear::tuner
