#include "toolwear/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "toolwear/csv.hpp"
#include "toolwear/error.hpp"
#include "toolwear/model_io.hpp"
#include "toolwear/parallel.hpp"

namespace toolwear::tuner {


void SearchSpace::validate() const {
  if (min_layers < 1 || max_layers > 10 || min_layers > max_layers) {
    throw ConfigError("search space layers must satisfy 1 <= min <= max <= 10");
  }
  if (min_units < 16 || max_units > 128 || min_units > max_units || units_step < 1) {
    throw ConfigError("search space units must satisfy 16 <= min <= max <= 128 with step >= 1");
  }
  if (activations.empty() || regularizers.empty() || regularization_factors.empty()) {
    throw ConfigError("search space choice lists must be non-empty");
  }
  if (!(max_dropout >= 0.0 && max_dropout <= 0.5) ||
      !(max_recurrent_dropout >= 0.0 && max_recurrent_dropout <= 0.5)) {
    throw ConfigError("search space dropout bounds must lie in [0, 0.5]");
  }
  if (!(min_learning_rate >= 1e-4 && max_learning_rate <= 1e-2 &&
        min_learning_rate <= max_learning_rate)) {
    throw ConfigError("search space learning rates must lie in [1e-4, 1e-2]");
  }
  for (double f : regularization_factors) {
    if (!(f >= 0.0)) throw ConfigError("regularization factors must be >= 0");
  }
  if (batch_size < 1 || patience < 1) throw ConfigError("batch_size and patience must be >= 1");
}

neural::Hyperparameters sample_config(const SearchSpace& space, std::uint64_t seed) {
  space.validate();
  Rng rng(seed);
  neural::Hyperparameters hp;
  const auto layers =
      space.min_layers + static_cast<int>(rng.below(static_cast<std::uint64_t>(space.max_layers - space.min_layers + 1)));
  const auto unit_choices =
      static_cast<std::uint64_t>((space.max_units - space.min_units) / space.units_step + 1);
  hp.units.clear();
  for (int k = 0; k < layers; ++k) {
    hp.units.push_back(space.min_units + space.units_step * static_cast<int>(rng.below(unit_choices)));
  }
  hp.activation = space.activations[rng.below(space.activations.size())];
  hp.dropout_rate = rng.uniform(0.0, space.max_dropout);
  hp.recurrent_dropout_rate = rng.uniform(0.0, space.max_recurrent_dropout);
  hp.regularizer = space.regularizers[rng.below(space.regularizers.size())];
  hp.regularization_factor =
      space.regularization_factors[rng.below(space.regularization_factors.size())];
  hp.learning_rate = std::exp(
      rng.uniform(std::log(space.min_learning_rate), std::log(space.max_learning_rate)));
  hp.learning_rate = std::clamp(hp.learning_rate, space.min_learning_rate, space.max_learning_rate);
  hp.batch_size = space.batch_size;
  hp.patience = space.patience;
  hp.min_delta = space.min_delta;
  hp.seed = seed;
  return hp;
}

void SearchOptions::validate() const {
  if (n_trials < 1) throw ConfigError("n_trials must be >= 1");
  if (rungs.empty()) throw ConfigError("at least one rung budget is required");
  for (std::size_t i = 0; i < rungs.size(); ++i) {
    if (rungs[i] < 1 || (i > 0 && rungs[i] <= rungs[i - 1])) {
      throw ConfigError("rung budgets must be positive and strictly increasing");
    }
  }
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) {
    throw ConfigError("keep_fraction must lie in (0, 1]");
  }
}

std::vector<std::size_t> rung_sizes(std::size_t n_trials, std::size_t n_rungs, double keep_fraction) {
  std::vector<std::size_t> sizes;
  std::size_t n = n_trials;
  for (std::size_t r = 0; r < n_rungs; ++r) {
    sizes.push_back(n);
    // Guard against 8 × 0.5 landing a hair above 4 in floating point.
    n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * keep_fraction - 1e-9)));
  }
  return sizes;
}

SearchResult run_search(const SearchSpace& space, const dataset::WindowedDataset& train,
                        const dataset::WindowedDataset& val, const SearchOptions& options) {
  space.validate();
  options.validate();
  const std::size_t n = options.n_trials;
  const int final_budget = options.rungs.back();

  SearchResult result;
  result.trials.resize(n);
  std::vector<std::unique_ptr<neural::Trainer>> trainers(n);
  for (std::size_t t = 0; t < n; ++t) {
    neural::Hyperparameters hp = sample_config(space, derive_seed(options.seed, t));
    hp.max_epochs = final_budget;
    result.trials[t].trial = t;
    result.trials[t].config = hp;
    trainers[t] = std::make_unique<neural::Trainer>(neural::init_model(hp, train.n_features()),
                                                    train, val);
  }

  const auto sizes = rung_sizes(n, options.rungs.size(), options.keep_fraction);
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  for (std::size_t r = 0; r < options.rungs.size(); ++r) {
    const bool last = r + 1 == options.rungs.size();
    RungSummary rung;
    rung.budget = options.rungs[r];
    rung.increment = options.rungs[r] - (r > 0 ? options.rungs[r - 1] : 0);
    rung.trials = alive.size();
    rung.epochs_budgeted = static_cast<long>(rung.trials) * rung.increment;

    std::vector<int> ran(alive.size(), 0);
    parallel_for(alive.size(), options.threads, [&](std::size_t k) {
      ran[k] = trainers[alive[k]]->run(rung.increment, last);
    });
    for (std::size_t k = 0; k < alive.size(); ++k) {
      rung.epochs_consumed += ran[k];
      TrialResult& tr = result.trials[alive[k]];
      const neural::Trainer& trainer = *trainers[alive[k]];
      tr.best_val_loss = trainer.best_val_loss();
      tr.epochs_run = trainer.epochs_run();
      tr.rung_reached = r;
      tr.early_stopped = trainer.report().early_stopped;
      tr.wall_time_s = trainer.report().wall_time_s;
    }
    result.rungs.push_back(rung);
    result.epochs_budgeted += rung.epochs_budgeted;
    result.epochs_consumed += rung.epochs_consumed;
    if (last) break;

    std::vector<std::size_t> ranked = alive;
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      return result.trials[a].best_val_loss < result.trials[b].best_val_loss;
    });
    ranked.resize(std::min(ranked.size(), sizes[r + 1]));
    std::sort(ranked.begin(), ranked.end());
    // Losers free their weights; survivors keep training from where they stopped.
    for (std::size_t idx : alive) {
      if (!std::binary_search(ranked.begin(), ranked.end(), idx)) trainers[idx].reset();
    }
    alive = std::move(ranked);
  }

  std::size_t best = alive.front();
  for (std::size_t idx : alive) {
    if (result.trials[idx].best_val_loss < result.trials[best].best_val_loss) best = idx;
  }
  result.best = result.trials[best];
  result.best_model = trainers[best]->best_model();
  return result;
}

nlohmann::json to_json(const SearchResult& result, bool include_timing) {
  using nlohmann::json;
  auto trial_json = [&](const TrialResult& t) {
    json j = {{"trial", t.trial},
              {"config", io::to_json(t.config)},
              {"best_val_loss", t.best_val_loss},
              {"epochs_run", t.epochs_run},
              {"rung_reached", t.rung_reached},
              {"early_stopped", t.early_stopped}};
    if (include_timing) j["wall_time_s"] = t.wall_time_s;
    return j;
  };
  json trials = json::array();
  for (const auto& t : result.trials) trials.push_back(trial_json(t));
  json rungs = json::array();
  for (const auto& r : result.rungs) {
    rungs.push_back({{"budget", r.budget},
                     {"increment", r.increment},
                     {"trials", r.trials},
                     {"epochs_budgeted", r.epochs_budgeted},
                     {"epochs_consumed", r.epochs_consumed}});
  }
  return {{"best", trial_json(result.best)},
          {"trials", std::move(trials)},
          {"rungs", std::move(rungs)},
          {"epochs_budgeted", result.epochs_budgeted},
          {"epochs_consumed", result.epochs_consumed}};
}

void write_leaderboard(const SearchResult& result, const std::filesystem::path& path) {
  std::vector<const TrialResult*> order;
  for (const auto& t : result.trials) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const TrialResult* a, const TrialResult* b) {
    if (a->rung_reached != b->rung_reached) return a->rung_reached > b->rung_reached;
    return a->best_val_loss < b->best_val_loss;
  });
  csv::Writer out(path, {"trial", "val_loss", "epochs", "seconds"});
  for (const auto* t : order) {
    out.row({std::to_string(t->trial), csv::format(t->best_val_loss), std::to_string(t->epochs_run),
             csv::format(t->wall_time_s)});
  }
  out.close();
}

}  // namespace toolwear::tuner
