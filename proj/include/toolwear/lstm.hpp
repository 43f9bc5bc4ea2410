#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "toolwear/dataset.hpp"
#include "toolwear/rng.hpp"

namespace toolwear::neural {

enum class Activation { Relu, Tanh };
enum class Regularizer { L1, L2 };

const char* to_string(Activation a);
const char* to_string(Regularizer r);
/// Throws ConfigError for unknown names.
Activation parse_activation(const std::string& s);
Regularizer parse_regularizer(const std::string& s);

struct Hyperparameters {
  /// One entry per stacked LSTM layer.
  std::vector<int> units{64, 64};
  Activation activation = Activation::Tanh;
  double dropout_rate = 0.0;
  double recurrent_dropout_rate = 0.0;
  Regularizer regularizer = Regularizer::L2;
  double regularization_factor = 0.0;
  double learning_rate = 1e-3;
  int max_epochs = 100;
  int patience = 10;
  int batch_size = 32;
  /// Validation improvement (scaled MAE) needed to reset the patience counter.
  double min_delta = 1e-4;
  std::uint64_t seed = 7;

  std::size_t n_layers() const { return units.size(); }
  /// 1–10 layers, 16–128 units, dropout in [0, 0.5], learning rate in [1e-4, 1e-2].
  /// Throws ConfigError.
  void validate() const;
};

/// Gate blocks are stacked in the order input, forget, cell candidate, output.
enum Gate : int { kInput = 0, kForget = 1, kCandidate = 2, kOutput = 3 };

struct LayerParams {
  Eigen::MatrixXd W;  // 4u × input_dim
  Eigen::MatrixXd U;  // 4u × u
  Eigen::VectorXd b;  // 4u
};

/// Every trainable tensor of the network. Gradients and Adam moments share this layout.
struct ParameterSet {
  std::vector<LayerParams> layers;
  Eigen::VectorXd w_out;
  double b_out = 0.0;

  ParameterSet zeros_like() const;
  std::size_t count() const;
  /// Visits (name, pointer, size) for each tensor in a fixed order.
  void for_each(const std::function<void(const std::string&, double*, std::size_t)>& fn);
  void for_each(const std::function<void(const std::string&, const double*, std::size_t)>& fn) const;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  int stopped_epoch = 0;
  int best_epoch = 0;
};

struct LstmModel {
  Hyperparameters hp;
  std::size_t input_dim = 0;
  ParameterSet params;
  std::optional<dataset::ScalerParams> scaler;
  TrainingMeta training;

  std::size_t units(std::size_t layer) const { return static_cast<std::size_t>(hp.units[layer]); }
};

/// Glorot-uniform kernels, orthogonal recurrent matrices (QR of a seeded Gaussian),
/// zero biases except the forget slice, which starts at 1.0.
LstmModel init_model(const Hyperparameters& hp, std::size_t input_dim);

/// A mini-batch laid out per time step: steps[t] is input_dim × batch.
struct Batch {
  std::vector<Eigen::MatrixXd> steps;
  Eigen::RowVectorXd targets;

  std::size_t size() const { return static_cast<std::size_t>(targets.size()); }
};

Batch make_batch(const dataset::WindowedDataset& ds, std::span<const std::size_t> indices);
Batch make_batch(const dataset::WindowedDataset& ds);

/// Intermediate values of a forward pass, consumed by `backward`.
struct ForwardCache {
  struct Layer {
    Eigen::MatrixXd input_mask;      // input_dim × B, entries 0 or 1/(1-p); empty when unused
    Eigen::MatrixXd recurrent_mask;  // u × B; empty when unused
    std::vector<Eigen::MatrixXd> x;       // masked inputs per step
    std::vector<Eigen::MatrixXd> h_prev;  // masked previous hidden state per step
    std::vector<Eigen::MatrixXd> i, f, g, o, c, c_act, h;
  };
  std::vector<Layer> layers;
  Eigen::RowVectorXd predictions;
  const LstmModel* model = nullptr;
  std::size_t batch = 0;
  std::size_t timestep = 0;
};

/// Forward pass over a batch. With `training` set, inverted-dropout masks drawn from `rng`
/// are applied to every layer input and to the recurrent state, fixed for the whole
/// sequence. Without it no masks or rescaling are applied and `rng` is not used.
ForwardCache forward_batch(const LstmModel& model, const Batch& batch, bool training, Rng* rng);

struct ForwardResult {
  double prediction = 0.0;
  ForwardCache cache;
};

/// Single window, `timestep × input_dim` row-major.
ForwardResult forward(const LstmModel& model, std::span<const double> window, std::size_t timestep,
                      bool training, std::uint64_t dropout_seed);

/// Sum of |W| (L1) or W² (L2) over the input kernels, times the factor.
double regularization(const LstmModel& model);

/// MAE plus the kernel regularizer.
double loss(std::span<const double> predictions, std::span<const double> targets,
            const LstmModel& model);

/// Exact gradient of `loss` for the cached forward pass (BPTT through every step and layer,
/// reusing the cached dropout masks). The MAE subgradient at zero error is 0.
/// Throws InternalError if the cache does not belong to `model`.
ParameterSet backward(const LstmModel& model, const ForwardCache& cache,
                      const Eigen::RowVectorXd& targets);

/// Adam moments for one parameter set.
struct AdamState {
  ParameterSet m;
  ParameterSet v;
  long step = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const ParameterSet& params);

/// Bias-corrected Adam update on flat arrays; `step_index` is 1-based.
void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, double lr, long step_index, const AdamConfig& cfg = {});

/// Applies one Adam step to every tensor; advances state.step and uses it as step_index.
/// Throws DimensionError on shape mismatch.
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, double lr,
               const AdamConfig& cfg = {});

struct GradientCheckReport {
  double max_relative_error = 0.0;
  double max_abs_error = 0.0;
  std::string worst_parameter;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  /// Parameters whose probe at h crossed a kink and was repeated with a smaller step.
  std::size_t reduced_step = 0;
  bool passed = true;
};

enum class CheckScope { All, DenseOnly };

/// Gradients smaller than this are compared on an absolute scale: central differences at
/// h = 1e-5 carry round-off of order 1e-11 on an O(1) loss, which swamps a 1e-4 relative
/// tolerance once |gradient| drops much below 1e-7.
inline constexpr double kGradientFloor = 1e-6;

/// A probe that flips a relu, a residual sign or (under L1) a kernel sign straddles a kink
/// where central differences mean nothing. It is repeated with h/10, up to this many times.
inline constexpr int kKinkRetries = 4;

/// Central differences f(θ±h) against `backward` for every parameter in scope, without
/// dropout. Relative error is |a − n| / max(|a|, |n|, kGradientFloor). Probes that cross a
/// kink are retried with a smaller step (see kKinkRetries).
GradientCheckReport gradient_check(const LstmModel& model, const Batch& batch, double h, double tol,
                                   CheckScope scope = CheckScope::All);

/// Inference on a raw (unscaled) dataset; returns wear in micrometers.
/// Throws ConfigError when the model carries no scaler.
std::vector<double> predict(const LstmModel& model, const dataset::WindowedDataset& ds);

/// Inference on an already-scaled dataset; returns scaled predictions.
std::vector<double> predict_scaled(const LstmModel& model, const dataset::WindowedDataset& ds);

}  // namespace toolwear::neural
