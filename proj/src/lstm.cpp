#include "toolwear/lstm.hpp"

#include <cmath>

#include "toolwear/error.hpp"

namespace toolwear::neural {

namespace {

using Eigen::ArrayXXd;
using Eigen::MatrixXd;

constexpr std::uint64_t kInitStream = 0x1ae5;

MatrixXd sigmoid(const MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

MatrixXd activate(const MatrixXd& z, Activation a) {
  if (a == Activation::Tanh) return z.array().tanh().matrix();
  return z.cwiseMax(0.0);
}

// Derivative of the activation, expressed through its output (and input for relu).
ArrayXXd activate_grad(const MatrixXd& out, Activation a) {
  if (a == Activation::Tanh) return 1.0 - out.array().square();
  return (out.array() > 0.0).cast<double>();
}

MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  MatrixXd mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) mask(r, c) = rng.uniform() >= rate ? keep_scale : 0.0;
  }
  return mask;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

const char* to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }
const char* to_string(Regularizer r) { return r == Regularizer::L1 ? "L1" : "L2"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + s + "' (expected relu or tanh)");
}

Regularizer parse_regularizer(const std::string& s) {
  if (s == "L1" || s == "l1") return Regularizer::L1;
  if (s == "L2" || s == "l2") return Regularizer::L2;
  throw ConfigError("unknown regularizer '" + s + "' (expected L1 or L2)");
}

void Hyperparameters::validate() const {
  if (units.empty() || units.size() > 10) throw ConfigError("number of layers must be in [1, 10]");
  for (int u : units) {
    if (u < 16 || u > 128) throw ConfigError("units per layer must be in [16, 128]");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate <= 0.5)) throw ConfigError("dropout_rate must be in [0, 0.5]");
  if (!(recurrent_dropout_rate >= 0.0 && recurrent_dropout_rate <= 0.5)) {
    throw ConfigError("recurrent_dropout_rate must be in [0, 0.5]");
  }
  if (!(learning_rate >= 1e-4 && learning_rate <= 1e-2)) {
    throw ConfigError("learning_rate must be in [1e-4, 1e-2]");
  }
  if (!(regularization_factor >= 0.0) || !std::isfinite(regularization_factor)) {
    throw ConfigError("regularization factor must be >= 0");
  }
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet z;
  z.layers.reserve(layers.size());
  for (const auto& l : layers) {
    z.layers.push_back({MatrixXd::Zero(l.W.rows(), l.W.cols()), MatrixXd::Zero(l.U.rows(), l.U.cols()),
                        Eigen::VectorXd::Zero(l.b.size())});
  }
  z.w_out = Eigen::VectorXd::Zero(w_out.size());
  z.b_out = 0.0;
  return z;
}

std::size_t ParameterSet::count() const {
  std::size_t n = 1 + static_cast<std::size_t>(w_out.size());
  for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size() + l.U.size() + l.b.size());
  return n;
}

void ParameterSet::for_each(const std::function<void(const std::string&, double*, std::size_t)>& fn) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string prefix = "layer" + std::to_string(k) + ".";
    auto& l = layers[k];
    fn(prefix + "W", l.W.data(), static_cast<std::size_t>(l.W.size()));
    fn(prefix + "U", l.U.data(), static_cast<std::size_t>(l.U.size()));
    fn(prefix + "b", l.b.data(), static_cast<std::size_t>(l.b.size()));
  }
  fn("dense.w", w_out.data(), static_cast<std::size_t>(w_out.size()));
  fn("dense.b", &b_out, 1);
}

void ParameterSet::for_each(
    const std::function<void(const std::string&, const double*, std::size_t)>& fn) const {
  const_cast<ParameterSet*>(this)->for_each(
      [&](const std::string& name, double* p, std::size_t n) { fn(name, p, n); });
}

LstmModel init_model(const Hyperparameters& hp, std::size_t input_dim) {
  hp.validate();
  if (input_dim < 1) throw ConfigError("input_dim must be >= 1");
  LstmModel model;
  model.hp = hp;
  model.input_dim = input_dim;
  model.training.seed = hp.seed;
  Rng rng(derive_seed(hp.seed, kInitStream));

  std::size_t in = input_dim;
  for (std::size_t k = 0; k < hp.n_layers(); ++k) {
    const auto u = static_cast<Eigen::Index>(hp.units[k]);
    LayerParams layer;
    const double bound = std::sqrt(6.0 / static_cast<double>(in + 4 * static_cast<std::size_t>(u)));
    layer.W.resize(4 * u, static_cast<Eigen::Index>(in));
    for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.W.rows(); ++r) layer.W(r, c) = rng.uniform(-bound, bound);
    }
    MatrixXd gaussian(4 * u, u);
    for (Eigen::Index c = 0; c < u; ++c) {
      for (Eigen::Index r = 0; r < 4 * u; ++r) gaussian(r, c) = rng.normal();
    }
    Eigen::HouseholderQR<MatrixXd> qr(gaussian);
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(4 * u, u);
    const MatrixXd& rfac = qr.matrixQR();
    for (Eigen::Index c = 0; c < u; ++c) {
      if (rfac(c, c) < 0.0) q.col(c) *= -1.0;
    }
    layer.U = q;
    layer.b = Eigen::VectorXd::Zero(4 * u);
    layer.b.segment(kForget * u, u).setOnes();
    model.params.layers.push_back(std::move(layer));
    in = static_cast<std::size_t>(u);
  }
  const double bound = std::sqrt(6.0 / static_cast<double>(in + 1));
  model.params.w_out.resize(static_cast<Eigen::Index>(in));
  for (Eigen::Index r = 0; r < model.params.w_out.size(); ++r) {
    model.params.w_out(r) = rng.uniform(-bound, bound);
  }
  model.params.b_out = 0.0;
  return model;
}

Batch make_batch(const dataset::WindowedDataset& ds, std::span<const std::size_t> indices) {
  ds.validate();
  Batch batch;
  const auto nf = static_cast<Eigen::Index>(ds.n_features());
  const auto b = static_cast<Eigen::Index>(indices.size());
  batch.steps.assign(ds.timestep, MatrixXd(nf, b));
  batch.targets.resize(b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const std::size_t s = indices[static_cast<std::size_t>(j)];
    if (s >= ds.size()) throw IndexError("batch index out of range");
    const auto w = ds.window(s);
    for (std::size_t t = 0; t < ds.timestep; ++t) {
      for (Eigen::Index f = 0; f < nf; ++f) {
        batch.steps[t](f, j) = w[t * static_cast<std::size_t>(nf) + static_cast<std::size_t>(f)];
      }
    }
    batch.targets(j) = ds.targets[s];
  }
  return batch;
}

Batch make_batch(const dataset::WindowedDataset& ds) {
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return make_batch(ds, all);
}

ForwardCache forward_batch(const LstmModel& model, const Batch& batch, bool training, Rng* rng) {
  const std::size_t T = batch.steps.size();
  const auto B = static_cast<Eigen::Index>(batch.size());
  if (T == 0) throw DimensionError("batch has no time steps");
  for (const auto& x : batch.steps) {
    if (x.rows() != static_cast<Eigen::Index>(model.input_dim) || x.cols() != B) {
      throw DimensionError("batch step is " + std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()) + ", model expects " +
                           std::to_string(model.input_dim) + " features");
    }
  }
  const auto& hp = model.hp;
  const bool input_dropout = training && hp.dropout_rate > 0.0;
  const bool recurrent_dropout = training && hp.recurrent_dropout_rate > 0.0;
  if ((input_dropout || recurrent_dropout) && rng == nullptr) {
    throw InternalError("training forward pass with dropout needs a generator");
  }

  ForwardCache cache;
  cache.model = &model;
  cache.batch = static_cast<std::size_t>(B);
  cache.timestep = T;
  cache.layers.resize(model.params.layers.size());

  const std::vector<MatrixXd>* inputs = &batch.steps;
  for (std::size_t k = 0; k < model.params.layers.size(); ++k) {
    const LayerParams& p = model.params.layers[k];
    auto& L = cache.layers[k];
    const Eigen::Index u = p.U.cols();
    if (input_dropout) L.input_mask = dropout_mask(p.W.cols(), B, hp.dropout_rate, *rng);
    if (recurrent_dropout) L.recurrent_mask = dropout_mask(u, B, hp.recurrent_dropout_rate, *rng);
    for (auto* v : {&L.x, &L.h_prev, &L.i, &L.f, &L.g, &L.o, &L.c, &L.c_act, &L.h}) v->resize(T);

    MatrixXd h = MatrixXd::Zero(u, B);
    MatrixXd c = MatrixXd::Zero(u, B);
    for (std::size_t t = 0; t < T; ++t) {
      L.x[t] = input_dropout ? (*inputs)[t].cwiseProduct(L.input_mask) : (*inputs)[t];
      L.h_prev[t] = recurrent_dropout ? h.cwiseProduct(L.recurrent_mask) : h;
      MatrixXd z = p.W * L.x[t];
      z.noalias() += p.U * L.h_prev[t];
      z.colwise() += p.b;
      L.i[t] = sigmoid(z.middleRows(kInput * u, u));
      L.f[t] = sigmoid(z.middleRows(kForget * u, u));
      L.g[t] = activate(z.middleRows(kCandidate * u, u), hp.activation);
      L.o[t] = sigmoid(z.middleRows(kOutput * u, u));
      c = L.f[t].cwiseProduct(c) + L.i[t].cwiseProduct(L.g[t]);
      L.c[t] = c;
      L.c_act[t] = activate(c, hp.activation);
      h = L.o[t].cwiseProduct(L.c_act[t]);
      L.h[t] = h;
    }
    inputs = &L.h;
  }
  const MatrixXd& top = cache.layers.back().h[T - 1];
  cache.predictions = model.params.w_out.transpose() * top;
  cache.predictions.array() += model.params.b_out;
  return cache;
}

ForwardResult forward(const LstmModel& model, std::span<const double> window, std::size_t timestep,
                      bool training, std::uint64_t dropout_seed) {
  if (timestep == 0 || window.size() != timestep * model.input_dim) {
    throw DimensionError("window has " + std::to_string(window.size()) + " values, expected " +
                         std::to_string(timestep) + " x " + std::to_string(model.input_dim));
  }
  Batch batch;
  batch.steps.assign(timestep, MatrixXd(static_cast<Eigen::Index>(model.input_dim), 1));
  for (std::size_t t = 0; t < timestep; ++t) {
    for (std::size_t f = 0; f < model.input_dim; ++f) {
      batch.steps[t](static_cast<Eigen::Index>(f), 0) = window[t * model.input_dim + f];
    }
  }
  batch.targets = Eigen::RowVectorXd::Zero(1);
  Rng rng(dropout_seed);
  ForwardResult result;
  result.cache = forward_batch(model, batch, training, &rng);
  result.prediction = result.cache.predictions(0);
  return result;
}

double regularization(const LstmModel& model) {
  const double factor = model.hp.regularization_factor;
  if (factor == 0.0) return 0.0;
  double total = 0.0;
  for (const auto& l : model.params.layers) {
    total += model.hp.regularizer == Regularizer::L1 ? l.W.cwiseAbs().sum() : l.W.squaredNorm();
  }
  return factor * total;
}

double loss(std::span<const double> predictions, std::span<const double> targets,
            const LstmModel& model) {
  if (predictions.size() != targets.size()) {
    throw DimensionError("loss: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(targets.size()) + " targets");
  }
  if (predictions.empty()) throw DimensionError("loss of an empty batch");
  double mae = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) mae += std::abs(predictions[i] - targets[i]);
  return mae / static_cast<double>(predictions.size()) + regularization(model);
}

ParameterSet backward(const LstmModel& model, const ForwardCache& cache,
                      const Eigen::RowVectorXd& targets) {
  if (cache.model != &model || cache.layers.size() != model.params.layers.size() ||
      cache.timestep == 0 || static_cast<std::size_t>(targets.size()) != cache.batch ||
      cache.predictions.size() != targets.size()) {
    throw InternalError("forward cache does not match this model and batch");
  }
  const std::size_t T = cache.timestep;
  const auto B = static_cast<Eigen::Index>(cache.batch);
  const Activation act = model.hp.activation;

  ParameterSet grads = model.params.zeros_like();
  Eigen::RowVectorXd dpred(B);
  for (Eigen::Index j = 0; j < B; ++j) {
    dpred(j) = sign(cache.predictions(j) - targets(j)) / static_cast<double>(B);
  }
  const MatrixXd& top = cache.layers.back().h[T - 1];
  grads.w_out = top * dpred.transpose();
  grads.b_out = dpred.sum();

  std::vector<MatrixXd> dh_above(T);
  dh_above[T - 1] = model.params.w_out * dpred;

  for (std::size_t kk = model.params.layers.size(); kk-- > 0;) {
    const LayerParams& p = model.params.layers[kk];
    const auto& L = cache.layers[kk];
    LayerParams& gp = grads.layers[kk];
    const Eigen::Index u = p.U.cols();
    MatrixXd dh_next = MatrixXd::Zero(u, B);
    MatrixXd dc_next = MatrixXd::Zero(u, B);
    std::vector<MatrixXd> dx_below(kk > 0 ? T : 0);
    MatrixXd dz(4 * u, B);

    for (std::size_t t = T; t-- > 0;) {
      MatrixXd dh = dh_next;
      if (dh_above[t].size() != 0) dh += dh_above[t];
      const ArrayXXd o = L.o[t].array();
      const ArrayXXd i = L.i[t].array();
      const ArrayXXd f = L.f[t].array();
      const ArrayXXd g = L.g[t].array();
      const ArrayXXd do_ = dh.array() * L.c_act[t].array();
      const ArrayXXd dc = dc_next.array() + dh.array() * o * activate_grad(L.c_act[t], act);
      const ArrayXXd di = dc * g;
      const ArrayXXd dg = dc * i;
      dz.middleRows(kInput * u, u) = (di * i * (1.0 - i)).matrix();
      if (t > 0) {
        dz.middleRows(kForget * u, u) = (dc * L.c[t - 1].array() * f * (1.0 - f)).matrix();
      } else {
        dz.middleRows(kForget * u, u).setZero();
      }
      dz.middleRows(kCandidate * u, u) = (dg * activate_grad(L.g[t], act)).matrix();
      dz.middleRows(kOutput * u, u) = (do_ * o * (1.0 - o)).matrix();
      dc_next = (dc * f).matrix();

      gp.W.noalias() += dz * L.x[t].transpose();
      gp.U.noalias() += dz * L.h_prev[t].transpose();
      gp.b += dz.rowwise().sum();

      dh_next.noalias() = p.U.transpose() * dz;
      if (L.recurrent_mask.size() != 0) dh_next = dh_next.cwiseProduct(L.recurrent_mask);
      if (kk > 0) {
        MatrixXd dx = p.W.transpose() * dz;
        if (L.input_mask.size() != 0) dx = dx.cwiseProduct(L.input_mask);
        dx_below[t] = std::move(dx);
      }
    }
    dh_above = std::move(dx_below);
  }

  const double factor = model.hp.regularization_factor;
  if (factor != 0.0) {
    for (std::size_t k = 0; k < grads.layers.size(); ++k) {
      const MatrixXd& w = model.params.layers[k].W;
      if (model.hp.regularizer == Regularizer::L1) {
        grads.layers[k].W += factor * w.unaryExpr([](double x) { return sign(x); });
      } else {
        grads.layers[k].W += 2.0 * factor * w;
      }
    }
  }
  return grads;
}

AdamState make_adam_state(const ParameterSet& params) {
  return {params.zeros_like(), params.zeros_like(), 0};
}

void adam_update(std::span<double> theta, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, double lr, long step_index, const AdamConfig& cfg) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw DimensionError("adam_update: parameter, gradient and moment sizes differ");
  }
  if (step_index < 1) throw InternalError("adam step index is 1-based");
  const double t = static_cast<double>(step_index);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * grad[k];
    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
    const double m_hat = m[k] / c1;
    const double v_hat = v[k] / c2;
    theta[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& state, double lr,
               const AdamConfig& cfg) {
  struct Slot {
    double* p;
    std::size_t n;
  };
  auto collect = [](ParameterSet& set) {
    std::vector<Slot> out;
    set.for_each([&](const std::string&, double* p, std::size_t n) { out.push_back({p, n}); });
    return out;
  };
  auto theta = collect(params);
  auto g = collect(const_cast<ParameterSet&>(grads));
  auto m = collect(state.m);
  auto v = collect(state.v);
  if (g.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size()) {
    throw DimensionError("adam_step: parameter sets have different layouts");
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (g[k].n != theta[k].n || m[k].n != theta[k].n || v[k].n != theta[k].n) {
      throw DimensionError("adam_step: tensor " + std::to_string(k) + " shape mismatch");
    }
  }
  ++state.step;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    adam_update({theta[k].p, theta[k].n}, {g[k].p, g[k].n}, {m[k].p, m[k].n}, {v[k].p, v[k].n},
                lr, state.step, cfg);
  }
}

namespace {

std::string describe(const std::string& tensor, std::size_t index, const LstmModel& model) {
  static const char* gates[] = {"i", "f", "g", "o"};
  if (tensor.rfind("layer", 0) == 0) {
    const auto dot = tensor.find('.');
    const std::size_t layer = std::stoul(tensor.substr(5, dot - 5));
    const char kind = tensor[dot + 1];
    const std::size_t u = model.units(layer);
    const std::size_t rows = 4 * u;
    const std::size_t row = index % rows;
    const std::size_t col = index / rows;
    std::string s = tensor + "[gate=" + gates[row / u] + ",unit=" + std::to_string(row % u);
    if (kind != 'b') s += ",col=" + std::to_string(col);
    return s + "]";
  }
  return tensor + "[" + std::to_string(index) + "]";
}

}  // namespace

GradientCheckReport gradient_check(const LstmModel& model, const Batch& batch, double h, double tol,
                                   CheckScope scope) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be > 0");
  LstmModel probe = model;
  probe.hp.dropout_rate = 0.0;
  probe.hp.recurrent_dropout_rate = 0.0;

  const ForwardCache cache = forward_batch(probe, batch, false, nullptr);
  const ParameterSet grads = backward(probe, cache, batch.targets);
  const std::vector<double> targets(batch.targets.data(), batch.targets.data() + batch.targets.size());

  // Which side of every kink the loss sits on: relu gates and cell activations, the sign of
  // each residual, and for L1 the sign of every input kernel entry.
  const bool relu = probe.hp.activation == Activation::Relu;
  const bool l1 = probe.hp.regularizer == Regularizer::L1 && probe.hp.regularization_factor != 0.0;
  auto pattern = [&](const ForwardCache& c) {
    std::vector<bool> bits;
    if (relu) {
      for (const auto& l : c.layers) {
        for (const auto* seq : {&l.g, &l.c}) {
          for (const auto& m : *seq) {
            for (Eigen::Index i = 0; i < m.size(); ++i) bits.push_back(m.data()[i] > 0.0);
          }
        }
      }
    }
    for (Eigen::Index i = 0; i < c.predictions.size(); ++i) bits.push_back(c.predictions(i) > batch.targets(i));
    if (l1) {
      for (const auto& l : probe.params.layers) {
        for (Eigen::Index i = 0; i < l.W.size(); ++i) bits.push_back(l.W.data()[i] > 0.0);
      }
    }
    return bits;
  };
  const std::vector<bool> base_pattern = pattern(cache);

  // Loss at the current parameters, and whether the kink pattern still matches the base point.
  auto eval = [&]() {
    const ForwardCache c = forward_batch(probe, batch, false, nullptr);
    const std::vector<double> pred(c.predictions.data(), c.predictions.data() + c.predictions.size());
    return std::pair{loss(pred, targets, probe), pattern(c) == base_pattern};
  };

  std::vector<std::pair<std::string, const double*>> analytic;
  grads.for_each([&](const std::string& name, const double* p, std::size_t) {
    analytic.emplace_back(name, p);
  });

  GradientCheckReport report;
  std::size_t tensor = 0;
  probe.params.for_each([&](const std::string& name, double* p, std::size_t n) {
    const double* a = analytic[tensor++].second;
    if (scope == CheckScope::DenseOnly && name.rfind("dense", 0) != 0) return;
    for (std::size_t k = 0; k < n; ++k) {
      const double saved = p[k];
      double step = h;
      double numeric = 0.0;
      for (int attempt = 0;; ++attempt) {
        p[k] = saved + step;
        const auto [plus, plus_smooth] = eval();
        p[k] = saved - step;
        const auto [minus, minus_smooth] = eval();
        p[k] = saved;
        numeric = (plus - minus) / (2.0 * step);
        if ((plus_smooth && minus_smooth) || attempt == kKinkRetries) break;
        step /= 10.0;
      }
      if (step != h) ++report.reduced_step;
      const double denom = std::max({std::abs(a[k]), std::abs(numeric), kGradientFloor});
      const double rel = std::abs(a[k] - numeric) / denom;
      ++report.checked;
      report.max_abs_error = std::max(report.max_abs_error, std::abs(a[k] - numeric));
      if (report.checked == 1 || rel > report.max_relative_error) {
        report.max_relative_error = rel;
        report.worst_parameter = describe(name, k, probe);
        report.analytic = a[k];
        report.numeric = numeric;
      }
    }
  });
  report.passed = report.max_relative_error < tol;
  return report;
}

std::vector<double> predict_scaled(const LstmModel& model, const dataset::WindowedDataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  constexpr std::size_t kChunk = 256;
  std::vector<std::size_t> idx;
  for (std::size_t first = 0; first < ds.size(); first += kChunk) {
    idx.clear();
    for (std::size_t i = first; i < std::min(ds.size(), first + kChunk); ++i) idx.push_back(i);
    const Batch batch = make_batch(ds, idx);
    const ForwardCache cache = forward_batch(model, batch, false, nullptr);
    for (Eigen::Index j = 0; j < cache.predictions.size(); ++j) out.push_back(cache.predictions(j));
  }
  return out;
}

std::vector<double> predict(const LstmModel& model, const dataset::WindowedDataset& ds) {
  if (!model.scaler) throw ConfigError("model has no scaler attached; cannot predict in micrometers");
  if (ds.size() == 0) return {};
  const auto scaled = dataset::apply_scaler(ds, *model.scaler);
  return dataset::inverse_scale_target(predict_scaled(model, scaled), *model.scaler);
}

}  // namespace toolwear::neural
