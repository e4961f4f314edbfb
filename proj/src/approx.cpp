#include "bidopt/approx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

namespace bidopt {

namespace {

struct Activations {
  std::vector<std::vector<double>> layer_out;  // post-activation per layer, [0] = input
};

void forward_pass(const NnModel& model, double x0, double x1, Activations& act) {
  act.layer_out.resize(model.layer_sizes.size());
  act.layer_out[0].assign({x0, x1});
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const int in_dim = model.layer_sizes[l];
    const int out_dim = model.layer_sizes[l + 1];
    const bool last = (l + 2 == model.layer_sizes.size());
    auto& out = act.layer_out[l + 1];
    out.assign(out_dim, 0.0);
    const auto& in = act.layer_out[l];
    const auto& w = model.weights[l];
    for (int o = 0; o < out_dim; ++o) {
      double z = model.biases[l][o];
      const double* wrow = w.data() + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) z += wrow[i] * in[i];
      out[o] = last ? z : std::tanh(z);
    }
  }
}

struct GradBuffers {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;

  void zero_like(const NnModel& model) {
    w.resize(model.weights.size());
    b.resize(model.biases.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      w[l].assign(model.weights[l].size(), 0.0);
      b[l].assign(model.biases[l].size(), 0.0);
    }
  }
};

// Accumulates d(0.5 * err^2)/d(params) for one sample into grads.
void backward_pass(const NnModel& model, const Activations& act, double err,
                   GradBuffers& grads) {
  const std::size_t n_conn = model.weights.size();
  std::vector<double> delta = {err};  // dLoss/dz at the linear output
  for (std::size_t l = n_conn; l-- > 0;) {
    const int in_dim = model.layer_sizes[l];
    const int out_dim = model.layer_sizes[l + 1];
    const auto& in = act.layer_out[l];
    const auto& w = model.weights[l];
    std::vector<double> prev_delta(in_dim, 0.0);
    for (int o = 0; o < out_dim; ++o) {
      const double d = delta[o];
      grads.b[l][o] += d;
      double* gw = grads.w[l].data() + static_cast<std::size_t>(o) * in_dim;
      const double* wrow = w.data() + static_cast<std::size_t>(o) * in_dim;
      for (int i = 0; i < in_dim; ++i) {
        gw[i] += d * in[i];
        prev_delta[i] += d * wrow[i];
      }
    }
    if (l > 0) {
      // tanh'(z) = 1 - tanh(z)^2, expressed with the stored activation
      for (int i = 0; i < in_dim; ++i) {
        const double a = act.layer_out[l][i];
        prev_delta[i] *= (1.0 - a * a);
      }
      delta = std::move(prev_delta);
    }
  }
}

NnModel init_model(const ApproxConfig& cfg, std::mt19937_64& rng) {
  NnModel model;
  model.layer_sizes.clear();
  model.layer_sizes.push_back(2);
  for (int h : cfg.hidden_sizes) {
    if (h < 1) throw std::invalid_argument("hidden layer sizes must be >= 1");
    model.layer_sizes.push_back(h);
  }
  model.layer_sizes.push_back(1);
  model.t_scale = cfg.T0 > 0 ? cfg.T0 : 1;
  model.b_scale = cfg.B0 > 0 ? static_cast<double>(cfg.B0) : 1;

  const std::size_t n_conn = model.layer_sizes.size() - 1;
  model.weights.resize(n_conn);
  model.biases.resize(n_conn);
  for (std::size_t l = 0; l < n_conn; ++l) {
    const int in_dim = model.layer_sizes[l];
    const int out_dim = model.layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (in_dim + out_dim));
    model.weights[l].resize(static_cast<std::size_t>(in_dim) * out_dim);
    model.biases[l].assign(out_dim, 0.0);
    for (double& w : model.weights[l]) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
      w = bound * (2.0 * u - 1.0);
    }
  }
  return model;
}

struct AdamState {
  GradBuffers m, v;
  std::int64_t step = 0;
};

}  // namespace

double NnModel::forward(double t, double b) const {
  // replay evaluates millions of forwards; reuse the activation buffers
  thread_local Activations act;
  forward_pass(*this, t / t_scale, b / b_scale, act);
  return act.layer_out.back()[0];
}

double nn_diff(const NnModel& model, double t, double b) {
  return std::max(0.0, model.forward(t, b));
}

NnTrainResult train_nn(const DiffTable& d, const ApproxConfig& cfg) {
  if (cfg.T0 < 1) throw std::invalid_argument("T0 must be >= 1");
  const std::int64_t b_top = cfg.B0 > 0 ? cfg.B0 : d.b_count - 1;
  if (b_top < 1) throw std::invalid_argument("B0 must be >= 1");
  if (cfg.T0 > d.t_max || b_top > d.b_count - 1)
    throw std::invalid_argument("diff table does not cover the requested sub-grid");
  if (cfg.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");

  std::mt19937_64 rng(cfg.seed);
  NnModel model = init_model(cfg, rng);
  model.b_scale = static_cast<double>(b_top);

  // Training set: grid cells, thinned to at most max_train_samples.
  const std::int64_t n_cells = static_cast<std::int64_t>(cfg.T0 + 1) * (b_top + 1);
  const double keep =
      cfg.max_train_samples > 0 && n_cells > cfg.max_train_samples
          ? static_cast<double>(cfg.max_train_samples) / static_cast<double>(n_cells)
          : 1.0;
  std::vector<float> xs_t, xs_b, ys;
  for (int t = 0; t <= cfg.T0; ++t) {
    for (std::int64_t b = 0; b <= b_top; ++b) {
      if (keep < 1.0) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        if (u >= keep) continue;
      }
      xs_t.push_back(static_cast<float>(t));
      xs_b.push_back(static_cast<float>(b));
      ys.push_back(static_cast<float>(d.at(t, std::min<std::int64_t>(b, d.b_count - 1))));
    }
  }
  const std::size_t n_samples = ys.size();
  if (n_samples == 0) throw std::invalid_argument("no training samples");

  // Targets are tiny (click units); train against scaled targets and fold the
  // scale back into the linear output layer afterwards.
  double sq_sum = 0.0;
  for (float y : ys) sq_sum += static_cast<double>(y) * y;
  double target_scale = std::sqrt(sq_sum / static_cast<double>(n_samples));
  if (!(target_scale > 0.0)) target_scale = 1.0;

  std::vector<std::size_t> order(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;

  AdamState adam;
  adam.m.zero_like(model);
  adam.v.zero_like(model);
  GradBuffers grads;
  grads.zero_like(model);
  GradBuffers velocity;  // SGD momentum
  velocity.zero_like(model);

  double lr = cfg.learning_rate;
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  auto sample_mse = [&](const NnModel& mdl) {
    double total = 0.0;
    Activations act;
    for (std::size_t i = 0; i < n_samples; ++i) {
      forward_pass(mdl, xs_t[i] / mdl.t_scale, xs_b[i] / mdl.b_scale, act);
      const double err = act.layer_out.back()[0] - ys[i] / target_scale;
      total += err * err;
    }
    return total / static_cast<double>(n_samples);
  };

  NnTrainResult result;
  NnModel best_model = model;
  AdamState best_adam = adam;
  GradBuffers best_velocity = velocity;
  double best_mse = std::numeric_limits<double>::infinity();

  Activations act;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates reshuffle each epoch, seeded rng only.
    for (std::size_t i = n_samples; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % i);
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t start = 0; start < n_samples; start += cfg.batch_size) {
      const std::size_t stop = std::min(n_samples, start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      for (auto& g : grads.w) std::fill(g.begin(), g.end(), 0.0);
      for (auto& g : grads.b) std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t s = order[i];
        forward_pass(model, xs_t[s] / model.t_scale, xs_b[s] / model.b_scale, act);
        const double err = act.layer_out.back()[0] - ys[s] / target_scale;
        backward_pass(model, act, err * inv_batch, grads);
      }
      if (cfg.optimizer == NnOptimizer::kAdam) {
        ++adam.step;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.step));
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
          auto update = [&](std::vector<double>& params, std::vector<double>& g,
                            std::vector<double>& m, std::vector<double>& v) {
            for (std::size_t k = 0; k < params.size(); ++k) {
              m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
              v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
              params[k] -= lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps);
            }
          };
          update(model.weights[l], grads.w[l], adam.m.w[l], adam.v.w[l]);
          update(model.biases[l], grads.b[l], adam.m.b[l], adam.v.b[l]);
        }
      } else {
        for (std::size_t l = 0; l < model.weights.size(); ++l) {
          auto update = [&](std::vector<double>& params, std::vector<double>& g,
                            std::vector<double>& vel) {
            for (std::size_t k = 0; k < params.size(); ++k) {
              vel[k] = 0.9 * vel[k] - lr * g[k];
              params[k] += vel[k];
            }
          };
          update(model.weights[l], grads.w[l], velocity.w[l]);
          update(model.biases[l], grads.b[l], velocity.b[l]);
        }
      }
    }

    double mse = sample_mse(model);
    if (!std::isfinite(mse))
      throw std::runtime_error("nn training diverged: loss is not finite");
    if (mse > best_mse) {
      // Backtrack: keep the best parameters seen, retry the next epoch at a
      // smaller step.
      model = best_model;
      adam = best_adam;
      velocity = best_velocity;
      lr *= 0.5;
      mse = best_mse;
    } else {
      best_mse = mse;
      best_model = model;
      best_adam = adam;
      best_velocity = velocity;
      lr *= cfg.lr_decay;
    }
    result.epoch_loss.push_back(mse * target_scale * target_scale);
  }

  model = best_model;
  // Fold the target scale into the linear output layer.
  for (double& w : model.weights.back()) w *= target_scale;
  for (double& b : model.biases.back()) b *= target_scale;

  // Reported RMSE covers every cell of the sub-grid, not just the sample.
  double total = 0.0;
  Activations eval_act;
  for (int t = 0; t <= cfg.T0; ++t) {
    for (std::int64_t b = 0; b <= b_top; ++b) {
      forward_pass(model, t / model.t_scale, b / model.b_scale, eval_act);
      const double err = eval_act.layer_out.back()[0] - d.at(t, std::min<std::int64_t>(b, d.b_count - 1));
      total += err * err;
    }
  }
  result.rmse = std::sqrt(total / static_cast<double>(n_cells));
  result.model = std::move(model);
  return result;
}

int bid_nn(const NnModel& model, const BidDecisionInput& input, int delta_max) {
  if (input.t < 1) throw std::invalid_argument("terminal state: t = 0");
  const std::int64_t amax = std::min<std::int64_t>(delta_max, input.b);
  const int t_prev = input.t - 1;
  double sum = 0.0;
  for (std::int64_t d = 1; d <= amax; ++d) {
    sum += nn_diff(model, t_prev, static_cast<double>(input.b - d));
    if (input.theta - sum < 0.0) return static_cast<int>(d - 1);
  }
  return static_cast<int>(amax);
}

void seg_begin_episode(SegState& state, int T, std::int64_t B, int T0) {
  if (T < 1 || T0 < 1) throw std::invalid_argument("T and T0 must be >= 1");
  if (B < 0) throw std::invalid_argument("budget must be >= 0");
  state.T = T;
  state.T0 = T0;
  state.remaining_budget = B;
  state.remaining_segments = (T + T0 - 1) / T0;
  state.seg_auctions_left = 0;
  state.seg_budget_left = 0;
}

int bid_nn_seg(SegState& state, const NnModel& model, const BidDecisionInput& input,
               int delta_max) {
  if (state.seg_auctions_left == 0) {
    if (state.remaining_segments <= 0)
      throw std::logic_error("segment bookkeeping exhausted: bid after episode end");
    // Allocation rule B_s = floor(B_r / N_r); leftovers stay in B_r and feed
    // later segments.
    state.seg_budget_left = state.remaining_budget / state.remaining_segments;
    --state.remaining_segments;
    state.seg_auctions_left = std::min(state.T0, input.t);
  }
  BidDecisionInput small;
  small.t = state.seg_auctions_left;
  small.b = state.seg_budget_left;
  small.theta = input.theta;
  int bid = bid_nn(model, small, delta_max);
  --state.seg_auctions_left;
  return static_cast<int>(std::min<std::int64_t>(bid, input.b));
}

void seg_observe(SegState& state, bool won, int price) {
  if (!won) return;
  state.seg_budget_left -= price;
  state.remaining_budget -= price;
  if (state.seg_budget_left < 0 || state.remaining_budget < 0)
    throw std::logic_error("segment bookkeeping overspent its allocation");
}

int bid_nn_mapd(const NnModel& model, const BidDecisionInput& input, int delta_max, int T0) {
  if (input.t < 1) throw std::invalid_argument("terminal state: t = 0");
  const int t_prev = input.t - 1;
  const std::int64_t amax = std::min<std::int64_t>(delta_max, input.b);
  const std::int64_t b0_cap = static_cast<std::int64_t>(std::llround(model.b_scale));
  auto query = [&](std::int64_t b_prev) {
    if (t_prev <= T0) return nn_diff(model, t_prev, static_cast<double>(b_prev));
    std::int64_t mapped =
        std::llround(static_cast<double>(b_prev) / static_cast<double>(t_prev) * T0);
    mapped = std::min(mapped, b0_cap);
    return nn_diff(model, T0, static_cast<double>(mapped));
  };
  double sum = 0.0;
  for (std::int64_t d = 1; d <= amax; ++d) {
    sum += query(input.b - d);
    if (input.theta - sum < 0.0) return static_cast<int>(d - 1);
  }
  return static_cast<int>(amax);
}

int bid_nn_mapa(const std::function<int(const BidDecisionInput&)>& bidder,
                const BidDecisionInput& input, int delta_max, int T0,
                std::int64_t b0_cap) {
  if (input.t < 1) throw std::invalid_argument("terminal state: t = 0");
  const std::int64_t cap = std::min<std::int64_t>(delta_max, input.b);
  if (input.t <= T0) {
    return static_cast<int>(std::clamp<std::int64_t>(bidder(input), 0, cap));
  }
  BidDecisionInput mapped;
  mapped.t = T0;
  mapped.b = std::llround(static_cast<double>(input.b) / static_cast<double>(input.t) * T0);
  if (b0_cap > 0) mapped.b = std::min(mapped.b, b0_cap);
  mapped.theta = input.theta;
  return static_cast<int>(std::clamp<std::int64_t>(bidder(mapped), 0, cap));
}

double map_deviation(const DiffTable& d, int T0, int t, std::int64_t b) {
  if (t < 1 || t > d.t_max || T0 < 1 || T0 > d.t_max)
    throw std::out_of_range("t outside the solved grid");
  if (b < 0 || b >= d.b_count) throw std::out_of_range("b outside the solved grid");
  const std::int64_t mapped =
      std::llround(static_cast<double>(b) / static_cast<double>(t) * T0);
  if (mapped < 0 || mapped >= d.b_count)
    throw std::out_of_range("mapped state outside the solved grid");
  return std::abs(d.at(t, b) - d.at(T0, mapped));
}

void save_nn_model(const std::string& path, const NnModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  out << "layers " << model.layer_sizes.size();
  for (int s : model.layer_sizes) out << ' ' << s;
  out << '\n';
  out << "t_scale " << model.t_scale << '\n';
  out << "b_scale " << model.b_scale << '\n';
  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    out << "layer " << l << '\n';
    for (std::size_t k = 0; k < model.weights[l].size(); ++k) {
      out << model.weights[l][k] << (((k + 1) % 8 == 0) ? '\n' : ' ');
    }
    out << '\n';
    for (std::size_t k = 0; k < model.biases[l].size(); ++k) {
      if (k) out << ' ';
      out << model.biases[l][k];
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

NnModel load_nn_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open nn model file: " + path);
  NnModel model;
  std::string key;
  std::size_t n_layers = 0;
  if (!(in >> key >> n_layers) || key != "layers" || n_layers < 2)
    throw std::runtime_error(path + ": bad nn header");
  model.layer_sizes.resize(n_layers);
  for (auto& s : model.layer_sizes) {
    if (!(in >> s) || s < 1) throw std::runtime_error(path + ": bad layer size");
  }
  if (!(in >> key >> model.t_scale) || key != "t_scale")
    throw std::runtime_error(path + ": bad nn header");
  if (!(in >> key >> model.b_scale) || key != "b_scale")
    throw std::runtime_error(path + ": bad nn header");
  model.weights.resize(n_layers - 1);
  model.biases.resize(n_layers - 1);
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    std::size_t idx = 0;
    if (!(in >> key >> idx) || key != "layer" || idx != l)
      throw std::runtime_error(path + ": bad layer marker");
    model.weights[l].resize(static_cast<std::size_t>(model.layer_sizes[l]) *
                            model.layer_sizes[l + 1]);
    for (double& w : model.weights[l]) {
      if (!(in >> w)) throw std::runtime_error(path + ": truncated weights");
    }
    model.biases[l].resize(model.layer_sizes[l + 1]);
    for (double& b : model.biases[l]) {
      if (!(in >> b)) throw std::runtime_error(path + ": truncated biases");
    }
  }
  return model;
}

}  // namespace bidopt
