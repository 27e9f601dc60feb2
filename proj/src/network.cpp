#include "posepost/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "posepost/error.hpp"

namespace posepost {

std::string to_string(HeadMode mode) { return mode == HeadMode::Mdn ? "mdn" : "point"; }

HeadMode head_mode_from_string(const std::string& s) {
  if (s == "mdn") return HeadMode::Mdn;
  if (s == "point") return HeadMode::Point;
  throw ValidationError("unknown network mode '" + s + "' (expected mdn or point)");
}

void NetworkConfig::validate() const {
  if (input_side <= 0) throw ValidationError("input_side must be positive");
  for (int h : hidden_sizes)
    if (h <= 0) throw ValidationError("hidden sizes must be positive");
  if (components <= 0) throw ValidationError("components must be positive");
  if (shape_dim < 0) throw ValidationError("shape_dim must be non-negative");
  if (n_categories <= 0) throw ValidationError("n_categories must be positive");
  if (lambda_pose < 0.0 || lambda_shape < 0.0 || lambda_class < 0.0)
    throw ValidationError("loss weights must be non-negative");
  if (!(elu_alpha > 0.0) || !(var_epsilon > 0.0)) throw ValidationError("elu_alpha and var_epsilon must be positive");
  if (epochs < 0 || batch_size <= 0 || !(learning_rate > 0.0)) throw ValidationError("bad optimizer settings");
}

// ---------------------------------------------------------------------------
// Parameters

NetworkWeights NetworkWeights::zeros(const NetworkConfig& cfg) {
  cfg.validate();
  NetworkWeights w;
  int in = cfg.input_size();
  auto add = [&](int out) {
    w.layers.push_back({Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)});
    in = out;
  };
  for (int h : cfg.hidden_sizes) add(h);
  add(cfg.output_size());
  return w;
}

NetworkWeights NetworkWeights::initialize(const NetworkConfig& cfg, Rng& rng) {
  NetworkWeights w = zeros(cfg);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (std::size_t l = 0; l < w.layers.size(); ++l) {
    auto& layer = w.layers[l];
    const double fan_in = static_cast<double>(layer.weight.cols());
    const bool output = l + 1 == w.layers.size();
    const double sd = output ? std::sqrt(1.0 / fan_in) : std::sqrt(2.0 / fan_in);
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = sd * n01(rng);
  }
  return w;
}

std::size_t NetworkWeights::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd NetworkWeights::flatten() const {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
  Eigen::Index o = 0;
  for (const auto& l : layers) {
    flat.segment(o, l.weight.size()) = l.weight.reshaped();
    o += l.weight.size();
    flat.segment(o, l.bias.size()) = l.bias;
    o += l.bias.size();
  }
  return flat;
}

void NetworkWeights::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != parameter_count())
    throw ValidationError("parameter vector has the wrong length");
  Eigen::Index o = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = flat.segment(o, l.weight.size());
    o += l.weight.size();
    l.bias = flat.segment(o, l.bias.size());
    o += l.bias.size();
  }
}

bool NetworkWeights::shapes_match(const NetworkConfig& cfg) const {
  if (layers.size() != cfg.hidden_sizes.size() + 1) return false;
  int in = cfg.input_size();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const int out = l < cfg.hidden_sizes.size() ? cfg.hidden_sizes[l] : cfg.output_size();
    if (layers[l].weight.rows() != out || layers[l].weight.cols() != in || layers[l].bias.size() != out)
      return false;
    in = out;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Forward pass

Eigen::VectorXd preprocess(const DepthImage& image, const NetworkConfig& cfg) {
  const int s = cfg.input_side;
  if (image.width <= 0 || image.height <= 0) throw ValidationError("empty depth image");
  Eigen::VectorXd out(s * s);
  for (int i = 0; i < s; ++i) {
    const int r0 = i * image.height / s;
    const int r1 = std::max(r0 + 1, (i + 1) * image.height / s);
    for (int j = 0; j < s; ++j) {
      const int c0 = j * image.width / s;
      const int c1 = std::max(c0 + 1, (j + 1) * image.width / s);
      double sum = 0.0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) {
          const double d = image.at(c, r);
          if (d == DepthImage::kBackground) continue;
          sum += std::clamp((d - cfg.depth_center + 1.0) / 2.0, 0.0, 1.0);
        }
      }
      out[i * s + j] = sum / ((r1 - r0) * (c1 - c0));
    }
  }
  return out;
}

namespace {

struct Activations {
  std::vector<Eigen::MatrixXd> values;  // values[0] = inputs, then each hidden output
  Eigen::MatrixXd output;
};

Activations run(const NetworkWeights& w, const Eigen::MatrixXd& inputs) {
  Activations act;
  act.values.reserve(w.layers.size());
  act.values.push_back(inputs);
  for (std::size_t l = 0; l + 1 < w.layers.size(); ++l) {
    const auto& layer = w.layers[l];
    Eigen::MatrixXd z = layer.weight * act.values.back();
    z.colwise() += layer.bias;
    act.values.push_back(z.cwiseMax(0.0));
  }
  const auto& last = w.layers.back();
  act.output = last.weight * act.values.back();
  act.output.colwise() += last.bias;
  if (!act.output.allFinite()) throw NumericError("numeric failure");
  return act;
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Loss of one raw output column; writes dL/dz into grad when non-null.
double head_loss(const double* z, const PoseTarget& t, const NetworkConfig& cfg, double* grad) {
  double loss = 0.0;
  const int pose_n = cfg.pose_outputs();
  const Eigen::Vector3d y = t.pose.r;

  if (cfg.mode == HeadMode::Mdn) {
    const int c = cfg.components;
    const double lse_a = log_sum_exp(std::span<const double>(z, static_cast<std::size_t>(c)));
    std::vector<double> ell(static_cast<std::size_t>(c));
    std::vector<Eigen::Vector3d> var(static_cast<std::size_t>(c)), diff(static_cast<std::size_t>(c));
    for (int i = 0; i < c; ++i) {
      double quad = 0.0, logdet = 0.0;
      for (int d = 0; d < 3; ++d) {
        const double v = variance_activation(z[4 * c + 3 * i + d], cfg.elu_alpha, cfg.var_epsilon);
        const double r = y[d] - z[c + 3 * i + d];
        var[i][d] = v;
        diff[i][d] = r;
        quad += r * r / v;
        logdet += std::log(v);
      }
      ell[i] = (z[i] - lse_a) - 0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + logdet + quad);
    }
    const double lse = log_sum_exp(ell);
    loss += cfg.lambda_pose * -lse;
    if (grad) {
      for (int i = 0; i < c; ++i) {
        const double gamma = std::exp(ell[i] - lse);
        const double pi = std::exp(z[i] - lse_a);
        grad[i] = cfg.lambda_pose * (pi - gamma);
        for (int d = 0; d < 3; ++d) {
          const double v = var[i][d], r = diff[i][d];
          grad[c + 3 * i + d] = cfg.lambda_pose * -gamma * r / v;
          const double dv = 0.5 * gamma * (1.0 / v - r * r / (v * v));
          grad[4 * c + 3 * i + d] =
              cfg.lambda_pose * dv * variance_activation_derivative(z[4 * c + 3 * i + d], cfg.elu_alpha);
        }
      }
    }
  } else {
    double sq = 0.0;
    for (int d = 0; d < 3; ++d) {
      const double r = z[d] - y[d];
      sq += r * r;
      if (grad) grad[d] = cfg.lambda_pose * 2.0 * r;
    }
    loss += cfg.lambda_pose * sq;
  }

  const double* zs = z + pose_n;
  double shape = 0.0;
  for (int j = 0; j < cfg.shape_dim; ++j) {
    const double r = zs[j] - t.shape_coeffs[j];
    shape += r * r;
    if (grad) grad[pose_n + j] = cfg.lambda_shape * 2.0 * r;
  }
  loss += cfg.lambda_shape * shape;

  const double* zc = zs + cfg.shape_dim;
  const double lse_c = log_sum_exp(std::span<const double>(zc, static_cast<std::size_t>(cfg.n_categories)));
  loss += cfg.lambda_class * (lse_c - zc[t.category]);
  if (grad) {
    for (int k = 0; k < cfg.n_categories; ++k) {
      const double p = std::exp(zc[k] - lse_c);
      grad[pose_n + cfg.shape_dim + k] = cfg.lambda_class * (p - (k == t.category ? 1.0 : 0.0));
    }
  }
  return loss;
}

void check_target(const PoseTarget& t, const NetworkConfig& cfg) {
  if (t.shape_coeffs.size() != cfg.shape_dim) throw ValidationError("target shape coefficients have the wrong length");
  if (t.category < 0 || t.category >= cfg.n_categories) throw ValidationError("target category out of range");
}

LossAndGradient batch_gradient(const NetworkWeights& w, const std::vector<const Example*>& batch,
                               const NetworkConfig& cfg) {
  if (batch.empty()) throw ValidationError("empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd inputs(cfg.input_size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& ex = *batch[static_cast<std::size_t>(j)];
    if (ex.input.size() != cfg.input_size()) throw ValidationError("example input has the wrong size");
    check_target(ex.target, cfg);
    inputs.col(j) = ex.input;
  }
  const Activations act = run(w, inputs);

  LossAndGradient out;
  Eigen::MatrixXd delta(act.output.rows(), n);
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j)
    total += head_loss(act.output.col(j).data(), batch[static_cast<std::size_t>(j)]->target, cfg, delta.col(j).data());
  out.loss = total / static_cast<double>(n);
  if (!std::isfinite(out.loss) || !delta.allFinite()) throw NumericError("numeric failure");
  delta /= static_cast<double>(n);

  out.gradient.layers.resize(w.layers.size());
  for (std::size_t l = w.layers.size(); l-- > 0;) {
    auto& g = out.gradient.layers[l];
    g.weight = delta * act.values[l].transpose();
    g.bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = w.layers[l].weight.transpose() * delta;
    delta = (act.values[l].array() > 0.0).select(back, 0.0);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd forward_raw(const NetworkWeights& w, const Eigen::MatrixXd& inputs, const NetworkConfig& cfg) {
  if (!w.shapes_match(cfg)) throw ValidationError("weights do not match network config");
  if (inputs.rows() != cfg.input_size()) throw ValidationError("input has the wrong size");
  return run(w, inputs).output;
}

PredictionOutput decode_output(std::span<const double> raw, const NetworkConfig& cfg) {
  if (static_cast<int>(raw.size()) != cfg.output_size()) throw ValidationError("raw output has the wrong size");
  PredictionOutput p;
  p.mode = cfg.mode;
  const int pose_n = cfg.pose_outputs();
  if (cfg.mode == HeadMode::Mdn) {
    p.pose_mixture = head_transform(raw.subspan(0, static_cast<std::size_t>(pose_n)), cfg.components,
                                    cfg.elu_alpha, cfg.var_epsilon);
  } else {
    p.pose_point = RotVec(raw[0], raw[1], raw[2]);
  }
  p.shape_coeffs = Eigen::Map<const Eigen::VectorXd>(raw.data() + pose_n, cfg.shape_dim);
  const auto logits = raw.subspan(static_cast<std::size_t>(pose_n + cfg.shape_dim));
  const double lse = log_sum_exp(logits);
  p.category_probs.resize(cfg.n_categories);
  for (int k = 0; k < cfg.n_categories; ++k) p.category_probs[k] = std::exp(logits[static_cast<std::size_t>(k)] - lse);
  return p;
}

PredictionOutput forward_input(const NetworkWeights& w, const Eigen::VectorXd& input, const NetworkConfig& cfg) {
  const Eigen::MatrixXd raw = forward_raw(w, input, cfg);
  return decode_output(std::span<const double>(raw.data(), static_cast<std::size_t>(raw.size())), cfg);
}

PredictionOutput forward(const NetworkWeights& w, const DepthImage& image, const NetworkConfig& cfg) {
  return forward_input(w, preprocess(image, cfg), cfg);
}

double total_loss(const PredictionOutput& pred, const PoseTarget& target, const NetworkConfig& cfg) {
  check_target(target, cfg);
  double pose = 0.0;
  if (pred.mode == HeadMode::Mdn) {
    pose = pose_loss(target.pose.r, pred.pose_mixture);
  } else {
    pose = (pred.pose_point.r - target.pose.r).squaredNorm();
  }
  const double shape = (pred.shape_coeffs - target.shape_coeffs).squaredNorm();
  const double cls = -std::log(pred.category_probs[target.category]);
  return cfg.lambda_pose * pose + cfg.lambda_shape * shape + cfg.lambda_class * cls;
}

LossAndGradient loss_gradient(const NetworkWeights& w, std::span<const Example> batch, const NetworkConfig& cfg) {
  if (!w.shapes_match(cfg)) throw ValidationError("weights do not match network config");
  std::vector<const Example*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& e : batch) ptrs.push_back(&e);
  return batch_gradient(w, ptrs, cfg);
}

TrainResult train(std::span<const Example> dataset, const NetworkConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (dataset.empty()) throw ValidationError("empty dataset");
  Rng rng(seed);
  TrainResult result;
  result.seed = seed;
  result.weights = NetworkWeights::initialize(cfg, rng);

  Eigen::VectorXd params = result.weights.flatten();
  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
  double b1t = 1.0, b2t = 1.0;

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Example*> batch;
  NetworkWeights& w = result.weights;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&dataset[order[i]]);

      const LossAndGradient lg = batch_gradient(w, batch, cfg);
      epoch_loss += lg.loss * static_cast<double>(end - start);

      const Eigen::VectorXd g = lg.gradient.flatten();
      b1t *= cfg.beta1;
      b2t *= cfg.beta2;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      const double step = cfg.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
      params.array() -= step * m.array() / (v.array().sqrt() + cfg.adam_epsilon * std::sqrt(1.0 - b2t));
      w.assign(params);
    }
    result.loss_trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return result;
}

}  // namespace posepost
