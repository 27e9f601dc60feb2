#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "posepost/geometry.hpp"
#include "posepost/gmm.hpp"
#include "posepost/shapespace.hpp"

namespace posepost {

enum class HeadMode { Mdn, Point };

std::string to_string(HeadMode mode);
HeadMode head_mode_from_string(const std::string& s);

struct NetworkConfig {
  int input_side = 32;
  std::vector<int> hidden_sizes{256, 256};
  int components = 5;
  int shape_dim = 20;
  int n_categories = 3;
  double lambda_pose = 1.0;
  double lambda_shape = 1.0;
  double lambda_class = 1.0;
  HeadMode mode = HeadMode::Mdn;
  double elu_alpha = 1.0;
  double var_epsilon = 1e-6;
  // Depth normalization: valid depths map to (depth - depth_center + 1) / 2, clamped to [0, 1].
  double depth_center = 2.5;

  // Optimizer.
  int epochs = 25;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  int input_size() const { return input_side * input_side; }
  int pose_outputs() const { return mode == HeadMode::Mdn ? gmm_head_size(components) : 3; }
  int output_size() const { return pose_outputs() + shape_dim + n_categories; }
  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// All trainable parameters. The last layer emits [pose head | shape head | class head].
struct NetworkWeights {
  std::vector<DenseLayer> layers;

  /// He-normal initialization for the rectifier layers, scaled-down output layer.
  static NetworkWeights initialize(const NetworkConfig& cfg, Rng& rng);
  static NetworkWeights zeros(const NetworkConfig& cfg);

  std::size_t parameter_count() const;
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
  bool shapes_match(const NetworkConfig& cfg) const;
};

struct PredictionOutput {
  HeadMode mode = HeadMode::Mdn;
  GmmParams pose_mixture;  // Mdn mode
  RotVec pose_point;       // Point mode
  Coefficients shape_coeffs;
  Eigen::VectorXd category_probs;
};

struct PoseTarget {
  RotVec pose;
  Coefficients shape_coeffs;
  int category = 0;
};

/// One preprocessed training example.
struct Example {
  Eigen::VectorXd input;
  PoseTarget target;
};

/// Downsamples to input_side^2 by box averaging after normalizing each pixel:
/// background -> 0, depth -> clamp((depth - depth_center + 1) / 2, 0, 1).
Eigen::VectorXd preprocess(const DepthImage& image, const NetworkConfig& cfg);

/// Raw output-layer activations for a batch of inputs (columns).
Eigen::MatrixXd forward_raw(const NetworkWeights& w, const Eigen::MatrixXd& inputs, const NetworkConfig& cfg);

/// Maps one column of raw outputs to distributions.
PredictionOutput decode_output(std::span<const double> raw, const NetworkConfig& cfg);

PredictionOutput forward(const NetworkWeights& w, const DepthImage& image, const NetworkConfig& cfg);
PredictionOutput forward_input(const NetworkWeights& w, const Eigen::VectorXd& input, const NetworkConfig& cfg);

/// lambda_p * pose + lambda_s * ||c_hat - c||^2 + lambda_c * (-ln p[true]).
/// Point mode uses the squared Euclidean error on the rotation vector for the pose term.
double total_loss(const PredictionOutput& pred, const PoseTarget& target, const NetworkConfig& cfg);

struct LossAndGradient {
  double loss = 0.0;  // mean over the batch
  NetworkWeights gradient;
};

LossAndGradient loss_gradient(const NetworkWeights& w, std::span<const Example> batch, const NetworkConfig& cfg);

struct TrainResult {
  NetworkWeights weights;
  std::vector<double> loss_trace;  // mean training loss per epoch
  std::uint64_t seed = 0;
};

/// Adam with per-epoch reshuffling driven by `seed`.
TrainResult train(std::span<const Example> dataset, const NetworkConfig& cfg, std::uint64_t seed);

}  // namespace posepost
