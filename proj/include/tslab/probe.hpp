#pragma once

#include "tslab/labeling.hpp"
#include "tslab/scaling_meta.hpp"
#include "tslab/splitting.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace tslab {

/// One tanh hidden layer and a softmax output over flattened slices.
/// Inputs are laid out one sample per column.
struct ProbeModel {
  Eigen::MatrixXd w1;  ///< hidden x input
  Eigen::VectorXd b1;  ///< empty when bias is off
  Eigen::MatrixXd w2;  ///< classes x hidden
  Eigen::VectorXd b2;
  bool trained = false;

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static ProbeModel create(Eigen::Index input_dim, Eigen::Index hidden_units, int class_count, bool use_bias,
                           std::uint64_t seed);

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_units() const { return w1.rows(); }
  int class_count() const { return static_cast<int>(w2.rows()); }
  bool use_bias() const { return b1.size() > 0; }
  Eigen::Index parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

  /// classes x samples; each column sums to 1.
  Eigen::MatrixXd probabilities(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;
  std::vector<int> predict(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const;
};

struct ProbeGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Mean softmax cross-entropy over the batch; fills `grads` when non-null.
/// `dropout_mask` (hidden x batch, entries 0 or 1/keep) multiplies the hidden
/// activations when given.
double loss_and_gradients(const ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                          std::span<const int> labels, ProbeGradients* grads,
                          const Eigen::MatrixXd* dropout_mask = nullptr);

/// Largest relative error between analytic gradients and central finite
/// differences over every parameter. The denominator is max(|a|, |n|, 1e-8).
double gradient_check(const ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                      std::span<const int> labels, double step = 1e-5);

struct TrainConfig {
  int epochs = 100;
  Eigen::Index batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  std::uint64_t seed = 42;
  /// Inverted dropout on the hidden layer, in [0, 1).
  double dropout = 0.0;
};

struct ProbeReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  /// Rows are actual classes, columns predicted classes (validation set).
  Eigen::MatrixXi confusion;
  /// NaN for a class that was never predicted.
  std::vector<double> precision;
  double accuracy = 0.0;
  Eigen::Index train_size = 0;
  Eigen::Index val_size = 0;
};

/// Trains on `train_indices` (rows of `data`, one flattened slice per row) in
/// mini-batches reshuffled every epoch, and evaluates on `val_indices`.
/// Throws std::invalid_argument on misaligned inputs, a class absent from the
/// training rows, or a bad config, and std::runtime_error on a non-finite loss.
ProbeReport train(ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& data, const LabelVector& labels,
                  const std::vector<Eigen::Index>& train_indices, const std::vector<Eigen::Index>& val_indices,
                  const TrainConfig& config);

ProbeReport train(ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& data, const LabelVector& labels,
                  const SplitPlan& split, const TrainConfig& config);

Eigen::MatrixXi confusion_matrix(std::span<const int> predictions, std::span<const int> actuals, int class_count);
std::vector<double> precision_per_class(const Eigen::MatrixXi& confusion);
double accuracy(const Eigen::MatrixXi& confusion);

struct LearnabilityOptions {
  Eigen::Index lookback = 20;
  Eigen::Index hidden_units = 32;
  /// Without biases the network is odd in its input, which cannot separate
  /// "last close is the strict maximum" on zero-mean (standardized) slices.
  bool use_bias = true;
  std::array<double, 3> fractions{0.8, 0.2, 0.0};
  TrainConfig train;
};

/// Close-only slices, scaled per slice with `method` (nullopt keeps raw
/// prices), labeled by each probe condition from unscaled closes, split
/// 80/20 with a full embargo, and fed to a fresh probe per condition.
std::map<ProbeCondition, ProbeReport> run_learnability_suite(const Eigen::Ref<const Eigen::VectorXd>& closes,
                                                             std::optional<ScaleMethod> method,
                                                             const LearnabilityOptions& options = {});

}  // namespace tslab
