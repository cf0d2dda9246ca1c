#include "tslab/probe.hpp"

#include "tslab/random.hpp"
#include "tslab/scaling.hpp"
#include "tslab/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tslab {

namespace {

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = rng.uniform(-limit, limit);
  }
  return w;
}

// Column-wise softmax with the max subtracted for stability.
Eigen::MatrixXd softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = (logits.rowwise() - logits.colwise().maxCoeff()).array().exp().matrix();
  p.array().rowwise() /= p.colwise().sum().array();
  return p;
}

struct Forward {
  Eigen::MatrixXd hidden;  // post-tanh, post-dropout
  Eigen::MatrixXd activation;  // post-tanh, pre-dropout
  Eigen::MatrixXd probs;
};

Forward forward(const ProbeModel& m, const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::MatrixXd* mask) {
  Forward f;
  Eigen::MatrixXd pre = m.w1 * x;
  if (m.use_bias()) pre.colwise() += m.b1;
  f.activation = pre.array().tanh().matrix();
  f.hidden = mask ? Eigen::MatrixXd(f.activation.cwiseProduct(*mask)) : f.activation;
  Eigen::MatrixXd logits = m.w2 * f.hidden;
  if (m.use_bias()) logits.colwise() += m.b2;
  f.probs = softmax(logits);
  return f;
}

double cross_entropy(const Eigen::MatrixXd& probs, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    total -= std::log(std::max(probs(labels[j], static_cast<Eigen::Index>(j)), std::numeric_limits<double>::min()));
  }
  return total / static_cast<double>(labels.size());
}

// Adam moments for one parameter block.
template <typename Param>
struct Moments {
  Param m, v;
  explicit Moments(const Param& like) : m(Param::Zero(like.rows(), like.cols())), v(m) {}
  void step(Param& param, const Param& grad, const TrainConfig& c, double bias1, double bias2) {
    m = c.beta1 * m + (1.0 - c.beta1) * grad;
    v = c.beta2 * v + (1.0 - c.beta2) * grad.cwiseProduct(grad);
    param.array() -= c.learning_rate * (m.array() / bias1) / ((v.array() / bias2).sqrt() + c.epsilon);
  }
};

Eigen::MatrixXd gather_columns(const Eigen::Ref<const Eigen::MatrixXd>& data, std::span<const Eigen::Index> rows) {
  Eigen::MatrixXd x(data.cols(), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) x.col(static_cast<Eigen::Index>(j)) = data.row(rows[j]).transpose();
  return x;
}

std::vector<int> gather_labels(const LabelVector& labels, std::span<const Eigen::Index> rows) {
  std::vector<int> y(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) y[j] = labels.class_of(rows[j]);
  return y;
}

}  // namespace

ProbeModel ProbeModel::create(Eigen::Index input_dim, Eigen::Index hidden_units, int class_count, bool use_bias,
                              std::uint64_t seed) {
  if (input_dim < 1 || hidden_units < 1 || class_count < 2) {
    throw std::invalid_argument("probe model needs input_dim >= 1, hidden_units >= 1, class_count >= 2");
  }
  Rng rng(seed);
  ProbeModel m;
  m.w1 = glorot(hidden_units, input_dim, rng);
  m.w2 = glorot(class_count, hidden_units, rng);
  if (use_bias) {
    m.b1 = Eigen::VectorXd::Zero(hidden_units);
    m.b2 = Eigen::VectorXd::Zero(class_count);
  }
  return m;
}

Eigen::MatrixXd ProbeModel::probabilities(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  if (inputs.rows() != input_dim()) throw std::invalid_argument("probe: input dimension mismatch");
  return forward(*this, inputs, nullptr).probs;
}

std::vector<int> ProbeModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& inputs) const {
  const Eigen::MatrixXd p = probabilities(inputs);
  std::vector<int> out(static_cast<std::size_t>(p.cols()));
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    Eigen::Index best = 0;
    p.col(j).maxCoeff(&best);
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

double loss_and_gradients(const ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                          std::span<const int> labels, ProbeGradients* grads, const Eigen::MatrixXd* dropout_mask) {
  if (inputs.rows() != model.input_dim()) throw std::invalid_argument("probe: input dimension mismatch");
  if (static_cast<Eigen::Index>(labels.size()) != inputs.cols() || labels.empty()) {
    throw std::invalid_argument("probe: label count must equal the (non-zero) batch size");
  }
  for (const int y : labels) {
    if (y < 0 || y >= model.class_count()) throw std::invalid_argument("probe: label out of range");
  }
  const Forward f = forward(model, inputs, dropout_mask);
  const double loss = cross_entropy(f.probs, labels);
  if (!grads) return loss;

  const double batch = static_cast<double>(labels.size());
  Eigen::MatrixXd d_logits = f.probs;
  for (std::size_t j = 0; j < labels.size(); ++j) d_logits(labels[j], static_cast<Eigen::Index>(j)) -= 1.0;
  d_logits /= batch;

  grads->w2 = d_logits * f.hidden.transpose();
  Eigen::MatrixXd d_hidden = model.w2.transpose() * d_logits;
  if (dropout_mask) d_hidden = d_hidden.cwiseProduct(*dropout_mask);
  const Eigen::MatrixXd d_pre = d_hidden.cwiseProduct((1.0 - f.activation.array().square()).matrix());
  grads->w1 = d_pre * inputs.transpose();
  if (model.use_bias()) {
    grads->b2 = d_logits.rowwise().sum();
    grads->b1 = d_pre.rowwise().sum();
  } else {
    grads->b1.resize(0);
    grads->b2.resize(0);
  }
  return loss;
}

double gradient_check(const ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                      std::span<const int> labels, double step) {
  ProbeGradients analytic;
  loss_and_gradients(model, inputs, labels, &analytic);

  ProbeModel probe = model;
  double worst = 0.0;
  auto check_block = [&](auto& param, const auto& grad) {
    for (Eigen::Index i = 0; i < param.size(); ++i) {
      const double saved = param.data()[i];
      param.data()[i] = saved + step;
      const double plus = loss_and_gradients(probe, inputs, labels, nullptr);
      param.data()[i] = saved - step;
      const double minus = loss_and_gradients(probe, inputs, labels, nullptr);
      param.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      const double a = grad.data()[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  };
  check_block(probe.w1, analytic.w1);
  check_block(probe.w2, analytic.w2);
  if (model.use_bias()) {
    check_block(probe.b1, analytic.b1);
    check_block(probe.b2, analytic.b2);
  }
  return worst;
}

ProbeReport train(ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& data, const LabelVector& labels,
                  const std::vector<Eigen::Index>& train_indices, const std::vector<Eigen::Index>& val_indices,
                  const TrainConfig& config) {
  if (!labels.is_classifier()) throw std::invalid_argument("probe needs classifier labels");
  if (labels.class_count != model.class_count()) throw std::invalid_argument("probe: class count mismatch");
  if (labels.size() != data.rows()) throw std::invalid_argument("probe: labels and data are not aligned");
  if (data.cols() != model.input_dim()) throw std::invalid_argument("probe: input dimension mismatch");
  if (config.epochs < 1) throw std::invalid_argument("probe: epochs must be at least 1");
  if (config.batch_size < 1 || config.batch_size > static_cast<Eigen::Index>(train_indices.size())) {
    throw std::invalid_argument("probe: batch size must be in [1, training-set size]");
  }
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw std::invalid_argument("probe: dropout must be in [0, 1)");
  for (const auto idx : train_indices) {
    if (idx < 0 || idx >= data.rows()) throw std::invalid_argument("probe: train index out of range");
  }
  for (const auto idx : val_indices) {
    if (idx < 0 || idx >= data.rows()) throw std::invalid_argument("probe: validation index out of range");
  }
  {
    std::vector<char> present(static_cast<std::size_t>(labels.class_count), 0);
    for (const auto idx : train_indices) present[static_cast<std::size_t>(labels.class_of(idx))] = 1;
    for (int c = 0; c < labels.class_count; ++c) {
      if (!present[static_cast<std::size_t>(c)]) {
        throw std::invalid_argument("probe: class " + std::to_string(c) + " absent from the training set");
      }
    }
  }

  Rng rng(config.seed);
  Moments<Eigen::MatrixXd> mw1(model.w1), mw2(model.w2);
  Moments<Eigen::VectorXd> mb1(model.b1), mb2(model.b2);
  const Eigen::MatrixXd val_x = gather_columns(data, val_indices);
  const std::vector<int> val_y = gather_labels(labels, val_indices);
  const double keep = 1.0 - config.dropout;

  ProbeReport report;
  report.train_size = static_cast<Eigen::Index>(train_indices.size());
  report.val_size = static_cast<Eigen::Index>(val_indices.size());
  std::vector<Eigen::Index> order = train_indices;
  ProbeGradients grads;
  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min(order.size() - start, static_cast<std::size_t>(config.batch_size));
      const std::span<const Eigen::Index> rows(order.data() + start, len);
      const Eigen::MatrixXd x = gather_columns(data, rows);
      const std::vector<int> y = gather_labels(labels, rows);

      Eigen::MatrixXd mask;
      if (config.dropout > 0.0) {
        mask.resize(model.hidden_units(), static_cast<Eigen::Index>(len));
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
      }
      const double loss = loss_and_gradients(model, x, y, &grads, config.dropout > 0.0 ? &mask : nullptr);
      if (!std::isfinite(loss)) throw std::runtime_error("probe: non-finite loss at epoch " + std::to_string(epoch + 1));
      epoch_loss += loss * static_cast<double>(len);

      ++step;
      const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      mw1.step(model.w1, grads.w1, config, bias1, bias2);
      mw2.step(model.w2, grads.w2, config, bias1, bias2);
      if (model.use_bias()) {
        mb1.step(model.b1, grads.b1, config, bias1, bias2);
        mb2.step(model.b2, grads.b2, config, bias1, bias2);
      }
    }
    report.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    if (!val_y.empty()) {
      const double vloss = loss_and_gradients(model, val_x, val_y, nullptr);
      if (!std::isfinite(vloss)) {
        throw std::runtime_error("probe: non-finite validation loss at epoch " + std::to_string(epoch + 1));
      }
      report.val_loss.push_back(vloss);
    }
  }
  model.trained = true;

  const std::vector<int> predicted = val_y.empty() ? std::vector<int>{} : model.predict(val_x);
  report.confusion = confusion_matrix(predicted, val_y, model.class_count());
  report.precision = precision_per_class(report.confusion);
  report.accuracy = accuracy(report.confusion);
  return report;
}

ProbeReport train(ProbeModel& model, const Eigen::Ref<const Eigen::MatrixXd>& data, const LabelVector& labels,
                  const SplitPlan& split, const TrainConfig& config) {
  return train(model, data, labels, split.train_order, split.val_indices, config);
}

Eigen::MatrixXi confusion_matrix(std::span<const int> predictions, std::span<const int> actuals, int class_count) {
  if (predictions.size() != actuals.size()) throw std::invalid_argument("confusion_matrix: length mismatch");
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(class_count, class_count);
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    if (actuals[i] < 0 || actuals[i] >= class_count || predictions[i] < 0 || predictions[i] >= class_count) {
      throw std::invalid_argument("confusion_matrix: class out of range");
    }
    ++m(actuals[i], predictions[i]);
  }
  return m;
}

std::vector<double> precision_per_class(const Eigen::MatrixXi& confusion) {
  std::vector<double> out(static_cast<std::size_t>(confusion.cols()));
  for (Eigen::Index c = 0; c < confusion.cols(); ++c) {
    const int predicted = confusion.col(c).sum();
    out[static_cast<std::size_t>(c)] = predicted == 0 ? std::numeric_limits<double>::quiet_NaN()
                                                      : static_cast<double>(confusion(c, c)) / predicted;
  }
  return out;
}

double accuracy(const Eigen::MatrixXi& confusion) {
  const int total = confusion.sum();
  return total == 0 ? 0.0 : static_cast<double>(confusion.trace()) / total;
}

std::map<ProbeCondition, ProbeReport> run_learnability_suite(const Eigen::Ref<const Eigen::VectorXd>& closes,
                                                             std::optional<ScaleMethod> method,
                                                             const LearnabilityOptions& options) {
  SliceSpec spec;
  spec.lookback = options.lookback;
  spec.channels = {"close"};
  // The first slice must end where every condition has its history (index 9).
  spec.first_start = std::max<Eigen::Index>(0, 10 - options.lookback);
  SliceTensor slices = make_slices({Eigen::VectorXd(closes)}, spec);
  if (method) {
    ScalerConfig scaler;
    scaler.method = *method;
    scaler.overlaid = {"close"};
    slices = scale_slices(slices, scaler);
  }
  const Eigen::MatrixXd data = flatten(slices);
  const SplitPlan split = split_then_shuffle(slices.slice_count(), options.fractions, options.train.seed, spec,
                                             auto_embargo(spec));

  std::map<ProbeCondition, ProbeReport> reports;
  for (const auto condition : {ProbeCondition::close_above_close5, ProbeCondition::close_above_ema5,
                               ProbeCondition::close_above_hc10}) {
    const LabelVector labels = label_probe_conditions(closes, slices.end_indices(), condition);
    ProbeModel model =
        ProbeModel::create(data.cols(), options.hidden_units, 2, options.use_bias, options.train.seed + 1);
    reports.emplace(condition, train(model, data, labels, split, options.train));
  }
  return reports;
}

}  // namespace tslab
