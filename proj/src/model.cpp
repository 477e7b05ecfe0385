#include "fedcov/model.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "fedcov/rng.hpp"

namespace fedcov {

namespace {

void check_dims(const ParamVector& params, const Dataset& data) {
  if (data.features.cols() != params.spec.input_dim)
    throw ConfigError("dataset feature width does not match model input_dim");
  if (data.labels.size() != data.features.rows())
    throw ConfigError("dataset labels/features row count mismatch");
}

// Forward pass for a row block. Returns softmax probabilities.
Matrix forward_probs(const ParamVector& params, const Matrix& x,
                     Matrix* hidden_out = nullptr) {
  const auto w1 = params.w1();
  const auto w2 = params.w2();
  Matrix h = ((x * w1).rowwise() + params.b1().transpose()).array().tanh();
  Matrix logits = (h * w2).rowwise() + params.b2().transpose();
  // Row-stable softmax.
  Vector row_max = logits.rowwise().maxCoeff();
  Matrix p = (logits.colwise() - row_max).array().exp();
  Vector row_sum = p.rowwise().sum();
  p.array().colwise() /= row_sum.array();
  if (hidden_out) *hidden_out = std::move(h);
  return p;
}

// Mean-gradient of softmax cross-entropy over the given rows.
Vector batch_gradient(const ParamVector& params, const Matrix& x,
                      const Eigen::VectorXi& y) {
  const Index batch = x.rows();
  Matrix h;
  Matrix dz2 = forward_probs(params, x, &h);  // starts as probabilities
  for (Index i = 0; i < batch; ++i) dz2(i, y[i]) -= 1.0;
  dz2 /= static_cast<double>(batch);

  const auto w2 = params.w2();
  Matrix gw2 = h.transpose() * dz2;
  Vector gb2 = dz2.colwise().sum();
  Matrix dh = dz2 * w2.transpose();
  Matrix dz1 = dh.array() * (1.0 - h.array().square());
  Matrix gw1 = x.transpose() * dz1;
  Vector gb1 = dz1.colwise().sum();

  Vector grad(params.size());
  const ModelSpec& s = params.spec;
  Eigen::Map<RowMajorMatrix>(grad.data() + params.w1_offset(), s.input_dim,
                             s.hidden_dim) = gw1;
  grad.segment(params.b1_offset(), s.hidden_dim) = gb1;
  Eigen::Map<RowMajorMatrix>(grad.data() + params.w2_offset(), s.hidden_dim,
                             s.num_classes) = gw2;
  grad.segment(params.b2_offset(), s.num_classes) = gb2;
  return grad;
}

}  // namespace

Dataset generate_dataset(const ModelSpec& spec, Index samples_per_class,
                         double cluster_spread, std::uint64_t seed) {
  spec.validate();
  if (samples_per_class < 1)
    throw ConfigError("generate_dataset: samples_per_class must be >= 1");

  SplitMix64 rng(seed);
  Matrix means(spec.num_classes, spec.input_dim);
  for (Index k = 0; k < spec.num_classes; ++k)
    for (Index d = 0; d < spec.input_dim; ++d)
      means(k, d) = rng.next_uniform(-1.0, 1.0);

  Dataset out;
  out.seed = seed;
  const Index n = spec.num_classes * samples_per_class;
  out.features.resize(n, spec.input_dim);
  out.labels.resize(n);
  Index row = 0;
  for (Index k = 0; k < spec.num_classes; ++k) {
    for (Index i = 0; i < samples_per_class; ++i, ++row) {
      for (Index d = 0; d < spec.input_dim; ++d)
        out.features(row, d) = means(k, d) + cluster_spread * rng.next_gaussian();
      out.labels[row] = static_cast<int>(k);
    }
  }
  return out;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  SplitMix64 rng(seed);
  ParamVector p = ParamVector::zeros(spec);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(spec.input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
  for (Index i = 0; i < spec.input_dim * spec.hidden_dim; ++i)
    p.values[p.w1_offset() + i] = rng.next_uniform(-s1, s1);
  for (Index i = 0; i < spec.hidden_dim * spec.num_classes; ++i)
    p.values[p.w2_offset() + i] = rng.next_uniform(-s2, s2);
  return p;
}

ParamVector train_local(const ParamVector& params, const Dataset& data,
                        const TrainOptions& opts, std::uint64_t seed) {
  check_dims(params, data);
  if (opts.epochs < 0 || opts.learning_rate < 0 || opts.batch_size < 1)
    throw ConfigError("train_local: invalid training options");

  ParamVector out = params;
  const Index n = data.num_samples();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  SplitMix64 rng(seed);

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    // Fisher-Yates on the seeded stream.
    for (Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (Index start = 0; start < n; start += opts.batch_size) {
      const Index len = std::min(opts.batch_size, n - start);
      Matrix xb(len, data.input_dim());
      Eigen::VectorXi yb(len);
      for (Index r = 0; r < len; ++r) {
        xb.row(r) = data.features.row(order[static_cast<std::size_t>(start + r)]);
        yb[r] = data.labels[order[static_cast<std::size_t>(start + r)]];
      }
      out.values -= opts.learning_rate * batch_gradient(out, xb, yb);
    }
  }
  return out;
}

double cross_entropy_loss(const ParamVector& params, const Dataset& data) {
  check_dims(params, data);
  if (data.num_samples() == 0)
    throw ConfigError("cross_entropy_loss: empty dataset");
  Matrix p = forward_probs(params, data.features);
  double loss = 0.0;
  for (Index i = 0; i < data.num_samples(); ++i)
    loss -= std::log(std::max(p(i, data.labels[i]), 1e-300));
  return loss / static_cast<double>(data.num_samples());
}

Vector loss_gradient(const ParamVector& params, const Dataset& data) {
  check_dims(params, data);
  if (data.num_samples() == 0)
    throw ConfigError("loss_gradient: empty dataset");
  return batch_gradient(params, data.features, data.labels);
}

double evaluate(const ParamVector& params, const Dataset& data) {
  check_dims(params, data);
  if (data.num_samples() == 0) throw ConfigError("evaluate: empty dataset");
  const auto w1 = params.w1();
  const auto w2 = params.w2();
  Matrix h = ((data.features * w1).rowwise() + params.b1().transpose()).array().tanh();
  Matrix logits = (h * w2).rowwise() + params.b2().transpose();
  Index correct = 0;
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;  // ties keep lowest index
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace fedcov
