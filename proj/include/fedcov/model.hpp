#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "fedcov/errors.hpp"

namespace fedcov {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

/// Architecture of the one-hidden-layer tanh classifier. The flat parameter
/// layout is fixed as [W1 row-major, b1, W2 row-major, b2] so that flat
/// indices mean the same thing in every run and every implementation.
struct ModelSpec {
  Index input_dim = 0;
  Index hidden_dim = 0;
  Index num_classes = 0;

  Index parameter_count() const {
    return input_dim * hidden_dim + hidden_dim + hidden_dim * num_classes +
           num_classes;
  }

  bool operator==(const ModelSpec&) const = default;

  void validate() const {
    if (input_dim < 1 || hidden_dim < 1 || num_classes < 2)
      throw ConfigError("ModelSpec requires input_dim>=1, hidden_dim>=1, "
                        "num_classes>=2");
  }
};

/// Flat parameter vector tied to the spec it was built from.
struct ParamVector {
  ModelSpec spec;
  Vector values;

  ParamVector() = default;
  ParamVector(ModelSpec s, Vector v) : spec(s), values(std::move(v)) {
    if (values.size() != spec.parameter_count())
      throw ConfigError("ParamVector length does not match spec");
  }

  static ParamVector zeros(ModelSpec s) {
    return ParamVector(s, Vector::Zero(s.parameter_count()));
  }

  Index size() const { return values.size(); }

  // Layout segment offsets.
  Index w1_offset() const { return 0; }
  Index b1_offset() const { return spec.input_dim * spec.hidden_dim; }
  Index w2_offset() const { return b1_offset() + spec.hidden_dim; }
  Index b2_offset() const { return w2_offset() + spec.hidden_dim * spec.num_classes; }

  Eigen::Map<const RowMajorMatrix> w1() const {
    return {values.data() + w1_offset(), spec.input_dim, spec.hidden_dim};
  }
  Eigen::Map<const RowMajorMatrix> w2() const {
    return {values.data() + w2_offset(), spec.hidden_dim, spec.num_classes};
  }
  Eigen::Map<const Vector> b1() const {
    return {values.data() + b1_offset(), spec.hidden_dim};
  }
  Eigen::Map<const Vector> b2() const {
    return {values.data() + b2_offset(), spec.num_classes};
  }

  bool all_finite() const { return values.allFinite(); }
};

/// Synthetic labelled data: one Gaussian cluster per class.
struct Dataset {
  Matrix features;          // num_samples x input_dim
  Eigen::VectorXi labels;   // class index per row
  std::uint64_t seed = 0;

  Index num_samples() const { return features.rows(); }
  Index input_dim() const { return features.cols(); }
};

/// Gaussian-blob dataset: class means uniform in [-1,1]^d, per-sample spread
/// around the mean. Deterministic in (spec, samples_per_class, spread, seed).
Dataset generate_dataset(const ModelSpec& spec, Index samples_per_class,
                         double cluster_spread, std::uint64_t seed);

/// Uniform init scaled by 1/sqrt(fan_in); biases zero.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

struct TrainOptions {
  int epochs = 1;
  double learning_rate = 0.1;
  Index batch_size = 32;
};

/// Mini-batch SGD on softmax cross-entropy. Returns the updated parameters;
/// the input is untouched. Deterministic per seed (seed drives shuffling).
ParamVector train_local(const ParamVector& params, const Dataset& data,
                        const TrainOptions& opts, std::uint64_t seed);

/// Mean softmax cross-entropy over the dataset.
double cross_entropy_loss(const ParamVector& params, const Dataset& data);

/// Analytic gradient of cross_entropy_loss, flattened in parameter layout.
Vector loss_gradient(const ParamVector& params, const Dataset& data);

/// Fraction of argmax-correct predictions; logit ties break toward the
/// lowest class index. Empty dataset is a configuration error.
double evaluate(const ParamVector& params, const Dataset& data);

}  // namespace fedcov
