/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedmod/corpus.hpp"
#include "fedmod/textproc.hpp"

namespace fedmod {

enum class TrainerKind : std::uint8_t { logistic = 0, hinge = 1 };

std::string_view to_string(TrainerKind k);
TrainerKind trainer_from_string(std::string_view s);

/// Full-batch gradient descent settings.
///
/// The defaults are stable for bag-of-words counts with up to roughly 25
/// tokens per toot: the logistic objective's curvature is bounded by
/// 0.25 * mean squared feature norm + l2_lambda, and 0.1 stays below the 2/L
/// step limit there, which makes the per-epoch loss non-increasing.
struct TrainConfig {
  double learning_rate = 0.1;
  std::uint32_t epochs = 200;
  double l2_lambda = 1e-4;
  std::uint64_t seed = 0;
  /// Training stops once |loss(t) - loss(t-1)| falls below this. 0 disables.
  double convergence_tol = 1e-6;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// One bag-of-words training example. label_sign is +1 for toxic, -1 otherwise.
struct Example {
  SparseVector features;
  double label_sign = 1.0;
};

std::vector<Example> make_examples(std::span<const Toot> toots, const Vocabulary& vocab,
                                   const TokenizerOptions& options = {});

/// The exchanged moderation model: vocabulary, one weight per term, bias.
class LinearModel {
 public:
  LinearModel() = default;
  LinearModel(Vocabulary vocab, TrainerKind trainer, TrainConfig config, std::string origin);

  const Vocabulary& vocabulary() const { return vocab_; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> mutable_weights() { return weights_; }
  double bias() const { return bias_; }
  void set_bias(double b) { bias_ = b; }
  TrainerKind trainer() const { return trainer_; }
  const TrainConfig& train_config() const { return config_; }
  const std::string& origin_instance() const { return origin_; }

  /// w . x + b.
  double margin(const SparseVector& x) const;
  /// sigmoid(margin), in (0, 1) for finite margins.
  double score(const SparseVector& x) const;
  Label predict(const SparseVector& x) const;

  /// Length in bytes of the canonical serialized form.
  std::size_t size_bytes() const;

  bool operator==(const LinearModel&) const = default;

 private:
  friend LinearModel deserialize_model(std::string_view bytes);

  Vocabulary vocab_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  TrainerKind trainer_ = TrainerKind::logistic;
  TrainConfig config_;
  std::string origin_;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> weight_gradient;
  double bias_gradient = 0.0;
};

/// Mean regularized loss over `batch` and its exact (sub)gradient.
/// logistic: mean log(1 + exp(-y z)); hinge: mean max(0, 1 - y z); both
/// plus l2/2 * |w|^2. The bias is not regularized.
LossAndGradient loss_and_gradient(const LinearModel& model, std::span<const Example> batch);
double mean_loss(const LinearModel& model, std::span<const Example> batch);

struct TrainHistory {
  std::vector<double> losses;  ///< losses[0] is the initial loss, then one per epoch run.
  std::uint32_t epochs_run = 0;
  bool converged = false;
};

/// Throws DegenerateTrainingError for single-class sets or an empty
/// vocabulary and NumericError if the loss becomes non-finite.
LinearModel train(std::span<const Example> batch, const Vocabulary& vocab, TrainerKind kind,
                  const TrainConfig& cfg, std::string origin = {}, TrainHistory* history = nullptr);

LinearModel train(std::span<const Toot> train_set, const Vocabulary& vocab, TrainerKind kind,
                  const TrainConfig& cfg, std::string origin = {}, TrainHistory* history = nullptr,
                  const TokenizerOptions& options = {});

double predict_score(const LinearModel& model, const Toot& toot, const TokenizerOptions& options = {});
Label predict_label(const LinearModel& model, const Toot& toot, const TokenizerOptions& options = {});

/// Canonical binary form; deserialize(serialize(m)) == m bit-for-bit.
std::string serialize_model(const LinearModel& model);
LinearModel deserialize_model(std::string_view bytes);

}  // namespace fedmod
