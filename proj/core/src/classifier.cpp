/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/classifier.hpp"

#include <cmath>
#include <map>

#include "codec.hpp"
#include "fedmod/errors.hpp"

namespace fedmod {

std::string_view to_string(TrainerKind k) { return k == TrainerKind::logistic ? "logistic" : "hinge"; }

TrainerKind trainer_from_string(std::string_view s) {
  if (s == "logistic") return TrainerKind::logistic;
  if (s == "hinge" || s == "svm") return TrainerKind::hinge;
  throw DomainError("unknown trainer \"" + std::string(s) + "\" (expected logistic or hinge)");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning_rate must be positive");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) throw DomainError("l2_lambda must be nonnegative");
  if (!(convergence_tol >= 0.0)) throw DomainError("convergence_tol must be nonnegative");
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(m)) without overflow.
double softplus(double m) {
  if (m > 0.0) return m + std::log1p(std::exp(-m));
  return std::log1p(std::exp(m));
}

double dot(std::span<const double> w, const SparseVector& x) {
  double z = 0.0;
  for (const auto& [i, v] : x.entries) z += w[i] * v;
  return z;
}

}  // namespace

std::vector<Example> make_examples(std::span<const Toot> toots, const Vocabulary& vocab,
                                   const TokenizerOptions& options) {
  std::vector<Example> out;
  out.reserve(toots.size());
  for (const Toot& t : toots) {
    if (!t.label) throw DegenerateTrainingError("toot " + t.id + " is unlabeled");
    out.push_back({bow_vector(t, vocab, options), *t.label == Label::toxic ? 1.0 : -1.0});
  }
  return out;
}

// ---------------------------------------------------------------- model

LinearModel::LinearModel(Vocabulary vocab, TrainerKind trainer, TrainConfig config, std::string origin)
    : vocab_(std::move(vocab)),
      weights_(vocab_.size(), 0.0),
      trainer_(trainer),
      config_(config),
      origin_(std::move(origin)) {}

double LinearModel::margin(const SparseVector& x) const { return dot(weights_, x) + bias_; }

double LinearModel::score(const SparseVector& x) const { return sigmoid(margin(x)); }

Label LinearModel::predict(const SparseVector& x) const {
  return score(x) > 0.5 ? Label::toxic : Label::non_toxic;
}

std::size_t LinearModel::size_bytes() const {
  std::size_t n = 4 + 4 + 1 + (4 + origin_.size()) + (8 + 4 + 8 + 8 + 8) + 8 + 8 + 8;
  for (const auto& t : vocab_.terms()) n += 4 + t.size() + 8 + 8;
  return n;
}

double predict_score(const LinearModel& model, const Toot& toot, const TokenizerOptions& options) {
  return model.score(bow_vector(toot, model.vocabulary(), options));
}

Label predict_label(const LinearModel& model, const Toot& toot, const TokenizerOptions& options) {
  return model.predict(bow_vector(toot, model.vocabulary(), options));
}

// ------------------------------------------------------------- training

LossAndGradient loss_and_gradient(const LinearModel& model, std::span<const Example> batch) {
  LossAndGradient out;
  const auto w = model.weights();
  out.weight_gradient.assign(w.size(), 0.0);
  if (batch.empty()) throw DomainError("loss over an empty batch");

  const bool logistic = model.trainer() == TrainerKind::logistic;
  double loss = 0.0;
  double bias_grad = 0.0;
  for (const Example& ex : batch) {
    const double y = ex.label_sign;
    const double z = dot(w, ex.features) + model.bias();
    double dz;  // d loss_i / d z
    if (logistic) {
      loss += softplus(-y * z);
      dz = -y * sigmoid(-y * z);
    } else {
      const double slack = 1.0 - y * z;
      loss += slack > 0.0 ? slack : 0.0;
      dz = slack > 0.0 ? -y : 0.0;
    }
    if (dz != 0.0) {
      for (const auto& [i, v] : ex.features.entries) out.weight_gradient[i] += dz * v;
      bias_grad += dz;
    }
  }

  const double inv_m = 1.0 / static_cast<double>(batch.size());
  const double lambda = model.train_config().l2_lambda;
  double sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sq += w[i] * w[i];
    out.weight_gradient[i] = out.weight_gradient[i] * inv_m + lambda * w[i];
  }
  out.loss = loss * inv_m + 0.5 * lambda * sq;
  out.bias_gradient = bias_grad * inv_m;
  return out;
}

double mean_loss(const LinearModel& model, std::span<const Example> batch) {
  return loss_and_gradient(model, batch).loss;
}

LinearModel train(std::span<const Example> batch, const Vocabulary& vocab, TrainerKind kind,
                  const TrainConfig& cfg, std::string origin, TrainHistory* history) {
  cfg.validate();
  if (vocab.empty()) throw DegenerateTrainingError("cannot train on an empty vocabulary");
  bool has_pos = false, has_neg = false;
  for (const Example& ex : batch) (ex.label_sign > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DegenerateTrainingError("training set must contain both classes");

  LinearModel model(vocab, kind, cfg, std::move(origin));
  TrainHistory local;
  TrainHistory& h = history ? *history : local;
  h = {};

  LossAndGradient lg = loss_and_gradient(model, batch);
  h.losses.push_back(lg.loss);
  for (std::uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto w = model.mutable_weights();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * lg.weight_gradient[i];
    model.set_bias(model.bias() - cfg.learning_rate * lg.bias_gradient);

    const double prev = lg.loss;
    lg = loss_and_gradient(model, batch);
    if (!std::isfinite(lg.loss)) {
      throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
    }
    h.losses.push_back(lg.loss);
    h.epochs_run = epoch;
    if (cfg.convergence_tol > 0.0 && std::abs(prev - lg.loss) < cfg.convergence_tol) {
      h.converged = true;
      break;
    }
  }
  return model;
}

LinearModel train(std::span<const Toot> train_set, const Vocabulary& vocab, TrainerKind kind,
                  const TrainConfig& cfg, std::string origin, TrainHistory* history,
                  const TokenizerOptions& options) {
  const auto examples = make_examples(train_set, vocab, options);
  return train(examples, vocab, kind, cfg, std::move(origin), history);
}

// -------------------------------------------------------- serialization

namespace {
constexpr std::string_view kModelMagic = "FMLM";
constexpr std::uint32_t kModelFormat = 1;
}  // namespace

std::string serialize_model(const LinearModel& m) {
  detail::ByteWriter w;
  w.magic(kModelMagic);
  w.u32(kModelFormat);
  w.u8(static_cast<std::uint8_t>(m.trainer()));
  w.str(m.origin_instance());
  const TrainConfig& c = m.train_config();
  w.f64(c.learning_rate);
  w.u32(c.epochs);
  w.f64(c.l2_lambda);
  w.u64(c.seed);
  w.f64(c.convergence_tol);
  const Vocabulary& v = m.vocabulary();
  w.u64(v.document_count());
  w.u64(v.size());
  const auto weights = m.weights();
  for (std::size_t i = 0; i < v.size(); ++i) {
    w.str(v.term(i));
    w.u64(v.document_frequency(i));
    w.f64(weights[i]);
  }
  w.f64(m.bias());
  return std::move(w).take();
}

LinearModel deserialize_model(std::string_view bytes) {
  detail::ByteReader r(bytes, "model");
  r.expect_magic(kModelMagic);
  if (r.u32() != kModelFormat) r.fail("unsupported format version");
  const std::uint8_t kind = r.u8();
  if (kind > 1) r.fail("unknown trainer kind");
  std::string origin = r.str();
  TrainConfig c;
  c.learning_rate = r.f64();
  c.epochs = r.u32();
  c.l2_lambda = r.f64();
  c.seed = r.u64();
  c.convergence_tol = r.f64();
  const std::uint64_t docs = r.u64();
  const std::uint64_t n = r.u64();

  std::map<std::string, std::uint64_t> df;
  std::vector<double> weights;
  weights.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(n, bytes.size())));
  std::string prev;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string term = r.str();
    const std::uint64_t d = r.u64();
    const double wt = r.f64();
    if (i > 0 && !(prev < term)) r.fail("vocabulary not strictly ascending");
    if (d < 1 || d > docs) r.fail("document frequency outside [1, n]");
    if (!std::isfinite(wt)) r.fail("non-finite weight");
    prev = term;
    df.emplace_hint(df.end(), std::move(term), d);
    weights.push_back(wt);
  }
  const double bias = r.f64();
  if (!std::isfinite(bias)) r.fail("non-finite bias");
  r.expect_end();

  LinearModel m(Vocabulary::from_counts(std::move(df), docs), static_cast<TrainerKind>(kind), c, std::move(origin));
  m.weights_ = std::move(weights);
  m.bias_ = bias;
  return m;
}

}  // namespace fedmod
