/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <cmath>

#include "builders.hpp"
#include "fedmod/classifier.hpp"
#include "fedmod/errors.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace fedmod {
namespace {

using testing::hinge_kink_nearby;
using testing::max_relative_gradient_error;
using testing::random_batch;
using testing::random_model;
using testing::toot;
using testing::vocab_of;

TEST(Loss, ZeroModelBalancedBatchIsLn2) {
  LinearModel m(vocab_of(3), TrainerKind::logistic, {}, "a");
  std::vector<Example> batch = {{{{{0, 1.0}}}, 1.0}, {{{{1, 2.0}}}, -1.0}};
  EXPECT_NEAR(loss_and_gradient(m, batch).loss, 0.693147, 1e-6);
  EXPECT_NEAR(mean_loss(m, batch), std::log(2.0), 1e-15);
}

TEST(Loss, EmptyFeaturesGiveBiasOnlyGradient) {
  TrainConfig cfg;
  cfg.l2_lambda = 0.0;
  LinearModel m(vocab_of(4), TrainerKind::logistic, cfg, "a");
  m.mutable_weights()[2] = 1.5;
  std::vector<Example> batch = {{{}, 1.0}, {{}, 1.0}, {{}, -1.0}};
  const auto g = loss_and_gradient(m, batch);
  for (double x : g.weight_gradient) EXPECT_EQ(x, 0.0);
  EXPECT_NE(g.bias_gradient, 0.0);
}

TEST(Loss, MatchesIndependentOracle) {
  Rng rng(17);
  for (auto kind : {TrainerKind::logistic, TrainerKind::hinge}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto m = random_model(rng, 6, kind, 0.01);
      const auto batch = random_batch(rng, 6, 15);
      std::vector<double> w(m.weights().begin(), m.weights().end());
      EXPECT_NEAR(mean_loss(m, batch), oracle::loss(kind, w, m.bias(), 0.01, batch), 1e-12);
    }
  }
}

TEST(Gradient, MatchesCentralDifferences) {
  Rng rng(99);
  for (auto kind : {TrainerKind::logistic, TrainerKind::hinge}) {
    int checked = 0;
    while (checked < 20) {
      const auto m = random_model(rng, 1 + rng.below(8), kind, rng.uniform() < 0.5 ? 0.0 : 0.05);
      const auto batch = random_batch(rng, m.vocabulary().size(), 1 + rng.below(30));
      if (kind == TrainerKind::hinge && hinge_kink_nearby(m, batch)) continue;
      EXPECT_LT(max_relative_gradient_error(m, batch), 1e-4) << to_string(kind) << " trial " << checked;
      ++checked;
    }
  }
}

std::vector<Toot> separable() {
  std::vector<Toot> out;
  for (int i = 0; i < 10; ++i) {
    out.push_back(toot("p" + std::to_string(i), "xx", Label::toxic));
    out.push_back(toot("n" + std::to_string(i), "yy", Label::non_toxic));
  }
  return out;
}

TEST(Train, SeparableToySetIsLearned) {
  const auto toots = separable();
  const auto v = build_vocabulary(toots, 1);
  for (auto kind : {TrainerKind::logistic, TrainerKind::hinge}) {
    const auto m = train(toots, v, kind, {});
    for (const auto& t : toots) EXPECT_EQ(predict_label(m, t), *t.label) << to_string(kind);
  }
}

TEST(Train, ZeroEpochsIsInitialization) {
  const auto toots = separable();
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto m = train(toots, build_vocabulary(toots, 1), TrainerKind::logistic, cfg);
  for (double w : m.weights()) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(m.bias(), 0.0);
  EXPECT_EQ(predict_score(m, toots[0]), 0.5);
}

TEST(Train, DeterministicBytes) {
  Rng rng(5);
  std::vector<Toot> toots;
  for (int i = 0; i < 80; ++i) {
    toots.push_back(toot(std::to_string(i), testing::random_text(rng, 2, 10), i % 3 ? Label::non_toxic : Label::toxic));
  }
  const auto v = build_vocabulary(toots, 2);
  EXPECT_EQ(serialize_model(train(toots, v, TrainerKind::logistic, {})),
            serialize_model(train(toots, v, TrainerKind::logistic, {})));
}

TEST(Train, DegenerateInputs) {
  auto one_class = separable();
  std::erase_if(one_class, [](const Toot& t) { return *t.label == Label::non_toxic; });
  const auto v = build_vocabulary(separable(), 1);
  EXPECT_THROW(train(one_class, v, TrainerKind::logistic, {}), DegenerateTrainingError);
  EXPECT_THROW(train(separable(), Vocabulary{}, TrainerKind::logistic, {}), DegenerateTrainingError);
  TrainConfig bad;
  bad.learning_rate = 0.0;
  EXPECT_THROW(train(separable(), v, TrainerKind::logistic, bad), DomainError);
}

TEST(Train, DivergenceNamesEpoch) {
  // A huge step on large counts overflows the margins.
  std::vector<Toot> toots;
  std::string loud;
  for (int i = 0; i < 200; ++i) loud += "xx ";
  toots.push_back(toot("1", loud, Label::toxic));
  toots.push_back(toot("2", "yy " + loud, Label::non_toxic));
  TrainConfig cfg;
  cfg.learning_rate = 1e300;
  cfg.l2_lambda = 1.0;
  try {
    train(toots, build_vocabulary(toots, 1), TrainerKind::logistic, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Train, LossNonIncreasingAtDefaultConfig) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Toot> toots;
    for (int i = 0; i < 120; ++i) {
      const bool tox = rng.uniform() < 0.3;
      toots.push_back(toot(std::to_string(i), testing::random_text(rng, 5, 25, 16) + (tox ? " zap" : ""),
                           tox ? Label::toxic : Label::non_toxic));
    }
    TrainHistory h;
    train(toots, build_vocabulary(toots, 1), TrainerKind::logistic, {}, "a", &h);
    ASSERT_EQ(h.losses.size(), h.epochs_run + 1u);
    for (std::size_t i = 1; i < h.losses.size(); ++i) EXPECT_LE(h.losses[i], h.losses[i - 1]) << "epoch " << i;
  }
}

TEST(Train, ConvergenceStopsEarly) {
  const auto toots = separable();
  TrainConfig cfg;
  cfg.epochs = 100000;
  cfg.convergence_tol = 1e-4;
  TrainHistory h;
  train(toots, build_vocabulary(toots, 1), TrainerKind::logistic, cfg, "a", &h);
  EXPECT_TRUE(h.converged);
  EXPECT_LT(h.epochs_run, 100000u);
}

TEST(Train, DuplicatingExamplesKeepsWeights) {
  Rng rng(3);
  std::vector<Toot> toots;
  for (int i = 0; i < 50; ++i) {
    toots.push_back(toot(std::to_string(i), testing::random_text(rng, 2, 8), i % 4 ? Label::non_toxic : Label::toxic));
  }
  auto doubled = toots;
  doubled.insert(doubled.end(), toots.begin(), toots.end());
  const auto v = build_vocabulary(toots, 1);
  const auto a = train(toots, v, TrainerKind::logistic, {});
  const auto b = train(doubled, v, TrainerKind::logistic, {});
  for (std::size_t i = 0; i < a.weights().size(); ++i) EXPECT_NEAR(a.weights()[i], b.weights()[i], 1e-12);
  EXPECT_NEAR(a.bias(), b.bias(), 1e-12);
}

TEST(Predict, ScoresAndStrictRule) {
  LinearModel m(vocab_of(2), TrainerKind::logistic, {}, "a");
  EXPECT_EQ(m.score({}), 0.5);
  EXPECT_EQ(m.predict({}), Label::non_toxic);
  m.set_bias(2.0);
  EXPECT_NEAR(m.score({}), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  m.mutable_weights()[0] = 1e6;
  const double s = m.score({{{0, 1.0}}});
  EXPECT_GT(s, 0.999999);
  EXPECT_LE(s, 1.0);
  m.mutable_weights()[0] = -1e6;
  EXPECT_GE(m.score({{{0, 1.0}}}), 0.0);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    m.set_bias(rng.normal() * 10);
    const double sc = m.score({});
    EXPECT_GT(sc, 0.0);
    EXPECT_LT(sc, 1.0);
    EXPECT_EQ(m.predict({}), sc > 0.5 ? Label::toxic : Label::non_toxic);
  }
}

TEST(ModelCodec, RoundTripBitExact) {
  Rng rng(12);
  for (auto kind : {TrainerKind::logistic, TrainerKind::hinge}) {
    auto m = random_model(rng, 40, kind, 1e-3);
    m.mutable_weights()[3] = -0.0;
    m.mutable_weights()[4] = std::nextafter(0.0, 1.0);
    const std::string bytes = serialize_model(m);
    const auto back = deserialize_model(bytes);
    EXPECT_EQ(serialize_model(back), bytes);
    EXPECT_EQ(back.vocabulary(), m.vocabulary());
    EXPECT_EQ(back.trainer(), kind);
    EXPECT_EQ(back.origin_instance(), "a");
    EXPECT_EQ(back.train_config(), m.train_config());
    for (std::size_t i = 0; i < m.weights().size(); ++i) {
      EXPECT_EQ(std::signbit(back.weights()[i]), std::signbit(m.weights()[i]));
      EXPECT_EQ(back.weights()[i], m.weights()[i]);
    }
    EXPECT_EQ(m.size_bytes(), bytes.size());
  }
}

TEST(ModelCodec, RejectsCorruptInput) {
  Rng rng(2);
  const std::string bytes = serialize_model(random_model(rng, 5, TrainerKind::logistic, 0));
  for (std::size_t n = 0; n < bytes.size(); ++n) EXPECT_THROW(deserialize_model(bytes.substr(0, n)), ParseError);
  EXPECT_THROW(deserialize_model(bytes + '\0'), ParseError);
}

TEST(Trainer, Names) {
  EXPECT_EQ(trainer_from_string("logistic"), TrainerKind::logistic);
  EXPECT_EQ(trainer_from_string("hinge"), TrainerKind::hinge);
  EXPECT_EQ(trainer_from_string("svm"), TrainerKind::hinge);
  EXPECT_THROW(trainer_from_string("tree"), DomainError);
}

}  // namespace
}  // namespace fedmod
