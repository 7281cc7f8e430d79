/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedmod/classifier.hpp"
#include "fedmod/corpus.hpp"
#include "fedmod/ensemble.hpp"
#include "fedmod/graph.hpp"
#include "fedmod/pairing.hpp"
#include "fedmod/protocol.hpp"

namespace fedmod {

/// Training budget used by the experiment drivers. The library defaults stop
/// well short of the optimum on 2K-toot corpora; at this budget the logistic
/// loss is still non-increasing on the synthetic federations.
inline TrainConfig harness_train_config() {
  TrainConfig c;
  c.learning_rate = 1.0;
  c.epochs = 1000;
  return c;
}

/// Settings shared by every experiment driver.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  LabelConfig labels;
  LabelScheme label_scheme = LabelScheme::toxicity_score;
  TrainerKind trainer = TrainerKind::logistic;
  TrainConfig train = harness_train_config();
  double split_ratio = 0.8;
  std::uint64_t min_df = 2;
  TokenizerOptions tokenizer;
  PairingConfig pairing;
  TieRule tie_rule = TieRule::mean_score;
  bool include_local_in_ensemble = false;
  double rate_limit = 10.0;
  /// Topics never picked for whitelisting.
  std::vector<std::string> excluded_topics = {"General Conversation"};

  /// Flat key/value snapshot for reports.
  std::map<std::string, std::string> snapshot() const;
};

/// One instance after labelling, splitting, training and profiling.
struct PreparedInstance {
  std::string domain;
  TrainTestSplit split;
  Vocabulary vocab;
  ModelPtr model;
  TfIdfProfile profile;
  /// Set when the instance could not be trained.
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

/// Labels, splits (seeded per domain), trains and profiles every instance.
/// Failures are recorded per instance instead of aborting.
std::vector<PreparedInstance> prepare_instances(const FederationGraph& graph, const ExperimentConfig& cfg);

/// Trains one model on `train_set` with the config's vocabulary and trainer settings.
ModelPtr train_model(std::string_view domain, std::span<const Toot> train_set, const ExperimentConfig& cfg);

struct CrossMatrix {
  std::vector<std::string> domains;
  /// scores[i][j]: model trained on domains[i] tested on domains[j]'s test split.
  std::vector<std::vector<std::optional<double>>> scores;

  std::size_t index_of(std::string_view domain) const;
  std::optional<double> at(std::string_view trained_on, std::string_view tested_on) const;

  /// Peers of `instance` within `pool` ordered by how well their model does
  /// on `instance`'s test split; ties by domain.
  std::vector<std::string> oracle_ranking(std::string_view instance, std::span<const std::string> pool) const;
};

CrossMatrix run_cross_matrix(std::span<const PreparedInstance> prepared, const TokenizerOptions& tokenizer = {});
CrossMatrix run_cross_matrix(const FederationGraph& graph, const ExperimentConfig& cfg);

struct RunInfo {
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  double wall_seconds = 0.0;
  std::uint64_t peak_rss_kb = 0;
};

struct EnsembleInstanceRow {
  std::string domain;
  double local_f1 = 0.0;
  double ensemble_f1 = 0.0;
  double p_at_1 = 0.0;
  double p_at_3 = 0.0;
  /// Precision against the oracle over every instance, not only the pool.
  double p_at_3_full = 0.0;
  std::vector<std::string> selected;
  std::vector<std::string> oracle;
  PairingDecision decision;
  std::optional<std::string> error;
};

struct EnsembleReport {
  std::vector<EnsembleInstanceRow> rows;
  double mean_local_f1 = 0.0;
  double mean_ensemble_f1 = 0.0;
  double mean_p_at_1 = 0.0;
  double mean_p_at_3 = 0.0;
  std::uint64_t profile_fetches = 0;
  std::uint64_t model_fetches = 0;
  std::uint64_t expected_profile_fetches = 0;
  std::uint64_t expected_model_fetches = 0;
  CrossMatrix cross;
  RunInfo info;
};

EnsembleReport run_ensemble_experiment(const FederationGraph& graph, const ExperimentConfig& cfg);
EnsembleReport run_ensemble_experiment(const FederationGraph& graph, std::span<const PreparedInstance> prepared,
                                     const CrossMatrix& cross, const ExperimentConfig& cfg);

struct NoiseLevel {
  NoiseMode mode = NoiseMode::random_flip;
  double fraction = 0.0;

  std::string name() const;
};

std::vector<NoiseLevel> default_noise_grid();

struct NoiseRow {
  std::string domain;
  NoiseLevel level;
  std::optional<std::string> topic;
  std::size_t flipped = 0;
  double local_clean = 0.0;
  double local_noisy = 0.0;
  double ensemble_clean = 0.0;
  double ensemble_noisy = 0.0;

  double local_degradation() const;
  double ensemble_degradation() const;
};

struct NoiseSummary {
  NoiseLevel level;
  double mean_local_degradation = 0.0;
  double mean_ensemble_degradation = 0.0;
};

struct NoiseReport {
  std::vector<NoiseRow> rows;
  std::vector<NoiseSummary> summary;
  RunInfo info;

  const NoiseSummary* find(NoiseMode mode, double fraction) const;
};

/// Relative macro-F1 drop (clean - noisy) / clean; 0 when clean is 0.
double relative_degradation(double clean, double noisy);

NoiseReport run_noise_experiment(const FederationGraph& graph, const std::vector<NoiseLevel>& grid,
                                 const ExperimentConfig& cfg);

struct BudgetGrid {
  std::size_t n_min = 500;
  std::size_t n_max = 10000;
  std::size_t n_step = 500;
  std::vector<SampleMode> modes = {SampleMode::first, SampleMode::random};

  std::vector<std::size_t> sizes() const;
};

struct BudgetRow {
  std::string domain;
  SampleMode mode = SampleMode::first;
  std::size_t requested_n = 0;
  std::size_t used_n = 0;
  bool clipped = false;
  std::optional<double> macro_f1;
};

struct BudgetReport {
  std::vector<BudgetRow> rows;
  RunInfo info;

  std::optional<double> find(std::string_view domain, SampleMode mode, std::size_t n) const;
};

BudgetReport run_budget_experiment(const FederationGraph& graph, const BudgetGrid& grid, const ExperimentConfig& cfg);

// ---------------------------------------------------------------------------
// Report writers. CSV output is fully determined by (config, seed); timing
// and memory only go to the JSON summaries.

std::string cross_matrix_csv(const CrossMatrix& m);
std::string ensemble_csv(const EnsembleReport& r);
std::string ensemble_json(const EnsembleReport& r);
std::string noise_csv(const NoiseReport& r);
std::string noise_json(const NoiseReport& r);
std::string budget_csv(const BudgetReport& r);
std::string run_info_json(const RunInfo& info);

/// Peak resident set size of this process in KiB (0 if unknown).
std::uint64_t peak_rss_kb();

/// Fixed-precision decimal rendering used by every CSV writer.
std::string format_real(double v, int decimals = 6);

}  // namespace fedmod
