/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fedmod {

enum class Label : std::uint8_t { non_toxic = 0, toxic = 1 };

inline Label flip(Label l) { return l == Label::toxic ? Label::non_toxic : Label::toxic; }
std::string_view to_string(Label l);
Label label_from_string(std::string_view s);

/// One post as seen by an instance's timeline.
struct Toot {
  std::string id;
  std::string origin_instance;
  std::string author;
  std::string text;
  std::int64_t timestamp = 0;
  std::optional<double> toxicity_score;
  std::optional<Label> label;
  bool content_warning = false;
  std::uint64_t reblog_count = 0;
  std::optional<std::string> topic;

  bool operator==(const Toot&) const = default;
};

/// A local user following a remote user, stored on the follower's instance.
struct FollowerEdge {
  std::string local_user;
  std::string remote_user;
  std::string remote_instance;

  bool operator==(const FollowerEdge&) const = default;
};

struct InstanceCorpus {
  std::string domain;
  std::vector<Toot> local_toots;
  std::vector<Toot> federated_toots;
  std::vector<std::string> users;
  std::uint64_t registered_user_count = 1;
  std::vector<FollowerEdge> follower_edges;

  std::size_t size() const { return local_toots.size() + federated_toots.size(); }

  /// Local toots followed by federated toots, the full timeline an
  /// instance trains and profiles on.
  std::vector<Toot> all_toots() const;
};

/// Toxicity cut-off applied to a [0,1] score. Toxic iff score > threshold.
struct LabelConfig {
  double threshold = 0.5;

  static LabelConfig standard() { return {0.5}; }
  static LabelConfig strict() { return {0.8}; }
  void validate() const;
};

/// Which signal becomes the training label.
enum class LabelScheme : std::uint8_t { toxicity_score, content_warning };

enum class NoiseMode : std::uint8_t { random_flip, topic_whitelist };

struct NoiseConfig {
  NoiseMode mode = NoiseMode::random_flip;
  double flip_fraction = 0.0;
  std::optional<std::string> topic;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class SampleMode : std::uint8_t { first, random };

std::string_view to_string(SampleMode m);

// ---------------------------------------------------------------------------
// Ingestion

struct LoadOptions {
  LabelConfig labels;
  /// Records whose text is empty (or only whitespace) are dropped.
  bool drop_empty_text = true;
};

/// Parses one JSON Lines toot record. Throws ParseError / SchemaError; the
/// line number is only used for messages.
Toot parse_toot_record(std::string_view line, std::size_t line_number, const LabelConfig& labels);

/// Serializes a toot into one canonical JSON Lines record (no trailing newline).
std::string to_jsonl_record(const Toot& toot);

/// Reads a JSON Lines toot file for the instance `domain`. Records whose
/// origin_instance equals the domain become local toots, others federated.
InstanceCorpus load_corpus(const std::filesystem::path& path, std::string_view domain,
                           const LoadOptions& options = {});
InstanceCorpus load_corpus(std::istream& in, std::string_view domain,
                           const LoadOptions& options = {});

/// Writes the timeline (local then federated) back out as JSON Lines.
void write_corpus(const InstanceCorpus& corpus, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Labelling

Label label_from_score(double score, const LabelConfig& cfg);

/// User-level label: toxic iff the mean toxicity score of their toots is
/// above 0.5.
Label user_toxicity(std::span<const Toot> toots_of_user);

/// Re-derives every toot label under `scheme`. Toots without the needed
/// signal (no score under toxicity_score) keep their existing label.
void apply_label_scheme(std::span<Toot> toots, LabelScheme scheme, const LabelConfig& cfg);

// ---------------------------------------------------------------------------
// Splits, noise and budgets

struct TrainTestSplit {
  std::vector<Toot> train;
  std::vector<Toot> test;
};

/// Stratified split: for each class, round(ratio * class size) members
/// (clamped so both sides keep at least one) go to train.
TrainTestSplit split_train_test(std::span<const Toot> toots, double ratio, std::uint64_t seed);
TrainTestSplit split_train_test(const InstanceCorpus& corpus, double ratio, std::uint64_t seed);

/// Indices flipped by random_flip for a sequence of `count` toots. Exposed
/// so callers can reproduce or undo a flip set.
std::vector<std::size_t> noise_flip_indices(std::size_t count, double fraction, std::uint64_t seed);

std::vector<Toot> inject_noise(std::span<const Toot> toots, const NoiseConfig& cfg);

std::vector<Toot> sample_budget(std::span<const Toot> toots, std::size_t n, SampleMode mode,
                                std::uint64_t seed);

/// Most frequent topic tag, skipping any in `excluded`. Ties resolve to
/// the lexicographically smallest tag.
std::optional<std::string> most_popular_topic(std::span<const Toot> toots,
                                              std::span<const std::string> excluded = {});

std::size_t count_label(std::span<const Toot> toots, Label label);

}  // namespace fedmod
