/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fedmod/graph.hpp"

namespace fedmod {

inline constexpr std::string_view kGeneralTopic = "General Conversation";

/// Knobs for the synthetic federation. Instances are grouped into topic
/// clusters; each cluster has its own topical vocabulary, its own toxic
/// slang, and benign uses of a neighbouring cluster's slang, so models
/// transfer well inside a cluster and poorly across clusters.
struct SynthConfig {
  std::size_t instances = 12;
  std::size_t clusters = 3;
  /// Local toots authored on each instance.
  std::size_t toots_per_instance = 2000;
  std::size_t users_per_instance = 20;
  double intra_cluster_follow_prob = 0.10;
  double inter_cluster_follow_prob = 0.004;
  /// Share of local toots pushed to followers' instances.
  double federate_fraction = 0.05;
  /// Fraction of toxic toots whose score still lands below 0.5 and of
  /// benign toots scored above it; keeps the task from being separable.
  double ambiguity = 0.04;
  std::uint64_t seed = 7;
  std::int64_t start_time = 1640995200;  // 2022-01-01
};

struct SynthFederation {
  FederationGraph graph;
  std::map<std::string, std::size_t> cluster_of;
};

SynthFederation generate_federation(const SynthConfig& cfg);

/// Domain name of instance `index` in cluster `cluster`.
std::string synth_domain(std::size_t index, std::size_t cluster);

}  // namespace fedmod
