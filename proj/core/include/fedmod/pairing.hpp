/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmod/graph.hpp"
#include "fedmod/textproc.hpp"

namespace fedmod {

struct PairingConfig {
  std::size_t k = 3;
  /// Pre-sampling pool size; unset means the full pool.
  std::optional<std::size_t> presample_f;

  static constexpr std::size_t default_presample_f = 5;
  void validate() const;
};

struct RankedPeer {
  std::string domain;
  double similarity = 0.0;

  bool operator==(const RankedPeer&) const = default;
};

enum class PoolProvenance : std::uint8_t { full, presampled };

struct PairingDecision {
  std::string instance;
  std::vector<RankedPeer> ranking;
  std::vector<std::string> selected;
  std::optional<std::vector<std::string>> presampled_pool;
  /// Set when pre-sampling found fewer than f peers.
  bool short_pool = false;

  PoolProvenance provenance() const {
    return presampled_pool ? PoolProvenance::presampled : PoolProvenance::full;
  }
};

/// Cosine similarity to `own`, descending, ties by domain. Candidates with
/// the same domain as `own` are skipped.
std::vector<RankedPeer> rank_peers(const TfIdfProfile& own, std::span<const TfIdfProfile> candidates);

/// First k entries. Throws PoolTooSmallError when fewer are ranked.
std::vector<std::string> select_top_k(std::span<const RankedPeer> ranking, const PairingConfig& cfg);

struct PresampleResult {
  std::vector<std::string> pool;
  bool short_pool = false;
};

/// The f peers with the most follow edges shared with `instance` (both
/// directions), ties by domain. Returns every peer, flagged, when fewer
/// than f exist.
PresampleResult presample(const FederationGraph& graph, std::string_view instance, std::size_t f);

/// |selected[0..k) ∩ oracle[0..k)| / k. Throws DomainError for k == 0 or
/// inputs shorter than k.
double precision_at_k(std::span<const std::string> selected, std::span<const std::string> oracle_ranking,
                      std::size_t k);

/// Full decision for one instance given every profile it could see.
PairingDecision decide_pairing(const TfIdfProfile& own, std::span<const TfIdfProfile> pool,
                               const PairingConfig& cfg);

/// Report record: similarities rounded to 6 decimals.
std::string pairing_decision_json(const PairingDecision& decision);

}  // namespace fedmod
