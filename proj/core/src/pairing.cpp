/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/pairing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "fedmod/errors.hpp"

namespace fedmod {

void PairingConfig::validate() const {
  if (k == 0) throw DomainError("pairing k must be positive");
  if (presample_f) {
    if (*presample_f == 0) throw DomainError("pre-sampling pool size f must be positive");
    if (k > *presample_f) throw DomainError("pairing k must not exceed the pre-sampling pool size f");
  }
}

std::vector<RankedPeer> rank_peers(const TfIdfProfile& own, std::span<const TfIdfProfile> candidates) {
  std::vector<RankedPeer> ranking;
  ranking.reserve(candidates.size());
  for (const TfIdfProfile& c : candidates) {
    if (c.instance == own.instance) continue;
    ranking.push_back({c.instance, cosine_similarity(own, c)});
  }
  std::sort(ranking.begin(), ranking.end(), [](const RankedPeer& a, const RankedPeer& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.domain < b.domain;
  });
  return ranking;
}

std::vector<std::string> select_top_k(std::span<const RankedPeer> ranking, const PairingConfig& cfg) {
  if (cfg.k == 0) throw DomainError("pairing k must be positive");
  if (ranking.size() < cfg.k) {
    throw PoolTooSmallError("need " + std::to_string(cfg.k) + " ranked peers, have " +
                            std::to_string(ranking.size()));
  }
  std::vector<std::string> out;
  out.reserve(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i) out.push_back(ranking[i].domain);
  return out;
}

PresampleResult presample(const FederationGraph& graph, std::string_view instance, std::size_t f) {
  if (!graph.has_instance(instance)) throw GraphError("unknown instance " + std::string(instance));
  std::vector<std::pair<std::uint64_t, std::string>> counts;
  for (const auto& [domain, _] : graph.instances()) {
    if (domain == instance) continue;
    counts.emplace_back(graph.shared_follow_count(instance, domain), domain);
  }
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  PresampleResult r;
  r.short_pool = counts.size() < f;
  const std::size_t take = std::min(f, counts.size());
  for (std::size_t i = 0; i < take; ++i) r.pool.push_back(counts[i].second);
  return r;
}

double precision_at_k(std::span<const std::string> selected, std::span<const std::string> oracle_ranking,
                      std::size_t k) {
  if (k == 0) throw DomainError("precision@k needs k > 0");
  if (selected.size() < k || oracle_ranking.size() < k) {
    throw DomainError("precision@" + std::to_string(k) + " needs at least k selected and oracle entries");
  }
  const std::set<std::string_view> truth(oracle_ranking.begin(), oracle_ranking.begin() + static_cast<std::ptrdiff_t>(k));
  std::set<std::string_view> picked(selected.begin(), selected.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t hits = 0;
  for (auto s : picked) hits += truth.contains(s) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

PairingDecision decide_pairing(const TfIdfProfile& own, std::span<const TfIdfProfile> pool,
                               const PairingConfig& cfg) {
  PairingDecision d;
  d.instance = own.instance;
  d.ranking = rank_peers(own, pool);
  d.selected = select_top_k(d.ranking, cfg);
  return d;
}

std::string pairing_decision_json(const PairingDecision& d) {
  nlohmann::ordered_json j;
  j["instance"] = d.instance;
  auto ranking = nlohmann::ordered_json::array();
  for (const RankedPeer& p : d.ranking) {
    nlohmann::ordered_json e;
    e["peer"] = p.domain;
    e["similarity"] = std::round(p.similarity * 1e6) / 1e6;
    ranking.push_back(std::move(e));
  }
  j["ranking"] = std::move(ranking);
  j["selected"] = d.selected;
  j["pool"] = d.provenance() == PoolProvenance::full ? "full" : "presampled";
  if (d.presampled_pool) j["presampled_pool"] = *d.presampled_pool;
  if (d.short_pool) j["short_pool"] = true;
  return j.dump();
}

}  // namespace fedmod
