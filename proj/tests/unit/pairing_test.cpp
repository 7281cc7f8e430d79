/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <json.hpp>

#include "builders.hpp"
#include "fedmod/errors.hpp"
#include "fedmod/pairing.hpp"
#include "oracles.hpp"

namespace fedmod {
namespace {

TfIdfProfile profile(std::string name, std::map<std::string, double> w) {
  TfIdfProfile p;
  p.instance = std::move(name);
  p.weights = std::move(w);
  p.toot_count = 1;
  return p;
}

TEST(RankPeers, IdenticalFirstDisjointLast) {
  const auto own = profile("a", {{"x", 1}, {"y", 2}});
  const std::vector<TfIdfProfile> cands = {profile("d", {{"z", 1}}), profile("b", {{"x", 1}, {"y", 2}}),
                                           profile("c", {{"x", 1}})};
  const auto r = rank_peers(own, cands);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].domain, "b");
  EXPECT_NEAR(r[0].similarity, 1.0, 1e-12);
  EXPECT_EQ(r[2].domain, "d");
  EXPECT_EQ(r[2].similarity, 0.0);
  EXPECT_TRUE(rank_peers(own, {}).empty());
}

TEST(RankPeers, SkipsSelfAndBreaksTiesByDomain) {
  const auto own = profile("a", {{"x", 1}});
  const std::vector<TfIdfProfile> cands = {profile("a", {{"x", 1}}), profile("c", {{"x", 2}}),
                                           profile("b", {{"x", 3}})};
  const auto r = rank_peers(own, cands);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].domain, "b");
  EXPECT_EQ(r[1].domain, "c");
}

TEST(RankPeers, SameClusterOutranksOthers) {
  // Three clusters with disjoint topic terms plus shared noise terms.
  Rng rng(6);
  std::vector<TfIdfProfile> ps;
  for (int c = 0; c < 3; ++c) {
    for (int m = 0; m < 3; ++m) {
      std::map<std::string, double> w;
      for (int t = 0; t < 5; ++t) w["topic" + std::to_string(c) + "_" + std::to_string(t)] = 2 + rng.uniform();
      for (int t = 0; t < 5; ++t) w["noise" + std::to_string(t)] = rng.uniform();
      ps.push_back(profile("c" + std::to_string(c) + "m" + std::to_string(m), w));
    }
  }
  for (const auto& own : ps) {
    const auto r = rank_peers(own, ps);
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_NEAR(r[i].similarity, oracle::cosine(own.weights, std::find_if(ps.begin(), ps.end(), [&](auto& p) {
                                                               return p.instance == r[i].domain;
                                                             })->weights),
                  1e-12);
    }
    for (int i = 0; i < 2; ++i) EXPECT_EQ(r[i].domain.substr(0, 2), own.instance.substr(0, 2)) << own.instance;
  }
}

TEST(RankPeers, ScaleInvariantRanking) {
  Rng rng(44);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TfIdfProfile> ps;
    for (int i = 0; i < 6; ++i) {
      std::map<std::string, double> w;
      for (int t = 0; t < 8; ++t) w["t" + std::to_string(t)] = 0.1 + rng.uniform();
      ps.push_back(profile("p" + std::to_string(i), w));
    }
    const auto before = rank_peers(ps[0], ps);
    const std::size_t victim = 1 + rng.below(5);
    const double factor = 0.01 + 50 * rng.uniform();
    for (auto& [_, v] : ps[victim].weights) v *= factor;
    const auto after = rank_peers(ps[0], ps);
    ASSERT_EQ(before.size(), after.size());
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_EQ(before[i].domain, after[i].domain);
      EXPECT_NEAR(before[i].similarity, after[i].similarity, 1e-12);
    }
  }
}

std::vector<RankedPeer> ranking(std::initializer_list<const char*> names) {
  std::vector<RankedPeer> r;
  double s = 1.0;
  for (const char* n : names) r.push_back({n, s -= 0.1});
  return r;
}

TEST(SelectTopK, Prefixes) {
  const auto r = ranking({"b", "c", "d", "e", "f"});
  EXPECT_EQ(select_top_k(r, {1}), std::vector<std::string>{"b"});
  EXPECT_EQ(select_top_k(r, {3}), (std::vector<std::string>{"b", "c", "d"}));
  EXPECT_EQ(select_top_k(r, {5}).size(), 5u);
  EXPECT_THROW(select_top_k(r, {6}), PoolTooSmallError);
}

TEST(PairingConfig, Validation) {
  PairingConfig ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_THROW((PairingConfig{0}.validate()), DomainError);
  PairingConfig big;
  big.k = 6;
  big.presample_f = 5;
  EXPECT_THROW(big.validate(), DomainError);
}

InstanceCorpus inst(const std::string& d, std::size_t users) {
  InstanceCorpus c;
  c.domain = d;
  for (std::size_t i = 0; i < users; ++i) c.users.push_back("u" + std::to_string(i));
  return c;
}

TEST(Presample, EngineeredEdgeCounts) {
  FederationGraph g;
  g.add_instance(inst("a", 10));
  const std::vector<std::pair<std::string, int>> peers = {{"p9", 9}, {"p7", 7}, {"p5", 5},
                                                          {"p3", 3}, {"p1", 1}, {"p0", 0}};
  for (const auto& [d, n] : peers) {
    g.add_instance(inst(d, 10));
    // Alternate directions so both count.
    for (int i = 0; i < n; ++i) {
      if (i % 2) g.add_follow({"u" + std::to_string(i), d}, {"u0", "a"});
      else g.add_follow({"u" + std::to_string(i), "a"}, {"u0", d});
    }
  }
  for (const auto& [d, n] : peers) ASSERT_EQ(g.shared_follow_count("a", d), static_cast<std::uint64_t>(n));
  const auto r = presample(g, "a", 5);
  EXPECT_EQ(r.pool, (std::vector<std::string>{"p9", "p7", "p5", "p3", "p1"}));
  EXPECT_FALSE(r.short_pool);
  const auto all = presample(g, "a", 10);
  EXPECT_EQ(all.pool.size(), 6u);
  EXPECT_TRUE(all.short_pool);
}

TEST(Presample, StarGraph) {
  FederationGraph g;
  for (const char* d : {"a", "b", "c"}) g.add_instance(inst(d, 3));
  for (int i = 0; i < 3; ++i) g.add_follow({"u" + std::to_string(i), "a"}, {"u0", "b"});
  EXPECT_EQ(presample(g, "a", 1).pool, std::vector<std::string>{"b"});
  EXPECT_THROW(presample(g, "zz", 1), GraphError);
}

TEST(PrecisionAtK, HandValues) {
  const std::vector<std::string> sel = {"B", "C", "E"}, orc = {"B", "C", "D"};
  EXPECT_NEAR(precision_at_k(sel, orc, 3), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(precision_at_k(orc, orc, 3), 1.0);
  EXPECT_EQ(precision_at_k(std::vector<std::string>{"X", "Y", "Z"}, orc, 3), 0.0);
  EXPECT_THROW(precision_at_k(sel, orc, 0), DomainError);
  EXPECT_THROW(precision_at_k(sel, orc, 4), DomainError);
}

TEST(PrecisionAtK, NeverRisesWhenACorrectPickIsReplaced) {
  Rng rng(10);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 300; ++trial) {
    auto orc = names;
    rng.shuffle(orc);
    auto sel = names;
    rng.shuffle(sel);
    const std::size_t k = 1 + rng.below(4);
    const double before = precision_at_k(sel, orc, k);
    // Replace a selected entry that is in the oracle top-k by one that is not.
    for (std::size_t i = 0; i < k; ++i) {
      if (std::find(orc.begin(), orc.begin() + k, sel[i]) == orc.begin() + k) continue;
      for (std::size_t j = k; j < sel.size(); ++j) {
        if (std::find(orc.begin(), orc.begin() + k, sel[j]) == orc.begin() + k) {
          std::swap(sel[i], sel[j]);
          break;
        }
      }
      break;
    }
    EXPECT_LE(precision_at_k(sel, orc, k), before);
  }
}

TEST(DecidePairing, RecordsDecision) {
  const auto own = profile("a", {{"x", 1}, {"y", 1}});
  const std::vector<TfIdfProfile> pool = {profile("b", {{"x", 1}}), profile("c", {{"x", 1}, {"y", 1}}),
                                          profile("d", {{"z", 1}})};
  const auto d = decide_pairing(own, pool, {2});
  EXPECT_EQ(d.instance, "a");
  EXPECT_EQ(d.selected, (std::vector<std::string>{"c", "b"}));
  EXPECT_EQ(d.provenance(), PoolProvenance::full);
  const auto j = nlohmann::json::parse(pairing_decision_json(d));
  EXPECT_EQ(j["instance"], "a");
  EXPECT_EQ(j["pool"], "full");
  EXPECT_EQ(j["ranking"][1]["similarity"].get<double>(), 0.707107);
  for (const auto& s : d.selected) EXPECT_NE(s, "a");
}

}  // namespace
}  // namespace fedmod
