/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "fedmod/errors.hpp"
#include "fedmod/random.hpp"

namespace fedmod {

namespace {

constexpr std::array<std::string_view, 24> kSyllables = {
    "ka", "lo", "mi", "ren", "su", "ta", "vel", "dor", "qui", "zan", "pe", "fo",
    "ri", "gal", "nu", "xe", "bra", "sho", "tin", "mau", "ek", "ul", "yo", "harn"};

/// Draws indices with probability proportional to 1 / (rank + 1)^s.
class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cdf_[i] = total;
    }
    for (double& c : cdf_) c /= total;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

class Lexicon {
 public:
  Lexicon(Rng& rng, std::set<std::string>& used, std::size_t n, double zipf_s) : zipf_(n, zipf_s) {
    words_.reserve(n);
    while (words_.size() < n) {
      const std::size_t syllables = 2 + rng.below(2);
      std::string w;
      for (std::size_t i = 0; i < syllables; ++i) w += kSyllables[rng.below(kSyllables.size())];
      if (used.insert(w).second) words_.push_back(std::move(w));
    }
  }

  const std::string& draw(Rng& rng) const { return words_[zipf_.draw(rng)]; }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::vector<std::string> words_;
  Zipf zipf_;
};

struct TopicSpec {
  std::string name;
  double share;
  double toxic_rate;
};

struct ClusterVocab {
  std::vector<Lexicon> topics;  // one per named cluster topic
  std::vector<std::string> topic_names;
  Lexicon slang;
  Lexicon toxic;
  std::vector<std::string> borrowed;  // benign uses of a neighbour's toxic slang
};

constexpr std::array<std::string_view, 9> kTopicNames = {
    "Gaming", "Music", "Politics", "NSFW content", "Technology", "Human rights", "Sports", "Art", "Food"};

}  // namespace

std::string synth_domain(std::size_t index, std::size_t /*cluster*/) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst%02zu.example", index);
  return buf;
}

SynthFederation generate_federation(const SynthConfig& cfg) {
  if (cfg.instances == 0 || cfg.clusters == 0 || cfg.clusters > cfg.instances) {
    throw DomainError("synthetic federation needs 1 <= clusters <= instances");
  }
  if (cfg.users_per_instance == 0) throw DomainError("synthetic instances need at least one user");

  Rng rng(derive_seed(cfg.seed, "synth-vocabulary"));
  std::set<std::string> used;
  const Lexicon common(rng, used, 300, 1.05);
  const Lexicon global_toxic(rng, used, 120, 1.0);

  std::vector<ClusterVocab> clusters;
  clusters.reserve(cfg.clusters);
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    std::vector<Lexicon> topics;
    std::vector<std::string> names;
    for (std::size_t t = 0; t < 3; ++t) {
      topics.emplace_back(rng, used, 80, 1.0);
      names.emplace_back(kTopicNames[(3 * c + t) % kTopicNames.size()]);
      if (3 * c + t >= kTopicNames.size()) names.back() += " " + std::to_string((3 * c + t) / kTopicNames.size());
    }
    ClusterVocab cv{std::move(topics), std::move(names), Lexicon(rng, used, 150, 1.0), Lexicon(rng, used, 160, 0.9), {}};
    clusters.push_back(std::move(cv));
  }
  if (cfg.clusters > 1) {
    for (std::size_t c = 0; c < cfg.clusters; ++c) {
      const auto& neighbour = clusters[(c + 1) % cfg.clusters].toxic.words();
      clusters[c].borrowed.assign(neighbour.begin(), neighbour.begin() + 40);
    }
  }

  SynthFederation out;
  std::vector<std::string> domains;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const std::size_t cluster = i % cfg.clusters;
    domains.push_back(synth_domain(i, cluster));
    out.cluster_of[domains.back()] = cluster;
  }

  // Instances and their users.
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    InstanceCorpus corpus;
    corpus.domain = domains[i];
    for (std::size_t u = 0; u < cfg.users_per_instance; ++u) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "user%02zu", u);
      corpus.users.emplace_back(buf);
    }
    Rng urng(derive_seed(cfg.seed, "registered:" + domains[i]));
    corpus.registered_user_count = cfg.users_per_instance * (1 + urng.below(20));
    out.graph.add_instance(std::move(corpus));
    out.graph.set_attribute(domains[i], "cluster", std::to_string(out.cluster_of[domains[i]]));
  }

  // Follow edges between users of distinct instances.
  {
    Rng frng(derive_seed(cfg.seed, "synth-follows"));
    for (std::size_t a = 0; a < cfg.instances; ++a) {
      for (std::size_t b = 0; b < cfg.instances; ++b) {
        if (a == b) continue;
        const bool same = out.cluster_of[domains[a]] == out.cluster_of[domains[b]];
        const double p = same ? cfg.intra_cluster_follow_prob : cfg.inter_cluster_follow_prob;
        const auto& ua = out.graph.instance(domains[a]).users;
        const auto& ub = out.graph.instance(domains[b]).users;
        const std::vector<std::string> from(ua.begin(), ua.end()), to(ub.begin(), ub.end());
        for (const auto& fu : from) {
          for (const auto& tu : to) {
            if (frng.uniform() < p) out.graph.add_follow({fu, domains[a]}, {tu, domains[b]});
          }
        }
      }
    }
  }

  // Local timelines.
  std::vector<Toot> to_federate;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const std::string& domain = domains[i];
    const ClusterVocab& cv = clusters[out.cluster_of[domain]];
    Rng trng(derive_seed(cfg.seed, "synth-toots:" + domain));

    // A small instance-specific flavour keeps same-cluster profiles distinct.
    std::set<std::string> flavour_used = used;
    const Lexicon flavour(trng, flavour_used, 20, 1.0);

    std::vector<TopicSpec> topics = {
        {std::string(kGeneralTopic), 0.40, 0.30},
        {cv.topic_names[0], 0.25, 0.10},
        {cv.topic_names[1], 0.20, 0.35},
        {cv.topic_names[2], 0.15, 0.40},
    };

    InstanceCorpus& corpus = out.graph.instance(domain);
    std::int64_t clock = cfg.start_time + static_cast<std::int64_t>(trng.below(3600));
    for (std::size_t n = 0; n < cfg.toots_per_instance; ++n) {
      Toot t;
      char id[32];
      std::snprintf(id, sizeof id, "%06zu", n);
      t.id = domain + "/" + id;
      t.origin_instance = domain;
      t.author = corpus.users[trng.below(corpus.users.size())];
      clock += 1 + static_cast<std::int64_t>(-600.0 * std::log(1.0 - trng.uniform()));
      t.timestamp = clock;

      double u = trng.uniform();
      std::size_t topic = 0;
      while (topic + 1 < topics.size() && u >= topics[topic].share) {
        u -= topics[topic].share;
        ++topic;
      }
      t.topic = topics[topic].name;
      const bool toxic = trng.uniform() < topics[topic].toxic_rate;

      const std::size_t length = 8 + trng.below(9);
      std::vector<std::string> words;
      words.reserve(length + 3);
      for (std::size_t w = 0; w < length; ++w) {
        const double r = trng.uniform();
        if (r < 0.42) {
          words.push_back(common.draw(trng));
        } else if (r < 0.72) {
          words.push_back(topic == 0 ? cv.slang.draw(trng) : cv.topics[topic - 1].draw(trng));
        } else if (r < 0.92 || cv.borrowed.empty()) {
          words.push_back(cv.slang.draw(trng));
        } else if (r < 0.96) {
          words.push_back(cv.borrowed[trng.below(cv.borrowed.size())]);
        } else {
          words.push_back(flavour.draw(trng));
        }
      }

      std::size_t markers = 0;
      if (toxic) {
        markers = 1 + (trng.uniform() < 0.5 ? 1 : 0) + (trng.uniform() < 0.2 ? 1 : 0);
        for (std::size_t m = 0; m < markers; ++m) {
          const std::string& w = trng.uniform() < 0.4 ? global_toxic.draw(trng) : cv.toxic.draw(trng);
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(trng.below(words.size() + 1)), w);
        }
      }

      // Scores grow with the number of toxic markers; a small share of toots
      // get a score from the other side of 0.5.
      double score;
      if (toxic) {
        score = std::min(1.0, 0.5 + 0.1 * static_cast<double>(markers) + 0.2 * trng.uniform());
      } else {
        const double v = trng.uniform();
        score = 0.45 * v * v;
      }
      if (trng.uniform() < cfg.ambiguity) score = toxic ? 0.45 * trng.uniform() : 0.55 + 0.4 * trng.uniform();
      score = std::round(score * 1e4) / 1e4;
      t.toxicity_score = score;
      t.label = score > 0.5 ? Label::toxic : Label::non_toxic;
      t.content_warning = trng.uniform() < (toxic ? 0.14 : 0.12);
      t.reblog_count = trng.uniform() < 0.7 ? 0 : trng.below(12);

      std::string text;
      for (std::size_t w = 0; w < words.size(); ++w) {
        if (w) text.push_back(' ');
        text += words[w];
      }
      if (trng.uniform() < 0.1) text = "@" + corpus.users[trng.below(corpus.users.size())] + " " + text;
      if (trng.uniform() < 0.05) text += " https://" + domain + "/notice/" + id;
      t.text = std::move(text);

      if (trng.uniform() < cfg.federate_fraction) to_federate.push_back(t);
      corpus.local_toots.push_back(std::move(t));
    }
  }

  for (const Toot& t : to_federate) propagate(out.graph, t);
  return out;
}

}  // namespace fedmod
