/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "builders.hpp"
#include "fedmod/cli/cli.hpp"
#include "fedmod/experiments.hpp"
#include "fedmod/synth.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

namespace {

using namespace fedmod;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------ 1

Outcome tfidf_exactness() {
  const std::vector<std::vector<std::string>> corpora = {
      {"cat dog", "dog eel", "eel eel fox"},
      {"same", "same", "same", "same"},
      {"aa bb cc dd ee ff gg hh", "aa", "bb bb bb bb", "hh gg", "cc cc aa"},
      {"lone"},
      {"red fish blue fish", "one fish two fish", "red blue", "old new", "fish fish fish", "blue", "two red", "new",
       "one", "old old fish"},
  };
  double worst = 0.0;
  for (const auto& texts : corpora) {
    std::vector<Toot> toots;
    for (std::size_t i = 0; i < texts.size(); ++i) toots.push_back(testing::toot(std::to_string(i), texts[i]));
    const auto got = tfidf_profile("a", toots, build_vocabulary(toots, 1)).weights;
    const auto want = oracle::tfidf(texts);
    if (got.size() != want.size()) return {false, "term sets differ"};
    for (const auto& [t, w] : want) {
      auto it = got.find(t);
      if (it == got.end()) return {false, "missing term " + t};
      worst = std::max(worst, std::abs(it->second - w) / w);
    }
  }
  return {worst <= 1e-9, fmt("max rel err %.3g over 5 corpora", worst)};
}

// ------------------------------------------------------------------ 2

Outcome gradient_check() {
  Rng rng(2);
  double worst = 0.0;
  for (auto kind : {TrainerKind::logistic, TrainerKind::hinge}) {
    int checked = 0;
    while (checked < 20) {
      const auto m = testing::random_model(rng, 1 + rng.below(12), kind, rng.uniform() < 0.5 ? 0.0 : 0.05);
      const auto batch = testing::random_batch(rng, m.vocabulary().size(), 1 + rng.below(40));
      if (kind == TrainerKind::hinge && testing::hinge_kink_nearby(m, batch)) continue;
      worst = std::max(worst, testing::max_relative_gradient_error(m, batch));
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("max rel err %.3g over 40 pairs", worst)};
}

// ------------------------------------------------------------- 3, 4, 6, 7

struct Baseline {
  SynthFederation fed;
  ExperimentConfig cfg;
  std::vector<PreparedInstance> prepared;
  CrossMatrix cross;
  EnsembleReport full;
  double seconds = 0.0;
};

const Baseline& baseline() {
  static const Baseline b = [] {
    const auto t0 = std::chrono::steady_clock::now();
    Baseline out;
    out.fed = generate_federation(SynthConfig{});
    out.prepared = prepare_instances(out.fed.graph, out.cfg);
    out.cross = run_cross_matrix(out.prepared, out.cfg.tokenizer);
    out.full = run_ensemble_experiment(out.fed.graph, out.prepared, out.cross, out.cfg);
    out.seconds = seconds_since(t0);
    return out;
  }();
  return b;
}

Outcome pairing_fidelity() {
  const Baseline& b = baseline();
  std::size_t in_cluster = 0;
  for (const auto& row : b.full.rows) {
    if (row.error) return {false, row.domain + ": " + *row.error};
    if (!row.selected.empty() && b.fed.cluster_of.at(row.selected[0]) == b.fed.cluster_of.at(row.domain)) ++in_cluster;
  }
  const bool ok = b.full.mean_p_at_3 >= 0.6 && in_cluster == b.full.rows.size() && b.seconds < 300.0;
  return {ok, fmt("mean P@3 %.3f, P@1 %.3f, top-1 in own cluster %zu/%zu, %.1f s", b.full.mean_p_at_3,
                  b.full.mean_p_at_1, in_cluster, b.full.rows.size(), b.seconds)};
}

Outcome ensemble_benefit() {
  const Baseline& b = baseline();
  return {b.full.mean_ensemble_f1 > b.full.mean_local_f1,
          fmt("ensemble %.4f vs local %.4f", b.full.mean_ensemble_f1, b.full.mean_local_f1)};
}

Outcome presampling_economy() {
  const Baseline& b = baseline();
  ExperimentConfig cfg = b.cfg;
  cfg.pairing.presample_f = 5;
  const auto pre = run_ensemble_experiment(b.fed.graph, b.prepared, b.cross, cfg);
  const double gap = std::abs(pre.mean_ensemble_f1 - b.full.mean_ensemble_f1);
  const bool ok = pre.profile_fetches == 60 && b.full.profile_fetches == 132 && gap <= 0.03;
  return {ok, fmt("profile fetches %llu vs %llu, ensemble F1 %.4f vs %.4f", (unsigned long long)pre.profile_fetches,
                  (unsigned long long)b.full.profile_fetches, pre.mean_ensemble_f1, b.full.mean_ensemble_f1)};
}

Outcome message_law_and_serialization() {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.below(19);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(5, n - 1));
    std::optional<std::size_t> f;
    if (rng.below(2)) f = k + rng.below(n);
    SimNetwork net;
    FederationGraph g;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string d = "n" + std::to_string(i) + ".example";
      InstanceNode& node = net.add_node(d);
      TfIdfProfile p;
      p.weights = {{"t" + std::to_string(i), 1.0}, {"shared", 0.5 + rng.uniform()}};
      node.publish_profile(p);
      node.publish_model(*testing::constant_model(0.1 + 0.8 * rng.uniform(), d));
      InstanceCorpus c;
      c.domain = d;
      c.users = {"u"};
      g.add_instance(c);
    }
    for (const auto& a : g.domains()) {
      for (const auto& bb : g.domains()) {
        if (a != bb && rng.uniform() < 0.5) g.add_follow({"u", a}, {"u", bb});
      }
    }
    RoundOptions opts;
    opts.pairing.k = k;
    opts.pairing.presample_f = f;
    const auto r = net.fetch_round(&g, opts);
    const auto want = expected_profile_fetches(n, f ? std::optional<std::uint64_t>(*f) : std::nullopt);
    if (r.profile_fetches != want || r.model_fetches != n * k) {
      return {false, fmt("config N=%zu k=%zu: fetched %llu/%llu profiles/models", n, k,
                         (unsigned long long)r.profile_fetches, (unsigned long long)r.model_fetches)};
    }
  }
  std::size_t largest = 0;
  for (const auto& p : baseline().prepared) {
    if (!p.ok()) return {false, p.domain + ": " + *p.error};
    const std::string mb = serialize_model(*p.model);
    if (serialize_model(deserialize_model(mb)) != mb || !(deserialize_model(mb) == *p.model)) {
      return {false, p.domain + ": model round-trip differs"};
    }
    const std::string pb = serialize_profile(p.profile);
    if (serialize_profile(deserialize_profile(pb)) != pb || !(deserialize_profile(pb) == p.profile)) {
      return {false, p.domain + ": profile round-trip differs"};
    }
    largest = std::max(largest, mb.size());
  }
  return {largest < 8u * 1024 * 1024, fmt("10 configs exact, 12 models round-trip, largest model %zu bytes", largest)};
}

// ------------------------------------------------------------------ 5

Outcome noise_ordering() {
  std::vector<double> local_random, ensemble_random, local_topic;
  const std::vector<NoiseLevel> grid = {{NoiseMode::random_flip, 0.25}, {NoiseMode::topic_whitelist, 0.0}};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig s;
    s.seed = seed;
    ExperimentConfig cfg;
    cfg.seed = seed;
    const auto fed = generate_federation(s);
    const auto r = run_noise_experiment(fed.graph, grid, cfg);
    const auto* rnd = r.find(NoiseMode::random_flip, 0.25);
    const auto* top = r.find(NoiseMode::topic_whitelist, 0.0);
    if (!rnd || !top) return {false, "noise levels missing from report"};
    local_random.push_back(rnd->mean_local_degradation);
    ensemble_random.push_back(rnd->mean_ensemble_degradation);
    local_topic.push_back(top->mean_local_degradation);
  }
  const double lr = median(local_random), er = median(ensemble_random), lt = median(local_topic);
  return {er < lr && lt < lr,
          fmt("median degradation at 25%%: ensemble %.4f < local %.4f; topic whitelist %.4f", er, lr, lt)};
}

// ------------------------------------------------------------------ 8

Outcome propagation_oracle() {
  Rng rng(8);
  std::size_t toots = 0;
  for (int trial = 0; trial < 50; ++trial) {
    FederationGraph g;
    std::vector<UserRef> users;
    const std::size_t n = 1 + rng.below(10);
    for (std::size_t i = 0; i < n; ++i) {
      InstanceCorpus c;
      c.domain = "i" + std::to_string(i);
      for (std::size_t u = 0, m = 1 + rng.below(6); u < m; ++u) c.users.push_back("u" + std::to_string(u));
      c.registered_user_count = c.users.size() + rng.below(1000);
      for (const auto& u : c.users) users.push_back({u, c.domain});
      g.add_instance(std::move(c));
    }
    for (std::size_t e = 0, m = rng.below(201); e < m; ++e) {
      const auto& a = users[rng.below(users.size())];
      const auto& b = users[rng.below(users.size())];
      if (!(a == b)) g.add_follow(a, b);
    }
    for (const auto& author : users) {
      const Toot t = testing::toot("t" + std::to_string(toots++), "x", {}, author.domain, author.handle);
      const auto want = oracle::replication_set(g, t);
      std::uint64_t reached = g.registered_users(author.domain);
      for (const auto& d : want) reached += g.registered_users(d);
      if (propagate(g, t) != want) return {false, fmt("replication set differs on graph %d", trial)};
      if (!(reach(g, t) == Reach{1 + want.size(), reached})) return {false, fmt("reach differs on graph %d", trial)};
    }
  }
  return {true, fmt("50 graphs, %zu toots exact", toots)};
}

// ------------------------------------------------------------------ 9

std::map<std::string, std::string> run_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  auto base = [&](std::vector<std::string> tail) {
    std::vector<std::string> args = {"--seed", "3", "--store", (dir / "store").string(), "--out", (dir / "out").string()};
    args.insert(args.end(), tail.begin(), tail.end());
    return args;
  };
  const std::vector<std::vector<std::string>> steps = {
      {"synth", "--instances", "6", "--clusters", "2", "--toots-per-instance", "400", "--users", "6"},
      {"train"},
      {"crossmatrix"},
      {"pair", "--k", "2"},
      {"pair", "--k", "2", "--presample-f", "3"},
      {"ensemble-eval", "--k", "2", "--audit"},
      {"noise-exp", "--seeds", "2"},
      {"budget-exp", "--n-min", "50", "--n-max", "300", "--n-step", "125", "--seeds", "2"},
      {"report"},
  };
  std::map<std::string, std::string> files;
  for (const auto& step : steps) {
    std::ostringstream out, err;
    const int code = cli::run(base(step), out, err);
    if (code != 0) {
      files["<error>"] = step.front() + ": " + err.str();
      return files;
    }
    // Capture after each step so reruns of a subcommand are compared too.
    if (!fs::exists(dir / "out")) continue;
    for (const auto& e : fs::directory_iterator(dir / "out")) {
      if (e.path().extension() != ".csv") continue;
      std::ifstream in(e.path(), std::ios::binary);
      files[step.front() + "/" + e.path().filename().string()] = {std::istreambuf_iterator<char>(in), {}};
    }
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "fedmod_acceptance_cli";
  const auto a = run_pipeline(root / "a");
  const auto b = run_pipeline(root / "b");
  fs::remove_all(root);
  if (a.contains("<error>")) return {false, a.at("<error>")};
  if (a.size() != b.size()) return {false, "different report sets"};
  for (const auto& [name, body] : a) {
    if (b.at(name) != body) return {false, name + " differs between runs"};
  }
  return {true, fmt("%zu CSV snapshots byte-identical across 9 subcommands", a.size())};
}

// ------------------------------------------------------------------ 10

Outcome budget_curves() {
  BudgetGrid grid;
  grid.n_min = 500;
  grid.n_max = 10000;
  grid.n_step = 9500;
  std::map<std::pair<std::string, SampleMode>, std::pair<std::vector<double>, std::vector<double>>> f1;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig s;
    s.seed = seed;
    s.toots_per_instance = 12500;
    ExperimentConfig cfg;
    cfg.seed = seed;
    const auto fed = generate_federation(s);
    const auto r = run_budget_experiment(fed.graph, grid, cfg);
    for (const auto& row : r.rows) {
      if (!row.macro_f1) continue;
      auto& slot = f1[{row.domain, row.mode}];
      (row.requested_n == 500 ? slot.first : slot.second).push_back(*row.macro_f1);
      if (row.requested_n == 10000 && row.clipped) return {false, row.domain + ": n=10000 clipped"};
    }
  }
  std::map<SampleMode, std::pair<std::size_t, std::size_t>> wins;  // (improved, total)
  for (const auto& [key, v] : f1) {
    auto& w = wins[key.second];
    ++w.second;
    if (v.first.size() == 5 && v.second.size() == 5 && median(v.second) > median(v.first)) ++w.first;
  }
  bool ok = !wins.empty();
  std::string detail;
  for (const auto& [mode, w] : wins) {
    ok = ok && w.first * 10 >= w.second * 9;
    detail += fmt("%s %zu/%zu ", std::string(to_string(mode)).c_str(), w.first, w.second);
  }
  return {ok, detail + "instances improve from n=500 to n=10000"};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
  double time_limit;  // seconds; 0 for none
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "tf-idf exactness", tfidf_exactness, 1.0},
      {2, "gradient check", gradient_check, 10.0},
      {3, "pairing fidelity", pairing_fidelity, 0.0},
      {4, "ensemble benefit", ensemble_benefit, 0.0},
      {5, "noise robustness ordering", noise_ordering, 0.0},
      {6, "pre-sampling economy", presampling_economy, 0.0},
      {7, "message-count law and serialization", message_law_and_serialization, 0.0},
      {8, "propagation oracle", propagation_oracle, 0.0},
      {9, "determinism", cli_determinism, 0.0},
      {10, "budget curves", budget_curves, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = seconds_since(t0);
    if (c.time_limit > 0 && dt >= c.time_limit) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s limit", c.time_limit);
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), dt);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
