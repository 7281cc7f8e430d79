/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "fedmod/errors.hpp"
#include "fedmod/random.hpp"

namespace fedmod {

using ojson = nlohmann::ordered_json;

std::string format_real(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  // Avoid "-0.000000".
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::uint64_t peak_rss_kb() {
  std::ifstream in("/proc/self/status");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream ss(line.substr(6));
      std::uint64_t kb = 0;
      ss >> kb;
      return kb;
    }
  }
  return 0;
}

std::map<std::string, std::string> ExperimentConfig::snapshot() const {
  std::map<std::string, std::string> m;
  m["seed"] = std::to_string(seed);
  m["threshold"] = format_real(labels.threshold, 3);
  m["label_scheme"] = label_scheme == LabelScheme::toxicity_score ? "toxicity_score" : "content_warning";
  m["trainer"] = std::string(to_string(trainer));
  m["learning_rate"] = format_real(train.learning_rate, 6);
  m["epochs"] = std::to_string(train.epochs);
  m["l2_lambda"] = format_real(train.l2_lambda, 8);
  m["convergence_tol"] = format_real(train.convergence_tol, 10);
  m["split_ratio"] = format_real(split_ratio, 3);
  m["min_df"] = std::to_string(min_df);
  m["min_token_length"] = std::to_string(tokenizer.min_length);
  m["k"] = std::to_string(pairing.k);
  m["presample_f"] = pairing.presample_f ? std::to_string(*pairing.presample_f) : "none";
  m["tie_rule"] = tie_rule == TieRule::mean_score ? "mean_score" : "local_fallback";
  m["include_local"] = include_local_in_ensemble ? "true" : "false";
  m["rate_limit"] = format_real(rate_limit, 3);
  return m;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Toot> labeled_timeline(const InstanceCorpus& corpus, const ExperimentConfig& cfg) {
  auto toots = corpus.all_toots();
  apply_label_scheme(toots, cfg.label_scheme, cfg.labels);
  std::erase_if(toots, [](const Toot& t) { return !t.label.has_value(); });
  return toots;
}

TrainConfig seeded(const TrainConfig& base, std::uint64_t seed, std::string_view domain) {
  TrainConfig c = base;
  c.seed = derive_seed(seed, "train:" + std::string(domain));
  return c;
}

}  // namespace

ModelPtr train_model(std::string_view domain, std::span<const Toot> train_set, const ExperimentConfig& cfg) {
  const Vocabulary vocab = build_vocabulary(train_set, cfg.min_df, cfg.tokenizer);
  return std::make_shared<const LinearModel>(train(train_set, vocab, cfg.trainer, seeded(cfg.train, cfg.seed, domain),
                                                   std::string(domain), nullptr, cfg.tokenizer));
}

std::vector<PreparedInstance> prepare_instances(const FederationGraph& graph, const ExperimentConfig& cfg) {
  std::vector<PreparedInstance> out;
  for (const auto& [domain, corpus] : graph.instances()) {
    PreparedInstance p;
    p.domain = domain;
    try {
      const auto all = corpus.all_toots();
      p.profile = build_profile(corpus, cfg.min_df, cfg.tokenizer);
      if (p.profile.weights.empty()) throw DegenerateInputError("empty tf-idf profile");
      const auto labeled = labeled_timeline(corpus, cfg);
      p.split = split_train_test(labeled, cfg.split_ratio, derive_seed(cfg.seed, "split:" + domain));
      p.vocab = build_vocabulary(p.split.train, cfg.min_df, cfg.tokenizer);
      p.model = std::make_shared<const LinearModel>(train(p.split.train, p.vocab, cfg.trainer,
                                                          seeded(cfg.train, cfg.seed, domain), domain, nullptr,
                                                          cfg.tokenizer));
    } catch (const Error& e) {
      p.error = std::string(e.kind()) + ": " + e.what();
      p.model.reset();
    }
    out.push_back(std::move(p));
  }
  return out;
}

// ------------------------------------------------------------ cross matrix

std::size_t CrossMatrix::index_of(std::string_view domain) const {
  auto it = std::find(domains.begin(), domains.end(), domain);
  if (it == domains.end()) throw LookupError("domain " + std::string(domain) + " not in cross matrix");
  return static_cast<std::size_t>(it - domains.begin());
}

std::optional<double> CrossMatrix::at(std::string_view trained_on, std::string_view tested_on) const {
  return scores[index_of(trained_on)][index_of(tested_on)];
}

std::vector<std::string> CrossMatrix::oracle_ranking(std::string_view instance,
                                                     std::span<const std::string> pool) const {
  const std::size_t j = index_of(instance);
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& peer : pool) {
    if (peer == instance) continue;
    const auto s = scores[index_of(peer)][j];
    if (s) scored.emplace_back(*s, peer);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (auto& [_, d] : scored) out.push_back(std::move(d));
  return out;
}

CrossMatrix run_cross_matrix(std::span<const PreparedInstance> prepared, const TokenizerOptions& tokenizer) {
  CrossMatrix m;
  for (const auto& p : prepared) m.domains.push_back(p.domain);
  const std::size_t n = prepared.size();
  m.scores.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!prepared[i].ok()) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (!prepared[j].ok()) continue;
      m.scores[i][j] = evaluate(*prepared[i].model, prepared[j].split.test, tokenizer).macro_f1;
    }
  }
  return m;
}

CrossMatrix run_cross_matrix(const FederationGraph& graph, const ExperimentConfig& cfg) {
  const auto prepared = prepare_instances(graph, cfg);
  return run_cross_matrix(prepared, cfg.tokenizer);
}

// ---------------------------------------------------------------- pairing

namespace {

SimNetwork build_network(std::span<const PreparedInstance> prepared) {
  SimNetwork net;
  for (const auto& p : prepared) {
    if (!p.ok()) continue;
    InstanceNode& node = net.add_node(p.domain);
    node.publish_profile(p.profile);
    node.publish_model(*p.model);
  }
  return net;
}

RoundOptions round_options(const ExperimentConfig& cfg) {
  RoundOptions o;
  o.pairing = cfg.pairing;
  o.rate_limit = cfg.rate_limit;
  return o;
}

Ensemble make_ensemble(const std::vector<ModelPtr>& members, const ModelPtr& local, const ExperimentConfig& cfg) {
  Ensemble e(members, cfg.tie_rule, local);
  return cfg.include_local_in_ensemble ? e.with_local_member() : e;
}

std::vector<std::string> ranking_domains(const PairingDecision& d) {
  std::vector<std::string> out;
  for (const auto& r : d.ranking) out.push_back(r.domain);
  return out;
}

double safe_precision(const std::vector<std::string>& picked, const std::vector<std::string>& oracle, std::size_t k) {
  if (picked.size() < k || oracle.size() < k) return std::nan("");
  return precision_at_k(picked, oracle, k);
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n ? s / static_cast<double>(n) : std::nan("");
}

}  // namespace

EnsembleReport run_ensemble_experiment(const FederationGraph& graph, std::span<const PreparedInstance> prepared,
                                     const CrossMatrix& cross, const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  EnsembleReport report;
  report.cross = cross;

  SimNetwork net = build_network(prepared);
  const RoundResult round = net.fetch_round(&graph, round_options(cfg));
  report.profile_fetches = round.profile_fetches;
  report.model_fetches = round.model_fetches;

  const std::uint64_t live = net.domains().size();
  report.expected_profile_fetches = expected_profile_fetches(
      live, cfg.pairing.presample_f ? std::optional<std::uint64_t>(*cfg.pairing.presample_f) : std::nullopt);
  const std::uint64_t pool = cfg.pairing.presample_f ? std::min<std::uint64_t>(*cfg.pairing.presample_f, live - 1)
                                                     : (live ? live - 1 : 0);
  report.expected_model_fetches = live * std::min<std::uint64_t>(cfg.pairing.k, pool);

  const auto all_domains = cross.domains;
  std::vector<double> locals, ensembles, p1s, p3s;
  for (const auto& p : prepared) {
    EnsembleInstanceRow row;
    row.domain = p.domain;
    if (!p.ok()) {
      row.error = p.error;
      report.rows.push_back(std::move(row));
      continue;
    }
    try {
      const InstanceRoundResult& r = round.instances.at(p.domain);
      row.decision = r.decision;
      row.selected = r.decision.selected;
      row.local_f1 = cross.at(p.domain, p.domain).value_or(std::nan(""));
      const auto ranked = ranking_domains(r.decision);
      row.oracle = cross.oracle_ranking(p.domain, ranked);
      row.p_at_1 = safe_precision(ranked, row.oracle, 1);
      row.p_at_3 = safe_precision(ranked, row.oracle, 3);
      row.p_at_3_full = safe_precision(ranked, cross.oracle_ranking(p.domain, all_domains), 3);
      if (r.models.empty()) throw PoolTooSmallError("no peer models retrieved");
      row.ensemble_f1 = evaluate(make_ensemble(r.models, p.model, cfg), p.split.test, cfg.tokenizer).macro_f1;
      locals.push_back(row.local_f1);
      ensembles.push_back(row.ensemble_f1);
      p1s.push_back(row.p_at_1);
      p3s.push_back(row.p_at_3);
    } catch (const Error& e) {
      row.error = std::string(e.kind()) + ": " + e.what();
    }
    report.rows.push_back(std::move(row));
  }
  report.mean_local_f1 = mean_of(locals);
  report.mean_ensemble_f1 = mean_of(ensembles);
  report.mean_p_at_1 = mean_of(p1s);
  report.mean_p_at_3 = mean_of(p3s);

  report.info.seed = cfg.seed;
  report.info.config = cfg.snapshot();
  report.info.wall_seconds = seconds_since(start);
  report.info.peak_rss_kb = peak_rss_kb();
  return report;
}

EnsembleReport run_ensemble_experiment(const FederationGraph& graph, const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  const auto prepared = prepare_instances(graph, cfg);
  const CrossMatrix cross = run_cross_matrix(prepared, cfg.tokenizer);
  EnsembleReport r = run_ensemble_experiment(graph, prepared, cross, cfg);
  r.info.wall_seconds = seconds_since(start);
  return r;
}

// ------------------------------------------------------------------ noise

std::string NoiseLevel::name() const {
  if (mode == NoiseMode::topic_whitelist) return "topic";
  return "random_" + std::to_string(static_cast<int>(std::lround(fraction * 100))) ;
}

std::vector<NoiseLevel> default_noise_grid() {
  std::vector<NoiseLevel> g;
  for (int x : {5, 10, 15, 20, 25}) g.push_back({NoiseMode::random_flip, x / 100.0});
  g.push_back({NoiseMode::topic_whitelist, 0.0});
  return g;
}

double relative_degradation(double clean, double noisy) {
  if (clean == 0.0 || std::isnan(clean) || std::isnan(noisy)) return clean == noisy ? 0.0 : std::nan("");
  return (clean - noisy) / clean;
}

double NoiseRow::local_degradation() const { return relative_degradation(local_clean, local_noisy); }
double NoiseRow::ensemble_degradation() const { return relative_degradation(ensemble_clean, ensemble_noisy); }

const NoiseSummary* NoiseReport::find(NoiseMode mode, double fraction) const {
  for (const auto& s : summary) {
    if (s.level.mode != mode) continue;
    if (mode == NoiseMode::topic_whitelist || std::abs(s.level.fraction - fraction) < 1e-12) return &s;
  }
  return nullptr;
}

NoiseReport run_noise_experiment(const FederationGraph& graph, const std::vector<NoiseLevel>& grid,
                                 const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  NoiseReport report;
  const auto prepared = prepare_instances(graph, cfg);

  SimNetwork net = build_network(prepared);
  const RoundResult round = net.fetch_round(&graph, round_options(cfg));

  std::map<std::string, const PreparedInstance*> by_domain;
  for (const auto& p : prepared) {
    if (p.ok()) by_domain[p.domain] = &p;
  }

  auto ensemble_f1 = [&](const PreparedInstance& p, const std::map<std::string, ModelPtr>& models,
                         const ModelPtr& local) -> double {
    const auto it = round.instances.find(p.domain);
    if (it == round.instances.end()) return std::nan("");
    std::vector<ModelPtr> members;
    for (const auto& peer : it->second.decision.selected) {
      if (auto m = models.find(peer); m != models.end()) members.push_back(m->second);
    }
    if (members.empty()) return std::nan("");
    return evaluate(make_ensemble(members, local, cfg), p.split.test, cfg.tokenizer).macro_f1;
  };

  std::map<std::string, ModelPtr> clean_models;
  std::map<std::string, double> clean_local, clean_ensemble;
  for (const auto& [d, p] : by_domain) {
    clean_models[d] = p->model;
    clean_local[d] = evaluate(*p->model, p->split.test, cfg.tokenizer).macro_f1;
  }
  for (const auto& [d, p] : by_domain) clean_ensemble[d] = ensemble_f1(*p, clean_models, p->model);

  for (const NoiseLevel& level : grid) {
    std::map<std::string, ModelPtr> noisy_models;
    std::map<std::string, std::pair<std::size_t, std::optional<std::string>>> meta;
    for (const auto& [d, p] : by_domain) {
      NoiseConfig nc;
      nc.mode = level.mode;
      nc.seed = derive_seed(cfg.seed, "noise:" + d + ":" + level.name());
      std::optional<std::string> topic;
      if (level.mode == NoiseMode::random_flip) {
        nc.flip_fraction = level.fraction;
      } else {
        topic = most_popular_topic(p->split.train, cfg.excluded_topics);
        if (!topic) {
          noisy_models[d] = p->model;
          meta[d] = {0, std::nullopt};
          continue;
        }
        nc.topic = topic;
      }
      const auto noisy = inject_noise(p->split.train, nc);
      std::size_t flipped = 0;
      for (std::size_t i = 0; i < noisy.size(); ++i) flipped += noisy[i].label != p->split.train[i].label ? 1 : 0;
      meta[d] = {flipped, topic};
      try {
        noisy_models[d] = flipped == 0 ? p->model : train_model(d, noisy, cfg);
      } catch (const Error&) {
        // A noisy set that lost a class cannot be trained; the instance keeps no model.
      }
    }
    double sum_local = 0.0, sum_ens = 0.0;
    std::size_t n_local = 0, n_ens = 0;
    for (const auto& [d, p] : by_domain) {
      NoiseRow row;
      row.domain = d;
      row.level = level;
      row.flipped = meta[d].first;
      row.topic = meta[d].second;
      row.local_clean = clean_local[d];
      auto own = noisy_models.find(d);
      row.local_noisy = own == noisy_models.end() ? std::nan("")
                                                  : evaluate(*own->second, p->split.test, cfg.tokenizer).macro_f1;
      row.ensemble_clean = clean_ensemble[d];
      const ModelPtr local = own == noisy_models.end() ? p->model : own->second;
      row.ensemble_noisy = ensemble_f1(*p, noisy_models, local);
      if (const double ld = row.local_degradation(); !std::isnan(ld)) {
        sum_local += ld;
        ++n_local;
      }
      if (const double ed = row.ensemble_degradation(); !std::isnan(ed)) {
        sum_ens += ed;
        ++n_ens;
      }
      report.rows.push_back(std::move(row));
    }
    report.summary.push_back({level, n_local ? sum_local / static_cast<double>(n_local) : std::nan(""),
                              n_ens ? sum_ens / static_cast<double>(n_ens) : std::nan("")});
  }

  report.info.seed = cfg.seed;
  report.info.config = cfg.snapshot();
  report.info.wall_seconds = seconds_since(start);
  report.info.peak_rss_kb = peak_rss_kb();
  return report;
}

// ----------------------------------------------------------------- budget

std::vector<std::size_t> BudgetGrid::sizes() const {
  if (n_min == 0 || n_step == 0 || n_max < n_min) throw DomainError("budget grid needs 0 < n_min <= n_max, n_step > 0");
  std::vector<std::size_t> out;
  for (std::size_t n = n_min; n <= n_max; n += n_step) out.push_back(n);
  return out;
}

std::optional<double> BudgetReport::find(std::string_view domain, SampleMode mode, std::size_t n) const {
  for (const auto& r : rows) {
    if (r.domain == domain && r.mode == mode && r.requested_n == n) return r.macro_f1;
  }
  return std::nullopt;
}

BudgetReport run_budget_experiment(const FederationGraph& graph, const BudgetGrid& grid, const ExperimentConfig& cfg) {
  const auto start = Clock::now();
  BudgetReport report;
  const auto sizes = grid.sizes();
  for (const auto& [domain, corpus] : graph.instances()) {
    TrainTestSplit split;
    try {
      const auto labeled = labeled_timeline(corpus, cfg);
      split = split_train_test(labeled, cfg.split_ratio, derive_seed(cfg.seed, "split:" + domain));
    } catch (const Error&) {
      for (SampleMode mode : grid.modes) {
        for (std::size_t n : sizes) report.rows.push_back({domain, mode, n, 0, true, std::nullopt});
      }
      continue;
    }
    for (SampleMode mode : grid.modes) {
      for (std::size_t n : sizes) {
        BudgetRow row;
        row.domain = domain;
        row.mode = mode;
        row.requested_n = n;
        row.used_n = std::min(n, split.train.size());
        row.clipped = row.used_n < n;
        try {
          const auto sample = sample_budget(split.train, row.used_n, mode,
                                            derive_seed(cfg.seed, "budget:" + domain + ":" + std::to_string(n)));
          const ModelPtr model = train_model(domain, sample, cfg);
          row.macro_f1 = evaluate(*model, split.test, cfg.tokenizer).macro_f1;
        } catch (const Error&) {
          row.macro_f1.reset();
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.info.seed = cfg.seed;
  report.info.config = cfg.snapshot();
  report.info.wall_seconds = seconds_since(start);
  report.info.peak_rss_kb = peak_rss_kb();
  return report;
}

// ---------------------------------------------------------------- writers

namespace {

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

std::string join(const std::vector<std::string>& v, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s.push_back(sep);
    s += v[i];
  }
  return s;
}

ojson info_json(const RunInfo& info) {
  ojson j;
  j["seed"] = info.seed;
  ojson cfg;
  for (const auto& [k, v] : info.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  j["wall_seconds"] = info.wall_seconds;
  j["peak_rss_kb"] = info.peak_rss_kb;
  return j;
}

ojson real_or_null(double v) { return std::isnan(v) ? ojson(nullptr) : ojson(std::round(v * 1e6) / 1e6); }

}  // namespace

std::string cross_matrix_csv(const CrossMatrix& m) {
  std::string out = "trained_on";
  for (const auto& d : m.domains) out += "," + d;
  out += "\n";
  for (std::size_t i = 0; i < m.domains.size(); ++i) {
    out += m.domains[i];
    for (std::size_t j = 0; j < m.domains.size(); ++j) out += "," + opt_real(m.scores[i][j]);
    out += "\n";
  }
  return out;
}

std::string ensemble_csv(const EnsembleReport& r) {
  std::string out = "domain,local_f1,ensemble_f1,p_at_1,p_at_3,p_at_3_full_pool,pool,selected,oracle,error\n";
  for (const auto& row : r.rows) {
    out += row.domain + ",";
    if (row.error) {
      out += "NA,NA,NA,NA,NA,NA,,,\"" + *row.error + "\"\n";
      continue;
    }
    out += format_real(row.local_f1) + "," + format_real(row.ensemble_f1) + "," + format_real(row.p_at_1) + "," +
           format_real(row.p_at_3) + "," + format_real(row.p_at_3_full) + "," +
           (row.decision.provenance() == PoolProvenance::full ? "full" : "presampled") + "," + join(row.selected) +
           "," + join(row.oracle) + ",\n";
  }
  out += "MEAN," + format_real(r.mean_local_f1) + "," + format_real(r.mean_ensemble_f1) + "," +
         format_real(r.mean_p_at_1) + "," + format_real(r.mean_p_at_3) + ",,,,,\n";
  return out;
}

std::string ensemble_json(const EnsembleReport& r) {
  ojson j;
  j["mean_local_f1"] = real_or_null(r.mean_local_f1);
  j["mean_ensemble_f1"] = real_or_null(r.mean_ensemble_f1);
  j["mean_p_at_1"] = real_or_null(r.mean_p_at_1);
  j["mean_p_at_3"] = real_or_null(r.mean_p_at_3);
  std::vector<double> locals, ens;
  for (const auto& row : r.rows) {
    if (row.error) continue;
    locals.push_back(row.local_f1);
    ens.push_back(row.ensemble_f1);
  }
  auto stdev = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  j["stdev_local_f1"] = real_or_null(stdev(locals));
  j["stdev_ensemble_f1"] = real_or_null(stdev(ens));
  ojson msgs;
  msgs["profile_fetches"] = r.profile_fetches;
  msgs["expected_profile_fetches"] = r.expected_profile_fetches;
  msgs["model_fetches"] = r.model_fetches;
  msgs["expected_model_fetches"] = r.expected_model_fetches;
  j["messages"] = std::move(msgs);
  auto decisions = ojson::array();
  for (const auto& row : r.rows) {
    if (!row.error) decisions.push_back(ojson::parse(pairing_decision_json(row.decision)));
  }
  j["decisions"] = std::move(decisions);
  j["run"] = info_json(r.info);
  return j.dump(2);
}

std::string noise_csv(const NoiseReport& r) {
  std::string out =
      "domain,level,fraction,topic,flipped,local_clean,local_noisy,local_degradation,ensemble_clean,"
      "ensemble_noisy,ensemble_degradation\n";
  for (const auto& row : r.rows) {
    out += row.domain + "," + row.level.name() + "," +
           (row.level.mode == NoiseMode::topic_whitelist ? std::string("NA") : format_real(row.level.fraction, 2)) +
           "," + (row.topic ? "\"" + *row.topic + "\"" : std::string()) + "," + std::to_string(row.flipped) + "," +
           format_real(row.local_clean) + "," + format_real(row.local_noisy) + "," +
           format_real(row.local_degradation()) + "," + format_real(row.ensemble_clean) + "," +
           format_real(row.ensemble_noisy) + "," + format_real(row.ensemble_degradation()) + "\n";
  }
  for (const auto& s : r.summary) {
    out += "MEAN," + s.level.name() + ",,,,,," + format_real(s.mean_local_degradation) + ",,," +
           format_real(s.mean_ensemble_degradation) + "\n";
  }
  return out;
}

std::string noise_json(const NoiseReport& r) {
  ojson j;
  auto levels = ojson::array();
  for (const auto& s : r.summary) {
    ojson e;
    e["level"] = s.level.name();
    e["mean_local_degradation"] = real_or_null(s.mean_local_degradation);
    e["mean_ensemble_degradation"] = real_or_null(s.mean_ensemble_degradation);
    levels.push_back(std::move(e));
  }
  j["levels"] = std::move(levels);
  j["run"] = info_json(r.info);
  return j.dump(2);
}

std::string budget_csv(const BudgetReport& r) {
  std::string out = "domain,mode,requested_n,used_n,clipped,macro_f1\n";
  for (const auto& row : r.rows) {
    out += row.domain + "," + std::string(to_string(row.mode)) + "," + std::to_string(row.requested_n) + "," +
           std::to_string(row.used_n) + "," + (row.clipped ? "true" : "false") + "," + opt_real(row.macro_f1) + "\n";
  }
  return out;
}

std::string run_info_json(const RunInfo& info) { return info_json(info).dump(2); }

}  // namespace fedmod
