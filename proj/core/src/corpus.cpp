/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fedmod/errors.hpp"
#include "fedmod/random.hpp"

namespace fedmod {

using json = nlohmann::json;

std::string_view to_string(Label l) { return l == Label::toxic ? "toxic" : "non-toxic"; }

Label label_from_string(std::string_view s) {
  if (s == "toxic") return Label::toxic;
  if (s == "non-toxic") return Label::non_toxic;
  throw SchemaError("label must be \"toxic\" or \"non-toxic\", got \"" + std::string(s) + "\"");
}

std::string_view to_string(SampleMode m) { return m == SampleMode::first ? "first" : "random"; }

std::vector<Toot> InstanceCorpus::all_toots() const {
  std::vector<Toot> out;
  out.reserve(size());
  out.insert(out.end(), local_toots.begin(), local_toots.end());
  out.insert(out.end(), federated_toots.begin(), federated_toots.end());
  return out;
}

void LabelConfig::validate() const {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw DomainError("label threshold must lie in (0, 1), got " + std::to_string(threshold));
  }
}

void NoiseConfig::validate() const {
  if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) {
    throw DomainError("noise fraction must lie in [0, 1], got " + std::to_string(flip_fraction));
  }
  if (mode == NoiseMode::topic_whitelist && !topic) {
    throw DomainError("topic_whitelist noise requires a topic");
  }
  if (mode == NoiseMode::random_flip && topic) {
    throw DomainError("random_flip noise does not take a topic");
  }
}

// ---------------------------------------------------------------------------

namespace {

template <typename T>
T required(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw SchemaError("line " + std::to_string(line) + ": missing required field \"" + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw SchemaError("line " + std::to_string(line) + ": field \"" + key + "\" has the wrong type");
  }
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Toot parse_toot_record(std::string_view line, std::size_t line_number, const LabelConfig& labels) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line_number) + ": " + e.what());
  }
  if (!obj.is_object()) {
    throw SchemaError("line " + std::to_string(line_number) + ": record is not a JSON object");
  }

  Toot t;
  t.id = required<std::string>(obj, "id", line_number);
  t.origin_instance = required<std::string>(obj, "origin_instance", line_number);
  t.author = required<std::string>(obj, "author", line_number);
  t.text = required<std::string>(obj, "text", line_number);
  {
    auto it = obj.find("timestamp");
    if (it == obj.end() || !it->is_number_integer()) {
      throw SchemaError("line " + std::to_string(line_number) +
                        ": field \"timestamp\" must be an integer number of seconds");
    }
    t.timestamp = it->get<std::int64_t>();
  }

  auto opt = [&](const char* key) -> const json* {
    auto it = obj.find(key);
    return (it == obj.end() || it->is_null()) ? nullptr : &*it;
  };
  const std::string where = "line " + std::to_string(line_number) + ": ";

  if (const json* v = opt("toxicity_score")) {
    if (!v->is_number()) throw SchemaError(where + "field \"toxicity_score\" must be a number");
    const double s = v->get<double>();
    if (!(s >= 0.0 && s <= 1.0)) throw SchemaError(where + "toxicity_score outside [0, 1]");
    t.toxicity_score = s;
  }
  if (const json* v = opt("label")) {
    if (!v->is_string()) throw SchemaError(where + "field \"label\" must be a string");
    try {
      t.label = label_from_string(v->get<std::string>());
    } catch (const SchemaError& e) {
      throw SchemaError(where + e.what());
    }
  }
  // The score is authoritative: labels always agree with the active threshold.
  if (t.toxicity_score) t.label = label_from_score(*t.toxicity_score, labels);

  if (const json* v = opt("content_warning")) {
    if (!v->is_boolean()) throw SchemaError(where + "field \"content_warning\" must be a boolean");
    t.content_warning = v->get<bool>();
  }
  if (const json* v = opt("reblog_count")) {
    if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
      throw SchemaError(where + "field \"reblog_count\" must be a nonnegative integer");
    }
    t.reblog_count = v->get<std::uint64_t>();
  }
  if (const json* v = opt("topic")) {
    if (!v->is_string()) throw SchemaError(where + "field \"topic\" must be a string");
    t.topic = v->get<std::string>();
  }
  return t;
}

std::string to_jsonl_record(const Toot& t) {
  nlohmann::ordered_json obj;
  obj["id"] = t.id;
  obj["origin_instance"] = t.origin_instance;
  obj["author"] = t.author;
  obj["text"] = t.text;
  obj["timestamp"] = t.timestamp;
  if (t.toxicity_score) obj["toxicity_score"] = *t.toxicity_score;
  if (t.label) obj["label"] = std::string(to_string(*t.label));
  if (t.content_warning) obj["content_warning"] = true;
  if (t.reblog_count != 0) obj["reblog_count"] = t.reblog_count;
  if (t.topic) obj["topic"] = *t.topic;
  return obj.dump();
}

InstanceCorpus load_corpus(std::istream& in, std::string_view domain, const LoadOptions& options) {
  options.labels.validate();
  InstanceCorpus corpus;
  corpus.domain = std::string(domain);
  std::set<std::string> seen_users;
  std::set<std::string> seen_ids;

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    Toot t = parse_toot_record(line, line_number, options.labels);
    if (options.drop_empty_text && blank(t.text)) continue;
    if (!seen_ids.insert(t.id).second) {
      throw SchemaError("line " + std::to_string(line_number) + ": duplicate toot id \"" + t.id + "\"");
    }
    if (t.origin_instance == domain) {
      if (seen_users.insert(t.author).second) corpus.users.push_back(t.author);
      corpus.local_toots.push_back(std::move(t));
    } else {
      corpus.federated_toots.push_back(std::move(t));
    }
  }
  corpus.registered_user_count = std::max<std::uint64_t>(1, corpus.users.size());
  return corpus;
}

InstanceCorpus load_corpus(const std::filesystem::path& path, std::string_view domain,
                           const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open toot file " + path.string());
  return load_corpus(in, domain, options);
}

void write_corpus(const InstanceCorpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write toot file " + path.string());
  for (const auto* part : {&corpus.local_toots, &corpus.federated_toots}) {
    for (const Toot& t : *part) out << to_jsonl_record(t) << '\n';
  }
}

// ---------------------------------------------------------------------------

Label label_from_score(double score, const LabelConfig& cfg) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw DomainError("toxicity score must lie in [0, 1], got " + std::to_string(score));
  }
  cfg.validate();
  return score > cfg.threshold ? Label::toxic : Label::non_toxic;
}

Label user_toxicity(std::span<const Toot> toots_of_user) {
  if (toots_of_user.empty()) throw DomainError("user toxicity needs at least one toot");
  double sum = 0.0;
  for (const Toot& t : toots_of_user) {
    if (!t.toxicity_score) throw DomainError("toot " + t.id + " has no toxicity score");
    sum += *t.toxicity_score;
  }
  return sum / static_cast<double>(toots_of_user.size()) > 0.5 ? Label::toxic : Label::non_toxic;
}

void apply_label_scheme(std::span<Toot> toots, LabelScheme scheme, const LabelConfig& cfg) {
  for (Toot& t : toots) {
    if (scheme == LabelScheme::content_warning) {
      t.label = t.content_warning ? Label::toxic : Label::non_toxic;
    } else if (t.toxicity_score) {
      t.label = label_from_score(*t.toxicity_score, cfg);
    }
  }
}

std::size_t count_label(std::span<const Toot> toots, Label label) {
  return static_cast<std::size_t>(
      std::count_if(toots.begin(), toots.end(), [&](const Toot& t) { return t.label == label; }));
}

// ---------------------------------------------------------------------------

TrainTestSplit split_train_test(std::span<const Toot> toots, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("split ratio must lie in (0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < toots.size(); ++i) {
    if (!toots[i].label) throw StratificationError("toot " + toots[i].id + " is unlabeled");
    by_class[static_cast<int>(*toots[i].label)].push_back(i);
  }
  for (int c = 0; c < 2; ++c) {
    if (by_class[c].size() < 2) {
      throw StratificationError("class " + std::string(to_string(static_cast<Label>(c))) + " has " +
                                std::to_string(by_class[c].size()) + " members; need at least 2");
    }
  }

  std::vector<char> in_train(toots.size(), 0);
  Rng rng(seed);
  for (auto& members : by_class) {
    rng.shuffle(members);
    auto take = static_cast<std::size_t>(std::nearbyint(ratio * static_cast<double>(members.size())));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    for (std::size_t i = 0; i < take; ++i) in_train[members[i]] = 1;
  }

  // Both sides keep the input order.
  TrainTestSplit split;
  for (std::size_t i = 0; i < toots.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(toots[i]);
  }
  return split;
}

TrainTestSplit split_train_test(const InstanceCorpus& corpus, double ratio, std::uint64_t seed) {
  const auto all = corpus.all_toots();
  return split_train_test(std::span<const Toot>(all), ratio, seed);
}

std::vector<std::size_t> noise_flip_indices(std::size_t count, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw DomainError("noise fraction must lie in [0, 1], got " + std::to_string(fraction));
  }
  // nearbyint under the default rounding mode rounds half to even.
  const auto flips = static_cast<std::size_t>(std::nearbyint(fraction * static_cast<double>(count)));
  Rng rng(seed);
  auto idx = rng.sample_indices(count, flips);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<Toot> inject_noise(std::span<const Toot> toots, const NoiseConfig& cfg) {
  cfg.validate();
  std::vector<Toot> out(toots.begin(), toots.end());
  for (const Toot& t : out) {
    if (!t.label) throw DomainError("toot " + t.id + " is unlabeled");
  }
  if (cfg.mode == NoiseMode::random_flip) {
    for (std::size_t i : noise_flip_indices(out.size(), cfg.flip_fraction, cfg.seed)) {
      out[i].label = flip(*out[i].label);
    }
  } else {
    for (Toot& t : out) {
      if (t.topic && *t.topic == *cfg.topic) t.label = Label::non_toxic;
    }
  }
  return out;
}

std::vector<Toot> sample_budget(std::span<const Toot> toots, std::size_t n, SampleMode mode,
                                std::uint64_t seed) {
  if (n > toots.size()) {
    throw BoundsError("budget of " + std::to_string(n) + " toots exceeds the " +
                      std::to_string(toots.size()) + " available");
  }
  std::vector<std::size_t> order;
  if (mode == SampleMode::first) {
    order.resize(toots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (toots[a].timestamp != toots[b].timestamp) return toots[a].timestamp < toots[b].timestamp;
      return toots[a].id < toots[b].id;
    });
    order.resize(n);
  } else {
    Rng rng(seed);
    order = rng.sample_indices(toots.size(), n);
    std::sort(order.begin(), order.end());
  }
  std::vector<Toot> out;
  out.reserve(n);
  for (std::size_t i : order) out.push_back(toots[i]);
  return out;
}

std::optional<std::string> most_popular_topic(std::span<const Toot> toots,
                                              std::span<const std::string> excluded) {
  std::map<std::string, std::size_t> counts;
  for (const Toot& t : toots) {
    if (!t.topic) continue;
    if (std::find(excluded.begin(), excluded.end(), *t.topic) != excluded.end()) continue;
    ++counts[*t.topic];
  }
  std::optional<std::string> best;
  std::size_t best_count = 0;
  for (const auto& [topic, c] : counts) {
    if (c > best_count) {
      best = topic;
      best_count = c;
    }
  }
  return best;
}

}  // namespace fedmod
