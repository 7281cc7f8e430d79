/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/graph.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "fedmod/errors.hpp"

namespace fedmod {

using json = nlohmann::json;

std::string UserRef::qualified() const { return handle + "@" + domain; }

UserRef UserRef::parse(std::string_view q) {
  if (!q.empty() && q.front() == '@') q.remove_prefix(1);
  const auto at = q.find('@');
  if (at == std::string_view::npos || at == 0 || at + 1 == q.size()) {
    throw SchemaError("user reference \"" + std::string(q) + "\" is not of the form handle@domain");
  }
  return {std::string(q.substr(0, at)), std::string(q.substr(at + 1))};
}

namespace {

std::pair<std::string, std::string> ordered_pair(std::string_view a, std::string_view b) {
  return a < b ? std::pair{std::string(a), std::string(b)} : std::pair{std::string(b), std::string(a)};
}

}  // namespace

void FederationGraph::add_instance(InstanceCorpus corpus) {
  if (corpus.domain.empty()) throw GraphError("instance without a domain");
  instances_[corpus.domain] = std::move(corpus);
}

bool FederationGraph::has_instance(std::string_view domain) const { return instances_.contains(domain); }

const InstanceCorpus& FederationGraph::instance(std::string_view domain) const {
  auto it = instances_.find(domain);
  if (it == instances_.end()) throw GraphError("unknown instance " + std::string(domain));
  return it->second;
}

InstanceCorpus& FederationGraph::instance(std::string_view domain) {
  auto it = instances_.find(domain);
  if (it == instances_.end()) throw GraphError("unknown instance " + std::string(domain));
  return it->second;
}

std::vector<std::string> FederationGraph::domains() const {
  std::vector<std::string> out;
  out.reserve(instances_.size());
  for (const auto& [d, _] : instances_) out.push_back(d);
  return out;
}

std::uint64_t FederationGraph::registered_users(std::string_view domain) const {
  return instance(domain).registered_user_count;
}

void FederationGraph::set_registered_users(std::string_view domain, std::uint64_t count) {
  if (count == 0) throw GraphError("registered user count must be positive");
  instance(domain).registered_user_count = count;
}

void FederationGraph::add_follow(const UserRef& follower, const UserRef& followee) {
  if (follower == followee) throw GraphError("self-follow edge for " + follower.qualified());
  InstanceCorpus& from = instance(follower.domain);
  InstanceCorpus& to = instance(followee.domain);
  if (!edges_.insert({follower, followee}).second) return;

  for (const auto& side : {std::pair{&from, &follower}, std::pair{&to, &followee}}) {
    auto& users = side.first->users;
    if (std::find(users.begin(), users.end(), side.second->handle) == users.end()) {
      users.push_back(side.second->handle);
    }
  }
  if (follower.domain != followee.domain) {
    from.follower_edges.push_back({follower.handle, followee.handle, followee.domain});
    ++pair_counts_[ordered_pair(follower.domain, followee.domain)];
  }
  followers_[followee].push_back(follower);
}

std::uint64_t FederationGraph::shared_follow_count(std::string_view a, std::string_view b) const {
  auto it = pair_counts_.find(ordered_pair(a, b));
  return it == pair_counts_.end() ? 0 : it->second;
}

const std::set<std::string>& FederationGraph::replicas(std::string_view toot_id) const {
  static const std::set<std::string> kNone;
  auto it = replicas_.find(toot_id);
  return it == replicas_.end() ? kNone : it->second;
}

void FederationGraph::set_attribute(std::string_view domain, std::string key, std::string value) {
  instance(domain);
  attributes_[std::string(domain)][std::move(key)] = std::move(value);
}

std::optional<std::string> FederationGraph::attribute(std::string_view domain, std::string_view key) const {
  auto it = attributes_.find(domain);
  if (it == attributes_.end()) return std::nullopt;
  auto jt = it->second.find(key);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

void FederationGraph::index_replica(const std::string& toot_id, const std::string& domain) {
  replicas_[toot_id].insert(domain);
}

// ---------------------------------------------------------------------------

std::set<std::string> propagate(FederationGraph& graph, const Toot& toot) {
  const InstanceCorpus& origin = graph.instance(toot.origin_instance);
  if (std::find(origin.users.begin(), origin.users.end(), toot.author) == origin.users.end()) {
    throw GraphError("author " + toot.author + " is not a user of " + toot.origin_instance);
  }
  const UserRef author{toot.author, toot.origin_instance};

  auto fit = graph.followers_.find(author);
  if (fit != graph.followers_.end()) {
    for (const UserRef& follower : fit->second) {
      if (follower.domain == toot.origin_instance) continue;
      if (graph.replicas_[toot.id].insert(follower.domain).second) {
        graph.instance(follower.domain).federated_toots.push_back(toot);
      }
    }
  }
  return graph.replicas(toot.id);
}

Reach reach(const FederationGraph& graph, const Toot& toot) {
  Reach r;
  r.instances_reached = 1;
  r.users_reached = graph.registered_users(toot.origin_instance);
  for (const auto& d : graph.replicas(toot.id)) {
    if (d == toot.origin_instance) continue;
    ++r.instances_reached;
    r.users_reached += graph.registered_users(d);
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

std::filesystem::path toots_path(const std::filesystem::path& dir, std::string_view domain) {
  std::string safe(domain);
  for (char& c : safe) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return dir / "toots" / (safe + ".jsonl");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_instance_manifest(const FederationGraph& graph, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const auto& [domain, corpus] : graph.instances()) {
    nlohmann::ordered_json j;
    j["domain"] = domain;
    j["registered_users"] = corpus.registered_user_count;
    j["users"] = corpus.users;
    if (auto it = graph.attributes().find(domain); it != graph.attributes().end()) {
      for (const auto& [k, v] : it->second) j[k] = v;
    }
    out << j.dump() << '\n';
  }
}

void write_edges(const FederationGraph& graph, const std::filesystem::path& path) {
  auto out = open_out(path);
  for (const FollowEdge& e : graph.follow_edges()) {
    nlohmann::ordered_json j;
    j["follower"] = e.follower.qualified();
    j["followee"] = e.followee.qualified();
    out << j.dump() << '\n';
  }
}

void save_federation(const FederationGraph& graph, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "toots");
  write_instance_manifest(graph, dir / "instances.jsonl");
  write_edges(graph, dir / "edges.jsonl");
  for (const auto& [domain, corpus] : graph.instances()) write_corpus(corpus, toots_path(dir, domain));
}

FederationGraph load_federation(const std::filesystem::path& dir, const LoadOptions& options) {
  const auto manifest_path = dir / "instances.jsonl";
  std::ifstream manifest(manifest_path, std::ios::binary);
  if (!manifest) throw IoError("no instance manifest at " + manifest_path.string());

  FederationGraph graph;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(manifest, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = manifest_path.filename().string() + " line " + std::to_string(line_number) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + e.what());
    }
    if (!j.is_object() || !j.contains("domain") || !j["domain"].is_string()) {
      throw SchemaError(where + "missing string field \"domain\"");
    }
    const std::string domain = j["domain"].get<std::string>();
    const auto toots = toots_path(dir, domain);
    InstanceCorpus corpus;
    if (std::filesystem::exists(toots)) {
      corpus = load_corpus(toots, domain, options);
    } else {
      corpus.domain = domain;
    }
    if (auto it = j.find("users"); it != j.end()) {
      if (!it->is_array()) throw SchemaError(where + "\"users\" must be an array");
      for (const auto& u : *it) {
        const auto handle = u.get<std::string>();
        if (std::find(corpus.users.begin(), corpus.users.end(), handle) == corpus.users.end()) {
          corpus.users.push_back(handle);
        }
      }
    }
    if (auto it = j.find("registered_users"); it != j.end()) {
      if (!it->is_number_integer() || it->get<std::int64_t>() <= 0) {
        throw SchemaError(where + "\"registered_users\" must be a positive integer");
      }
      corpus.registered_user_count = it->get<std::uint64_t>();
    } else {
      corpus.registered_user_count = std::max<std::uint64_t>(1, corpus.users.size());
    }
    std::vector<std::string> replica_ids;
    for (const Toot& t : corpus.federated_toots) replica_ids.push_back(t.id);
    graph.add_instance(std::move(corpus));
    for (const auto& id : replica_ids) graph.index_replica(id, domain);
    for (auto& [k, v] : j.items()) {
      if (k == "domain" || k == "users" || k == "registered_users") continue;
      graph.set_attribute(domain, k, v.is_string() ? v.get<std::string>() : v.dump());
    }
  }

  const auto edges_path = dir / "edges.jsonl";
  std::ifstream edges(edges_path, std::ios::binary);
  if (edges) {
    line_number = 0;
    while (std::getline(edges, line)) {
      ++line_number;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = "edges.jsonl line " + std::to_string(line_number) + ": ";
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(where + e.what());
      }
      if (!j.is_object() || !j.contains("follower") || !j.contains("followee") || !j["follower"].is_string() ||
          !j["followee"].is_string()) {
        throw SchemaError(where + "edge needs string fields \"follower\" and \"followee\"");
      }
      graph.add_follow(UserRef::parse(j["follower"].get<std::string>()),
                       UserRef::parse(j["followee"].get<std::string>()));
    }
  }
  return graph;
}

}  // namespace fedmod
