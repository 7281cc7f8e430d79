/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedmod/corpus.hpp"

namespace fedmod {

/// A user handle qualified by the instance it is registered on.
struct UserRef {
  std::string handle;
  std::string domain;

  /// "handle@domain"
  std::string qualified() const;
  static UserRef parse(std::string_view qualified);

  auto operator<=>(const UserRef&) const = default;
};

struct FollowEdge {
  UserRef follower;
  UserRef followee;

  auto operator<=>(const FollowEdge&) const = default;
};

/// Instances, their corpora and the user-level follow graph between them.
class FederationGraph {
 public:
  /// Adds or replaces an instance. Its registered users default to the
  /// corpus' registered_user_count.
  void add_instance(InstanceCorpus corpus);
  /// Throws GraphError for unknown domains or self-follows.
  void add_follow(const UserRef& follower, const UserRef& followee);

  bool has_instance(std::string_view domain) const;
  const InstanceCorpus& instance(std::string_view domain) const;
  InstanceCorpus& instance(std::string_view domain);
  std::vector<std::string> domains() const;
  std::size_t instance_count() const { return instances_.size(); }

  const std::map<std::string, InstanceCorpus, std::less<>>& instances() const { return instances_; }
  const std::set<FollowEdge>& follow_edges() const { return edges_; }
  std::uint64_t registered_users(std::string_view domain) const;
  void set_registered_users(std::string_view domain, std::uint64_t count);

  /// Follow edges between a and b in either direction.
  std::uint64_t shared_follow_count(std::string_view a, std::string_view b) const;

  /// Domains (other than the origin) already holding a replica of toot id.
  const std::set<std::string>& replicas(std::string_view toot_id) const;
  /// Records that `domain` already holds toot id (used when loading stores).
  void index_replica(const std::string& toot_id, const std::string& domain);

  /// Free-form per-instance metadata carried through the manifest.
  void set_attribute(std::string_view domain, std::string key, std::string value);
  std::optional<std::string> attribute(std::string_view domain, std::string_view key) const;
  const std::map<std::string, std::map<std::string, std::string, std::less<>>, std::less<>>& attributes() const {
    return attributes_;
  }

 private:
  friend std::set<std::string> propagate(FederationGraph& graph, const Toot& toot);

  std::map<std::string, InstanceCorpus, std::less<>> instances_;
  std::set<FollowEdge> edges_;
  std::map<UserRef, std::vector<UserRef>> followers_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts_;
  std::map<std::string, std::set<std::string>, std::less<>> replicas_;
  std::map<std::string, std::map<std::string, std::string, std::less<>>, std::less<>> attributes_;
};

/// Pushes a toot to every instance hosting a follower of its author
/// (origin excluded). Idempotent per (toot, instance). Throws GraphError if
/// the author is not a user of the origin instance.
std::set<std::string> propagate(FederationGraph& graph, const Toot& toot);

struct Reach {
  std::uint64_t instances_reached = 0;
  std::uint64_t users_reached = 0;

  bool operator==(const Reach&) const = default;
};

/// Origin plus current replicas, and the sum of their registered users.
Reach reach(const FederationGraph& graph, const Toot& toot);

// ---------------------------------------------------------------------------
// On-disk federation store:
//   instances.jsonl        {"domain": ..., "registered_users": ...}
//   edges.jsonl            {"follower": "u@a", "followee": "v@b"}
//   toots/<domain>.jsonl   the instance's timeline, one toot per line

void save_federation(const FederationGraph& graph, const std::filesystem::path& dir);
FederationGraph load_federation(const std::filesystem::path& dir, const LoadOptions& options = {});

void write_instance_manifest(const FederationGraph& graph, const std::filesystem::path& path);
void write_edges(const FederationGraph& graph, const std::filesystem::path& path);

}  // namespace fedmod
