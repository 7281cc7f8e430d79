/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedmod/classifier.hpp"
#include "fedmod/ensemble.hpp"
#include "fedmod/graph.hpp"
#include "fedmod/pairing.hpp"
#include "fedmod/textproc.hpp"

namespace fedmod {

inline constexpr std::string_view kProfilePath = "/api/v1/tfidf";
inline constexpr std::string_view kModelPath = "/api/v1/model";
inline constexpr std::string_view kVersionHeader = "X-Fedmod-Version";

/// Simulated wall clock in seconds. Only moves forward.
class SimClock {
 public:
  static constexpr double kDefaultRefreshPeriod = 604800.0;  // one week

  explicit SimClock(double start = 0.0, double refresh_period = kDefaultRefreshPeriod);

  double now() const { return now_; }
  double refresh_period() const { return refresh_period_; }
  /// Throws DomainError if t < now().
  void advance_to(double t);
  void advance_by(double dt) { advance_to(now_ + dt); }

 private:
  double now_;
  double refresh_period_;
};

enum class EndpointStatus : std::uint8_t { ok, unavailable };

struct EndpointResponse {
  EndpointStatus status = EndpointStatus::unavailable;
  std::uint64_t version = 0;
  /// Profile responses advertise the serving node's current model version
  /// so peers can skip re-downloading an unchanged model.
  std::uint64_t model_version = 0;
  std::shared_ptr<const std::string> body;

  bool ok() const { return status == EndpointStatus::ok; }
};

/// The two pairing endpoints of one instance: its published tf-idf profile
/// and its local moderation model, both served as canonical bytes.
class InstanceNode {
 public:
  explicit InstanceNode(std::string domain) : domain_(std::move(domain)) {}

  const std::string& domain() const { return domain_; }

  /// Stamps the next profile version and caches the serialized form.
  void publish_profile(TfIdfProfile profile);
  void publish_model(LinearModel model);
  void withdraw();

  EndpointResponse serve_profile() const;
  EndpointResponse serve_model() const;

  std::uint64_t profile_version() const { return profile_version_; }
  std::uint64_t model_version() const { return model_version_; }
  const std::optional<TfIdfProfile>& profile() const { return profile_; }
  const ModelPtr& model() const { return model_; }

 private:
  std::string domain_;
  std::optional<TfIdfProfile> profile_;
  std::shared_ptr<const std::string> profile_bytes_;
  std::uint64_t profile_version_ = 0;
  ModelPtr model_;
  std::shared_ptr<const std::string> model_bytes_;
  std::uint64_t model_version_ = 0;
  bool withdrawn_ = false;
};

enum class MessageKind : std::uint8_t { profile_request, profile_response, model_request, model_response };

std::string_view to_string(MessageKind kind);

struct ProtocolMessage {
  MessageKind kind = MessageKind::profile_request;
  std::string from;
  std::string to;
  std::shared_ptr<const std::string> payload;
  std::uint64_t version = 0;
  double sent_at = 0.0;
};

struct RoundOptions {
  PairingConfig pairing;
  /// Requests per simulated second, per requesting instance.
  double rate_limit = 10.0;
  bool keep_message_log = false;
};

struct InstanceRoundResult {
  PairingDecision decision;
  /// Models of the selected peers, in selection order.
  std::vector<ModelPtr> models;
  std::vector<std::string> skipped;
};

struct RoundResult {
  std::map<std::string, InstanceRoundResult> instances;
  std::uint64_t profile_requests = 0;
  std::uint64_t profile_fetches = 0;
  std::uint64_t model_requests = 0;
  std::uint64_t model_fetches = 0;
  std::uint64_t cached_models = 0;
  double started_at = 0.0;
  double finished_at = 0.0;
  std::vector<ProtocolMessage> log;
  std::vector<std::string> warnings;
};

/// In-process federation transport: nodes, the simulated clock and each
/// instance's cache of retrieved models.
class SimNetwork {
 public:
  explicit SimNetwork(SimClock clock = SimClock{}) : clock_(clock) {}

  InstanceNode& add_node(std::string domain);
  bool has_node(std::string_view domain) const;
  InstanceNode& node(std::string_view domain);
  const InstanceNode& node(std::string_view domain) const;
  std::vector<std::string> domains() const;

  SimClock& clock() { return clock_; }
  const SimClock& clock() const { return clock_; }

  /// Profile and model requests routed through the endpoints.
  EndpointResponse get(std::string_view to, std::string_view path) const;

  /// One pairing refresh: each instance fetches candidate profiles (every
  /// other node, or its pre-sampled pool from `graph`), ranks them, selects
  /// k peers and fetches their models. A model already cached at the current
  /// version is reused. Requests from one instance are spaced 1/rate_limit
  /// apart in simulated time; events run in (time, requester) order.
  RoundResult fetch_round(const FederationGraph* graph, const RoundOptions& options);

 private:
  struct CachedModel {
    std::uint64_t version = 0;
    ModelPtr model;
  };

  SimClock clock_;
  std::map<std::string, InstanceNode, std::less<>> nodes_;
  std::map<std::string, std::map<std::string, CachedModel>> model_cache_;
};

/// Closed-form profile fetch count for N instances with pool size p.
std::uint64_t expected_profile_fetches(std::uint64_t instances, std::optional<std::uint64_t> pool);

}  // namespace fedmod
