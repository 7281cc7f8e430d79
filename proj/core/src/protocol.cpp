/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "fedmod/errors.hpp"

namespace fedmod {

SimClock::SimClock(double start, double refresh_period) : now_(start), refresh_period_(refresh_period) {
  if (!(refresh_period > 0.0)) throw DomainError("refresh period must be positive");
}

void SimClock::advance_to(double t) {
  if (t < now_) throw DomainError("simulated clock cannot move backwards");
  now_ = t;
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::profile_request: return "profile_request";
    case MessageKind::profile_response: return "profile_response";
    case MessageKind::model_request: return "model_request";
    case MessageKind::model_response: return "model_response";
  }
  return "unknown";
}

// ------------------------------------------------------------------- node

void InstanceNode::publish_profile(TfIdfProfile profile) {
  profile.instance = domain_;
  profile.version = ++profile_version_;
  profile_bytes_ = std::make_shared<const std::string>(serialize_profile(profile));
  profile_ = std::move(profile);
  withdrawn_ = false;
}

void InstanceNode::publish_model(LinearModel model) {
  ++model_version_;
  model_bytes_ = std::make_shared<const std::string>(serialize_model(model));
  model_ = std::make_shared<const LinearModel>(std::move(model));
  withdrawn_ = false;
}

void InstanceNode::withdraw() { withdrawn_ = true; }

EndpointResponse InstanceNode::serve_profile() const {
  EndpointResponse r;
  if (withdrawn_ || !profile_bytes_) return r;
  r.status = EndpointStatus::ok;
  r.version = profile_version_;
  r.model_version = model_bytes_ ? model_version_ : 0;
  r.body = profile_bytes_;
  return r;
}

EndpointResponse InstanceNode::serve_model() const {
  EndpointResponse r;
  if (withdrawn_ || !model_bytes_) return r;
  r.status = EndpointStatus::ok;
  r.version = model_version_;
  r.model_version = model_version_;
  r.body = model_bytes_;
  return r;
}

// ---------------------------------------------------------------- network

InstanceNode& SimNetwork::add_node(std::string domain) {
  auto [it, inserted] = nodes_.try_emplace(domain, domain);
  if (!inserted) throw GraphError("duplicate node " + domain);
  return it->second;
}

bool SimNetwork::has_node(std::string_view domain) const { return nodes_.contains(domain); }

InstanceNode& SimNetwork::node(std::string_view domain) {
  auto it = nodes_.find(domain);
  if (it == nodes_.end()) throw GraphError("unknown node " + std::string(domain));
  return it->second;
}

const InstanceNode& SimNetwork::node(std::string_view domain) const {
  auto it = nodes_.find(domain);
  if (it == nodes_.end()) throw GraphError("unknown node " + std::string(domain));
  return it->second;
}

std::vector<std::string> SimNetwork::domains() const {
  std::vector<std::string> out;
  for (const auto& [d, _] : nodes_) out.push_back(d);
  return out;
}

EndpointResponse SimNetwork::get(std::string_view to, std::string_view path) const {
  auto it = nodes_.find(to);
  if (it == nodes_.end()) return {};
  if (path == kProfilePath) return it->second.serve_profile();
  if (path == kModelPath) return it->second.serve_model();
  return {};
}

namespace {

struct Agent {
  std::string domain;
  std::vector<std::string> pool;
  std::size_t next_profile = 0;
  std::vector<TfIdfProfile> profiles;
  std::map<std::string, std::uint64_t> advertised_model_version;
  std::vector<std::string> selected;
  std::size_t next_model = 0;
  std::vector<ModelPtr> models;
  double next_time = 0.0;
  bool decided = false;
  bool done = false;
};

struct Event {
  double time;
  std::size_t agent;
  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    return agent > o.agent;
  }
};

}  // namespace

RoundResult SimNetwork::fetch_round(const FederationGraph* graph, const RoundOptions& options) {
  options.pairing.validate();
  if (!(options.rate_limit > 0.0) || !std::isfinite(options.rate_limit)) {
    throw DomainError("rate limit must be a positive number of requests per second");
  }
  if (options.pairing.presample_f && !graph) throw DomainError("pre-sampling needs the federation graph");

  RoundResult result;
  const double interval = 1.0 / options.rate_limit;
  result.started_at = clock_.now();

  std::vector<Agent> agents;
  for (const auto& [domain, node] : nodes_) {
    Agent a;
    a.domain = domain;
    a.next_time = clock_.now();
    if (!node.profile()) {
      result.warnings.push_back(domain + ": no local profile; skipped this round");
      continue;
    }
    InstanceRoundResult& slot = result.instances[domain];
    if (options.pairing.presample_f) {
      PresampleResult ps = presample(*graph, domain, *options.pairing.presample_f);
      for (auto& d : ps.pool) {
        if (nodes_.contains(d)) a.pool.push_back(d);
      }
      slot.decision.presampled_pool = a.pool;
      slot.decision.short_pool = ps.short_pool;
    } else {
      for (const auto& [other, _] : nodes_) {
        if (other != domain) a.pool.push_back(other);
      }
    }
    agents.push_back(std::move(a));
  }

  auto record = [&](MessageKind kind, const std::string& from, const std::string& to, double t,
                    const EndpointResponse* r) {
    if (!options.keep_message_log) return;
    ProtocolMessage m;
    m.kind = kind;
    m.from = from;
    m.to = to;
    m.sent_at = t;
    if (r) {
      m.payload = r->body;
      m.version = r->version;
    }
    result.log.push_back(std::move(m));
  };

  auto decide = [&](Agent& a) {
    InstanceRoundResult& slot = result.instances[a.domain];
    const TfIdfProfile& own = *nodes_.at(a.domain).profile();
    slot.decision.instance = a.domain;
    slot.decision.ranking = rank_peers(own, a.profiles);
    const std::size_t k = std::min(options.pairing.k, slot.decision.ranking.size());
    if (k < options.pairing.k) {
      result.warnings.push_back(a.domain + ": only " + std::to_string(k) + " peers available for k=" +
                                std::to_string(options.pairing.k));
    }
    for (std::size_t i = 0; i < k; ++i) a.selected.push_back(slot.decision.ranking[i].domain);
    slot.decision.selected = a.selected;
    a.decided = true;
  };

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  for (std::size_t i = 0; i < agents.size(); ++i) queue.push({agents[i].next_time, i});

  double last_time = clock_.now();
  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    Agent& a = agents[ev.agent];
    InstanceRoundResult& slot = result.instances[a.domain];
    bool issued = false;

    if (a.next_profile < a.pool.size()) {
      const std::string& peer = a.pool[a.next_profile++];
      const EndpointResponse r = get(peer, kProfilePath);
      ++result.profile_requests;
      record(MessageKind::profile_request, a.domain, peer, ev.time, nullptr);
      issued = true;
      if (r.ok()) {
        ++result.profile_fetches;
        record(MessageKind::profile_response, peer, a.domain, ev.time, &r);
        a.profiles.push_back(deserialize_profile(*r.body));
        a.advertised_model_version[peer] = r.model_version;
      } else {
        slot.skipped.push_back(peer);
        result.warnings.push_back(a.domain + ": profile of " + peer + " unavailable");
      }
    } else {
      if (!a.decided) decide(a);
      auto& cache = model_cache_[a.domain];
      // Cached models at the advertised version cost no request.
      while (a.next_model < a.selected.size()) {
        const std::string& peer = a.selected[a.next_model];
        auto cit = cache.find(peer);
        const std::uint64_t advertised = a.advertised_model_version[peer];
        if (cit != cache.end() && advertised != 0 && cit->second.version == advertised) {
          a.models.push_back(cit->second.model);
          ++result.cached_models;
          ++a.next_model;
          continue;
        }
        break;
      }
      if (a.next_model < a.selected.size()) {
        const std::string& peer = a.selected[a.next_model++];
        const EndpointResponse r = get(peer, kModelPath);
        ++result.model_requests;
        record(MessageKind::model_request, a.domain, peer, ev.time, nullptr);
        issued = true;
        if (r.ok()) {
          ++result.model_fetches;
          record(MessageKind::model_response, peer, a.domain, ev.time, &r);
          auto model = std::make_shared<const LinearModel>(deserialize_model(*r.body));
          cache[peer] = {r.version, model};
          a.models.push_back(std::move(model));
        } else {
          slot.skipped.push_back(peer);
          result.warnings.push_back(a.domain + ": model of " + peer + " unavailable");
        }
      }
    }

    if (issued) {
      last_time = std::max(last_time, ev.time);
      a.next_time = ev.time + interval;
      queue.push({a.next_time, ev.agent});
    } else {
      slot.models = a.models;
      a.done = true;
    }
  }

  for (Agent& a : agents) {
    if (!a.done) result.instances[a.domain].models = a.models;
  }
  clock_.advance_to(last_time);
  result.finished_at = clock_.now();
  return result;
}

std::uint64_t expected_profile_fetches(std::uint64_t instances, std::optional<std::uint64_t> pool) {
  if (instances == 0) return 0;
  const std::uint64_t others = instances - 1;
  return instances * (pool ? std::min(*pool, others) : others);
}

}  // namespace fedmod
