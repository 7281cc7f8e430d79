/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedmod/classifier.hpp"
#include "fedmod/metrics.hpp"

namespace fedmod {

using ModelPtr = std::shared_ptr<const LinearModel>;

enum class TieRule : std::uint8_t { mean_score, local_fallback };

/// Majority vote over retrieved peer models.
class Ensemble {
 public:
  /// Throws DomainError for an empty member list or local_fallback without
  /// a local model.
  Ensemble(std::vector<ModelPtr> members, TieRule tie_rule = TieRule::mean_score,
           ModelPtr local_model = nullptr);

  const std::vector<ModelPtr>& members() const { return members_; }
  TieRule tie_rule() const { return tie_rule_; }
  const ModelPtr& local_model() const { return local_; }

  /// Returns a copy whose member list also contains the local model.
  Ensemble with_local_member() const;

 private:
  std::vector<ModelPtr> members_;
  TieRule tie_rule_;
  ModelPtr local_;
};

struct VoteResult {
  Label label = Label::non_toxic;
  std::vector<Label> member_labels;
  std::vector<double> member_scores;
  bool tie = false;
};

VoteResult vote(const Ensemble& ensemble, const Toot& toot, const TokenizerOptions& options = {});

/// Resolves a vote from per-member outputs; `local_label` is consulted only
/// on a tie under local_fallback.
Label resolve_vote(std::span<const Label> labels, std::span<const double> scores, TieRule rule,
                   std::optional<Label> local_label, bool* tie = nullptr);

struct EvalResult {
  double macro_f1 = 0.0;
  Confusion confusion;
};

/// Throws DomainError for an empty or unlabeled test set.
EvalResult evaluate(const Ensemble& ensemble, std::span<const Toot> test_set,
                    const TokenizerOptions& options = {});
EvalResult evaluate(const LinearModel& model, std::span<const Toot> test_set,
                    const TokenizerOptions& options = {});

/// Streams labels for incoming toots in order.
std::vector<Label> classify_stream(const Ensemble& ensemble, std::span<const Toot> incoming,
                                   const TokenizerOptions& options = {});

/// One JSON object per toot for moderation audits.
std::string audit_record_json(const Toot& toot, const VoteResult& result);

}  // namespace fedmod
