/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/ensemble.hpp"

#include <json.hpp>

#include "fedmod/errors.hpp"

namespace fedmod {

Ensemble::Ensemble(std::vector<ModelPtr> members, TieRule tie_rule, ModelPtr local_model)
    : members_(std::move(members)), tie_rule_(tie_rule), local_(std::move(local_model)) {
  if (members_.empty()) throw DomainError("an ensemble needs at least one member");
  for (const auto& m : members_) {
    if (!m) throw DomainError("null ensemble member");
  }
  if (tie_rule_ == TieRule::local_fallback && !local_) {
    throw DomainError("local_fallback tie rule requires a local model");
  }
}

Ensemble Ensemble::with_local_member() const {
  if (!local_) throw DomainError("ensemble has no local model to include");
  auto members = members_;
  members.push_back(local_);
  return Ensemble(std::move(members), tie_rule_, local_);
}

Label resolve_vote(std::span<const Label> labels, std::span<const double> scores, TieRule rule,
                   std::optional<Label> local_label, bool* tie) {
  std::size_t toxic = 0;
  for (Label l : labels) toxic += l == Label::toxic ? 1 : 0;
  const std::size_t nontoxic = labels.size() - toxic;
  if (tie) *tie = toxic == nontoxic;
  if (toxic > nontoxic) return Label::toxic;
  if (nontoxic > toxic) return Label::non_toxic;

  if (rule == TieRule::local_fallback) {
    if (!local_label) throw DomainError("tie under local_fallback without a local label");
    return *local_label;
  }
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size()) > 0.5 ? Label::toxic : Label::non_toxic;
}

VoteResult vote(const Ensemble& ensemble, const Toot& toot, const TokenizerOptions& options) {
  VoteResult r;
  const auto tokens = tokenize(toot.text, options);
  r.member_labels.reserve(ensemble.members().size());
  r.member_scores.reserve(ensemble.members().size());
  for (const ModelPtr& m : ensemble.members()) {
    const double s = m->score(bow_vector_from_tokens(tokens, m->vocabulary()));
    r.member_scores.push_back(s);
    r.member_labels.push_back(s > 0.5 ? Label::toxic : Label::non_toxic);
  }
  // The local model is only evaluated when a tie actually needs it.
  std::size_t toxic = 0;
  for (Label l : r.member_labels) toxic += l == Label::toxic ? 1 : 0;
  std::optional<Label> local_label;
  if (2 * toxic == r.member_labels.size() && ensemble.tie_rule() == TieRule::local_fallback) {
    local_label = ensemble.local_model()->predict(bow_vector_from_tokens(tokens, ensemble.local_model()->vocabulary()));
  }
  r.label = resolve_vote(r.member_labels, r.member_scores, ensemble.tie_rule(), local_label, &r.tie);
  return r;
}

namespace {

template <typename Predict>
EvalResult evaluate_with(std::span<const Toot> test_set, Predict&& predict) {
  if (test_set.empty()) throw DomainError("evaluation on an empty test set");
  EvalResult r;
  for (const Toot& t : test_set) {
    if (!t.label) throw DomainError("test toot " + t.id + " is unlabeled");
    r.confusion.add(predict(t), *t.label);
  }
  r.macro_f1 = macro_f1(r.confusion);
  return r;
}

}  // namespace

EvalResult evaluate(const Ensemble& ensemble, std::span<const Toot> test_set, const TokenizerOptions& options) {
  return evaluate_with(test_set, [&](const Toot& t) { return vote(ensemble, t, options).label; });
}

EvalResult evaluate(const LinearModel& model, std::span<const Toot> test_set, const TokenizerOptions& options) {
  return evaluate_with(test_set, [&](const Toot& t) { return predict_label(model, t, options); });
}

std::vector<Label> classify_stream(const Ensemble& ensemble, std::span<const Toot> incoming,
                                   const TokenizerOptions& options) {
  std::vector<Label> out;
  out.reserve(incoming.size());
  for (const Toot& t : incoming) out.push_back(vote(ensemble, t, options).label);
  return out;
}

std::string audit_record_json(const Toot& toot, const VoteResult& result) {
  nlohmann::ordered_json j;
  j["toot_id"] = toot.id;
  auto labels = nlohmann::ordered_json::array();
  for (Label l : result.member_labels) labels.push_back(std::string(to_string(l)));
  j["member_labels"] = std::move(labels);
  j["member_scores"] = result.member_scores;
  j["final_label"] = std::string(to_string(result.label));
  if (result.tie) j["tie"] = true;
  return j.dump();
}

}  // namespace fedmod
