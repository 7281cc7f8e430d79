/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/metrics.hpp"

#include "fedmod/errors.hpp"

namespace fedmod {

ClassCounts Confusion::for_class(Label positive) const {
  if (positive == Label::toxic) return toxic;
  return {toxic.tn, toxic.fn, toxic.tp, toxic.fp};
}

void Confusion::add(Label predicted, Label gold) {
  const bool p = predicted == Label::toxic;
  const bool g = gold == Label::toxic;
  if (p && g) ++toxic.tp;
  else if (p && !g) ++toxic.fp;
  else if (!p && g) ++toxic.fn;
  else ++toxic.tn;
}

Confusion confusion(std::span<const Label> predictions, std::span<const Label> gold) {
  if (predictions.size() != gold.size()) throw DomainError("predictions and gold differ in length");
  Confusion c;
  for (std::size_t i = 0; i < gold.size(); ++i) c.add(predictions[i], gold[i]);
  return c;
}

double class_f1(const ClassCounts& c) {
  const double predicted = static_cast<double>(c.tp + c.fp);
  const double actual = static_cast<double>(c.tp + c.fn);
  if (predicted == 0.0 || actual == 0.0) return 0.0;
  const double precision = static_cast<double>(c.tp) / predicted;
  const double recall = static_cast<double>(c.tp) / actual;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double macro_f1(const Confusion& c) {
  if (c.total() == 0) throw DomainError("macro-F1 of an empty set");
  return 0.5 * (class_f1(c.for_class(Label::toxic)) + class_f1(c.for_class(Label::non_toxic)));
}

double macro_f1(std::span<const Label> predictions, std::span<const Label> gold) {
  if (gold.empty()) throw DomainError("macro-F1 of an empty set");
  return macro_f1(confusion(predictions, gold));
}

KappaResult cohens_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.size() != b.size()) throw DomainError("kappa inputs differ in length");
  if (a.empty()) throw DomainError("kappa of an empty set");
  const double n = static_cast<double>(a.size());
  double agree = 0.0, a_toxic = 0.0, b_toxic = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    agree += a[i] == b[i] ? 1.0 : 0.0;
    a_toxic += a[i] == Label::toxic ? 1.0 : 0.0;
    b_toxic += b[i] == Label::toxic ? 1.0 : 0.0;
  }
  const double po = agree / n;
  const double pa = a_toxic / n, pb = b_toxic / n;
  const double pe = pa * pb + (1.0 - pa) * (1.0 - pb);
  if (pe >= 1.0) return {0.0, true};
  return {(po - pe) / (1.0 - pe), false};
}

}  // namespace fedmod
