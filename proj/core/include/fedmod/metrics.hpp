/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <span>

#include "fedmod/corpus.hpp"

namespace fedmod {

struct ClassCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  bool operator==(const ClassCounts&) const = default;
};

/// Binary confusion matrix, viewable from either class.
struct Confusion {
  /// Counts with `toxic` as the positive class.
  ClassCounts toxic;

  ClassCounts for_class(Label positive) const;
  std::uint64_t total() const { return toxic.tp + toxic.fp + toxic.tn + toxic.fn; }
  void add(Label predicted, Label gold);
};

Confusion confusion(std::span<const Label> predictions, std::span<const Label> gold);

/// F1 of one class; 0 when precision or recall is undefined.
double class_f1(const ClassCounts& counts);

/// Unweighted mean of both per-class F1 values. Throws DomainError on
/// empty or mismatched inputs.
double macro_f1(std::span<const Label> predictions, std::span<const Label> gold);
double macro_f1(const Confusion& c);

struct KappaResult {
  double value = 0.0;
  /// Expected agreement was 1, so kappa is undefined and value is 0.
  bool degenerate = false;
};

KappaResult cohens_kappa(std::span<const Label> a, std::span<const Label> b);

}  // namespace fedmod
