/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <set>

#include "fedmod/random.hpp"

namespace fedmod {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(5), b(5), c(6);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    differs |= x != c.next();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, BoundsAndSampling) {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LT(r.below(7), 7u);
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  const auto s = r.sample_indices(50, 20);
  EXPECT_EQ(s.size(), 20u);
  EXPECT_EQ(std::set<std::size_t>(s.begin(), s.end()).size(), 20u);
  for (auto i : s) EXPECT_LT(i, 50u);
}

TEST(DeriveSeed, TagsSeparateStreams) {
  EXPECT_EQ(derive_seed(1, "split:a"), derive_seed(1, "split:a"));
  EXPECT_NE(derive_seed(1, "split:a"), derive_seed(1, "split:b"));
  EXPECT_NE(derive_seed(1, "split:a"), derive_seed(2, "split:a"));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
}

}  // namespace
}  // namespace fedmod
