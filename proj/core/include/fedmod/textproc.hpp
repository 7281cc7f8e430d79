/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedmod/corpus.hpp"

namespace fedmod {

struct TokenizerOptions {
  /// Tokens with fewer code points than this are dropped. 1 disables the filter.
  std::size_t min_length = 2;
};

/// Lowercases, strips URLs, @-mentions and HTML tags, then splits on
/// anything that is not a letter or digit. Non-ASCII code points are kept
/// as word characters.
std::vector<std::string> tokenize(std::string_view text, const TokenizerOptions& options = {});

/// Term dictionary with document frequencies. Indices follow lexicographic
/// term order, so two vocabularies over the same terms are identical.
class Vocabulary {
 public:
  Vocabulary() = default;

  /// Builds from explicit (term, df) pairs; used by deserialization.
  static Vocabulary from_counts(std::map<std::string, std::uint64_t> df, std::uint64_t document_count);

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  std::uint64_t document_count() const { return document_count_; }

  /// -1 when the term is absent.
  std::int64_t index_of(std::string_view term) const;
  bool contains(std::string_view term) const { return index_of(term) >= 0; }
  const std::string& term(std::size_t index) const { return terms_[index]; }
  std::uint64_t document_frequency(std::size_t index) const { return df_[index]; }
  /// Throws LookupError for unknown terms.
  std::uint64_t document_frequency(std::string_view term) const;

  const std::vector<std::string>& terms() const { return terms_; }

  bool operator==(const Vocabulary&) const = default;

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint64_t> df_;
  std::uint64_t document_count_ = 0;
};

/// df(t) counts distinct toots containing t; only terms with df >= min_df
/// are kept. document_count is the number of toots.
Vocabulary build_vocabulary(std::span<const Toot> toots, std::uint64_t min_df = 2,
                            const TokenizerOptions& options = {});
Vocabulary build_vocabulary_from_tokens(std::span<const std::vector<std::string>> documents,
                                        std::uint64_t min_df = 2);

/// Sorted (index, value) pairs with no explicit zeros.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool empty() const { return entries.empty(); }
  double l1_norm() const;
  bool operator==(const SparseVector&) const = default;
};

/// Raw in-vocabulary occurrence counts.
SparseVector bow_vector(std::string_view text, const Vocabulary& vocab,
                        const TokenizerOptions& options = {});
SparseVector bow_vector(const Toot& toot, const Vocabulary& vocab,
                        const TokenizerOptions& options = {});
SparseVector bow_vector_from_tokens(std::span<const std::string> tokens, const Vocabulary& vocab);

/// ln((1 + n) / (1 + df(t))) + 1. Throws LookupError for unknown terms.
double idf(std::string_view term, const Vocabulary& vocab);
double idf_at(std::size_t index, const Vocabulary& vocab);

/// One instance's content vector: term -> tf(t) * idf(t), where tf(t) is the
/// number of occurrences of t across every toot of the instance.
struct TfIdfProfile {
  std::string instance;
  std::map<std::string, double> weights;
  std::uint64_t toot_count = 0;
  std::uint64_t version = 0;
  std::int64_t created_at = 0;

  double norm() const;
  bool operator==(const TfIdfProfile&) const = default;
};

/// `created_at` defaults to the latest toot timestamp so the profile is a
/// pure function of the corpus.
TfIdfProfile tfidf_profile(std::string_view instance, std::span<const Toot> toots,
                           const Vocabulary& vocab, const TokenizerOptions& options = {});
TfIdfProfile tfidf_profile(const InstanceCorpus& corpus, const Vocabulary& vocab,
                           const TokenizerOptions& options = {});

/// Convenience: vocabulary over all of the corpus' toots, then its profile.
TfIdfProfile build_profile(const InstanceCorpus& corpus, std::uint64_t min_df = 2,
                           const TokenizerOptions& options = {});

/// Cosine over the union of term keys. Throws DegenerateInputError when
/// either profile has zero norm.
double cosine_similarity(const TfIdfProfile& a, const TfIdfProfile& b);

/// Canonical binary encoding (terms in lexicographic order, IEEE-754 bit
/// patterns little-endian). Byte-identical for equal profiles.
std::string serialize_profile(const TfIdfProfile& profile);
TfIdfProfile deserialize_profile(std::string_view bytes);

}  // namespace fedmod
