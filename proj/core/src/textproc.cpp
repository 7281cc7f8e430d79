/**
 * Copyright fedmod contributors. All Rights Reserved.
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fedmod/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "codec.hpp"
#include "fedmod/errors.hpp"

namespace fedmod {

namespace {

// ------------------------------------------------------------------ UTF-8

struct Decoded {
  char32_t cp;
  std::size_t len;
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3), 4};
    }
  }
  return {U'\uFFFD', 1};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

// Letters and digits, approximated by excluding punctuation, symbol,
// space and emoji blocks from the non-ASCII range.
bool is_word_char(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
  }
  if (cp == 0xFFFD) return false;
  if (cp >= 0x80 && cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;   // punctuation, symbols, arrows, dingbats
  if (cp >= 0x3000 && cp <= 0x303F) return false;   // CJK punctuation
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;   // variation selectors
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;   // fullwidth punctuation
  if (cp >= 0x1F000 && cp <= 0x1FAFF) return false; // emoji and pictographs
  if (cp == 0x200D || cp == 0xFEFF) return false;
  return true;
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  return cp;
}

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[pos + i]);
    if (std::tolower(c) != prefix[i]) return false;
  }
  return true;
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Replaces HTML tags and entities with spaces.
std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '<' && i + 1 < text.size()) {
      const auto n = static_cast<unsigned char>(text[i + 1]);
      if (std::isalpha(n) || n == '/' || n == '!') {
        const auto close = text.find('>', i + 1);
        if (close != std::string_view::npos) {
          out.push_back(' ');
          i = close;
          continue;
        }
      }
    }
    if (c == '&') {
      std::size_t j = i + 1;
      while (j < text.size() && j - i <= 10 &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '#')) {
        ++j;
      }
      if (j < text.size() && text[j] == ';' && j > i + 1) {
        out.push_back(' ');
        i = j;
        continue;
      }
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw, const TokenizerOptions& options) {
  const std::string text = strip_markup(raw);
  std::vector<std::string> tokens;

  std::string current;
  std::size_t current_len = 0;
  auto flush = [&] {
    if (!current.empty() && current_len >= options.min_length) tokens.push_back(current);
    current.clear();
    current_len = 0;
  };

  const std::string_view s = text;
  std::size_t i = 0;
  bool at_boundary = true;  // previous char was not a word char
  while (i < s.size()) {
    if (is_space(static_cast<unsigned char>(s[i]))) {
      flush();
      at_boundary = true;
      ++i;
      continue;
    }
    // URLs and mentions run to the next whitespace.
    const bool url = starts_with_ci(s, i, "http://") || starts_with_ci(s, i, "https://") ||
                     (at_boundary && starts_with_ci(s, i, "www."));
    const bool mention = s[i] == '@' && at_boundary;
    if (url || mention) {
      flush();
      while (i < s.size() && !is_space(static_cast<unsigned char>(s[i]))) ++i;
      continue;
    }
    const Decoded d = decode_utf8(s, i);
    if (is_word_char(d.cp)) {
      append_utf8(current, to_lower(d.cp));
      ++current_len;
      at_boundary = false;
    } else {
      flush();
      at_boundary = true;
    }
    i += d.len;
  }
  flush();
  return tokens;
}

// ------------------------------------------------------------- Vocabulary

Vocabulary Vocabulary::from_counts(std::map<std::string, std::uint64_t> df, std::uint64_t document_count) {
  Vocabulary v;
  v.document_count_ = document_count;
  v.terms_.reserve(df.size());
  v.df_.reserve(df.size());
  for (auto& [term, count] : df) {
    if (count < 1 || count > document_count) {
      throw DomainError("document frequency of \"" + term + "\" outside [1, n]");
    }
    v.terms_.push_back(term);
    v.df_.push_back(count);
  }
  return v;
}

std::int64_t Vocabulary::index_of(std::string_view term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == terms_.end() || *it != term) return -1;
  return it - terms_.begin();
}

std::uint64_t Vocabulary::document_frequency(std::string_view term) const {
  const auto idx = index_of(term);
  if (idx < 0) throw LookupError("term \"" + std::string(term) + "\" is not in the vocabulary");
  return df_[static_cast<std::size_t>(idx)];
}

Vocabulary build_vocabulary_from_tokens(std::span<const std::vector<std::string>> documents,
                                        std::uint64_t min_df) {
  std::map<std::string, std::uint64_t> df;
  std::set<std::string_view> seen;
  for (const auto& doc : documents) {
    seen.clear();
    for (const auto& tok : doc) {
      if (seen.insert(tok).second) ++df[tok];
    }
  }
  std::erase_if(df, [&](const auto& kv) { return kv.second < min_df; });
  return Vocabulary::from_counts(std::move(df), documents.size());
}

Vocabulary build_vocabulary(std::span<const Toot> toots, std::uint64_t min_df, const TokenizerOptions& options) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(toots.size());
  for (const Toot& t : toots) docs.push_back(tokenize(t.text, options));
  return build_vocabulary_from_tokens(docs, min_df);
}

// ---------------------------------------------------------- Sparse vectors

double SparseVector::l1_norm() const {
  double s = 0.0;
  for (const auto& [_, v] : entries) s += std::abs(v);
  return s;
}

SparseVector bow_vector_from_tokens(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<std::uint32_t> idx;
  idx.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const auto i = vocab.index_of(tok);
    if (i >= 0) idx.push_back(static_cast<std::uint32_t>(i));
  }
  std::sort(idx.begin(), idx.end());
  SparseVector v;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && idx[j] == idx[i]) ++j;
    v.entries.emplace_back(idx[i], static_cast<double>(j - i));
    i = j;
  }
  return v;
}

SparseVector bow_vector(std::string_view text, const Vocabulary& vocab, const TokenizerOptions& options) {
  const auto tokens = tokenize(text, options);
  return bow_vector_from_tokens(tokens, vocab);
}

SparseVector bow_vector(const Toot& toot, const Vocabulary& vocab, const TokenizerOptions& options) {
  return bow_vector(toot.text, vocab, options);
}

// ----------------------------------------------------------------- tf-idf

double idf_at(std::size_t index, const Vocabulary& vocab) {
  const double n = static_cast<double>(vocab.document_count());
  const double df = static_cast<double>(vocab.document_frequency(index));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

double idf(std::string_view term, const Vocabulary& vocab) {
  const auto i = vocab.index_of(term);
  if (i < 0) throw LookupError("term \"" + std::string(term) + "\" is not in the vocabulary");
  return idf_at(static_cast<std::size_t>(i), vocab);
}

double TfIdfProfile::norm() const {
  double s = 0.0;
  for (const auto& [_, w] : weights) s += w * w;
  return std::sqrt(s);
}

TfIdfProfile tfidf_profile(std::string_view instance, std::span<const Toot> toots, const Vocabulary& vocab,
                           const TokenizerOptions& options) {
  std::vector<std::uint64_t> tf(vocab.size(), 0);
  std::int64_t latest = 0;
  for (const Toot& t : toots) {
    latest = std::max(latest, t.timestamp);
    for (const auto& tok : tokenize(t.text, options)) {
      const auto i = vocab.index_of(tok);
      if (i >= 0) ++tf[static_cast<std::size_t>(i)];
    }
  }
  TfIdfProfile p;
  p.instance = std::string(instance);
  p.toot_count = toots.size();
  p.created_at = latest;
  for (std::size_t i = 0; i < tf.size(); ++i) {
    if (tf[i] == 0) continue;
    p.weights.emplace(vocab.term(i), static_cast<double>(tf[i]) * idf_at(i, vocab));
  }
  return p;
}

TfIdfProfile tfidf_profile(const InstanceCorpus& corpus, const Vocabulary& vocab, const TokenizerOptions& options) {
  const auto all = corpus.all_toots();
  return tfidf_profile(corpus.domain, all, vocab, options);
}

TfIdfProfile build_profile(const InstanceCorpus& corpus, std::uint64_t min_df, const TokenizerOptions& options) {
  const auto all = corpus.all_toots();
  const Vocabulary vocab = build_vocabulary(all, min_df, options);
  return tfidf_profile(corpus.domain, all, vocab, options);
}

double cosine_similarity(const TfIdfProfile& a, const TfIdfProfile& b) {
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (const auto& [_, w] : a.weights) aa += w * w;
  for (const auto& [_, w] : b.weights) bb += w * w;
  if (aa == 0.0 || bb == 0.0) {
    throw DegenerateInputError("cosine similarity of a zero-norm profile (" +
                               (aa == 0.0 ? a.instance : b.instance) + ")");
  }
  auto ia = a.weights.begin();
  auto ib = b.weights.begin();
  while (ia != a.weights.end() && ib != b.weights.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      ab += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  const double c = ab / std::sqrt(aa * bb);
  return std::clamp(c, 0.0, 1.0);
}

// ---------------------------------------------------------- serialization

namespace {
constexpr std::string_view kProfileMagic = "FMTP";
constexpr std::uint32_t kProfileFormat = 1;
}  // namespace

std::string serialize_profile(const TfIdfProfile& p) {
  detail::ByteWriter w;
  w.magic(kProfileMagic);
  w.u32(kProfileFormat);
  w.str(p.instance);
  w.u64(p.toot_count);
  w.u64(p.version);
  w.i64(p.created_at);
  w.u64(p.weights.size());
  for (const auto& [term, weight] : p.weights) {
    w.str(term);
    w.f64(weight);
  }
  return std::move(w).take();
}

TfIdfProfile deserialize_profile(std::string_view bytes) {
  detail::ByteReader r(bytes, "profile");
  r.expect_magic(kProfileMagic);
  if (r.u32() != kProfileFormat) r.fail("unsupported format version");
  TfIdfProfile p;
  p.instance = r.str();
  p.toot_count = r.u64();
  p.version = r.u64();
  p.created_at = r.i64();
  const std::uint64_t n = r.u64();
  std::string prev;
  for (std::uint64_t i = 0; i < n; ++i) {
    std::string term = r.str();
    const double weight = r.f64();
    if (i > 0 && !(prev < term)) r.fail("terms not strictly ascending");
    if (!std::isfinite(weight) || weight < 0.0) r.fail("weight not finite and nonnegative");
    prev = term;
    p.weights.emplace_hint(p.weights.end(), std::move(term), weight);
  }
  r.expect_end();
  return p;
}

}  // namespace fedmod
