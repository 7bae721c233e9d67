// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <cctype>

#include "socialmuse/semantics.hpp"

namespace socialmuse {

namespace {

// Common English function words plus the boilerplate of alternate-use answers.
constexpr std::string_view kStopWords[] = {
    "a",     "about", "above", "after",  "again", "all",    "also",  "am",    "an",    "and",
    "any",   "are",   "as",    "at",     "be",    "been",   "being", "but",   "by",    "can",
    "could", "did",   "do",    "does",   "doing", "down",   "each",  "few",   "for",   "from",
    "get",   "had",   "has",   "have",   "he",    "her",    "here",  "him",   "his",   "how",
    "i",     "if",    "in",    "into",   "is",    "it",     "its",   "just",  "like",  "make",
    "me",    "more",  "most",  "my",     "no",    "not",    "of",    "off",   "on",    "one",
    "or",    "other", "our",   "out",    "over",  "own",    "put",   "same",  "she",   "so",
    "some",  "such",  "than",  "that",   "the",   "their",  "them",  "then",  "there", "these",
    "they",  "this",  "to",    "too",    "under", "up",     "use",   "used",  "using", "very",
    "was",   "we",    "with",  "you",    "your",  "yours"};

std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t cap) {
  // Optimal-string-alignment distance, early exit once every cell exceeds cap.
  const std::size_t n = a.size(), m = b.size();
  if ((n > m ? n - m : m - n) > cap) return cap + 1;
  std::vector<std::size_t> prev2(m + 1), prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = a[i - 1] == b[j - 1] ? 0 : 1;
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + sub});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        cur[j] = std::min(cur[j], prev2[j - 2] + 1);
      }
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > cap) return cap + 1;
    prev2.swap(prev);
    prev.swap(cur);
  }
  return prev[m];
}

std::optional<std::string> normalize_to_lexicon(const Taxonomy& taxonomy, const std::string& token) {
  if (taxonomy.has_token(token)) return token;
  const std::string single = singularize(token);
  if (taxonomy.has_token(single)) return single;
  if (token.size() < 4) return std::nullopt;
  for (const auto& candidate : taxonomy.tokens()) {
    if (edit_distance(token, candidate, 1) <= 1) return candidate;
  }
  return std::nullopt;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'') {
      continue;  // "can't" -> "cant"
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

bool is_stop_word(std::string_view token) {
  return std::find(std::begin(kStopWords), std::end(kStopWords), token) != std::end(kStopWords);
}

std::string singularize(std::string_view token) {
  std::string t(token);
  auto ends_with = [&t](std::string_view s) {
    return t.size() >= s.size() && t.compare(t.size() - s.size(), s.size(), s) == 0;
  };
  if (t.size() > 4 && ends_with("ies")) return t.substr(0, t.size() - 3) + "y";
  if (ends_with("sses")) return t.substr(0, t.size() - 2);
  if (t.size() > 4 && (ends_with("ches") || ends_with("shes") || ends_with("xes"))) {
    return t.substr(0, t.size() - 2);
  }
  if (t.size() > 3 && ends_with("s") && !ends_with("ss") && !ends_with("us") && !ends_with("is")) {
    return t.substr(0, t.size() - 1);
  }
  return t;
}

std::vector<std::string> extract_concepts(const Taxonomy& taxonomy, std::string_view text) {
  std::vector<std::string> concepts;
  for (const auto& token : tokenize(text)) {
    if (is_stop_word(token)) continue;
    auto known = normalize_to_lexicon(taxonomy, token);
    if (!known) continue;
    const auto& candidates = taxonomy.concepts_for_token(*known);
    if (candidates.empty()) continue;
    std::size_t best = candidates.front();
    for (std::size_t c : candidates) {
      const double ic = taxonomy.information_content(c);
      const double best_ic = taxonomy.information_content(best);
      if (ic > best_ic || (ic == best_ic && taxonomy.id(c) < taxonomy.id(best))) best = c;
    }
    concepts.push_back(taxonomy.id(best));
  }
  return concepts;
}

}  // namespace socialmuse
