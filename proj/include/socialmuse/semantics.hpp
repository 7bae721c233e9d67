// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace socialmuse {

/// Token -> dense vector lookup. All vectors share `dim`; tokens are lowercase.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string name, std::size_t dim) : name_(std::move(name)), dim_(dim) {}

  /// Parses `token v1 ... vdim` lines. Throws Io / Schema with the line number.
  static EmbeddingTable load(const std::filesystem::path& path, std::string name);
  void save(const std::filesystem::path& path) const;

  void add(std::string token, std::vector<double> vec);
  const std::vector<double>* find(std::string_view token) const;

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  std::string name_;
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  std::vector<std::string> order_;  // insertion order, for stable saving
};

/// "Is a" concept hierarchy with a virtual root over all parentless concepts.
class Taxonomy {
 public:
  static constexpr std::string_view kRootId = "__root__";

  Taxonomy() = default;
  /// Builds from (child, parent) links. Concepts appearing only as parents are
  /// included. Throws InvalidInput on cycles.
  static Taxonomy from_edges(const std::vector<std::pair<std::string, std::string>>& edges,
                             const std::vector<std::string>& extra_concepts = {});
  /// Reads `child<TAB>parent` and `token<TAB>concept_id` files.
  static Taxonomy load(const std::filesystem::path& edges_path,
                       const std::filesystem::path& lexicon_path);
  void save(const std::filesystem::path& edges_path, const std::filesystem::path& lexicon_path) const;

  void add_lexicon_entry(const std::string& token, const std::string& concept_id);

  std::size_t concept_count() const { return ids_.size(); }  // w, including the root
  std::optional<std::size_t> index_of(std::string_view concept_id) const;
  std::size_t require(std::string_view concept_id) const;  // throws NotFound
  const std::string& id(std::size_t index) const { return ids_[index]; }
  std::size_t root() const { return root_; }
  int hyponym_count(std::size_t index) const { return hyponyms_[index]; }
  /// Subsumers of a concept, itself included, sorted by index.
  const std::vector<std::size_t>& subsumers(std::size_t index) const { return ancestors_[index]; }
  double information_content(std::size_t index) const { return ic_[index]; }

  /// Concepts a token maps to through the lexicon (empty if unknown).
  const std::vector<std::size_t>& concepts_for_token(std::string_view token) const;
  bool has_token(std::string_view token) const;
  /// Sorted lexicon tokens.
  const std::vector<std::string>& tokens() const { return token_list_; }

 private:
  void finalize();

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> ancestors_;
  std::vector<int> hyponyms_;
  std::vector<double> ic_;
  std::size_t root_ = 0;
  std::unordered_map<std::string, std::vector<std::size_t>> lexicon_;
  std::vector<std::string> token_list_;
};

/// I(c) = 1 - ln(h(c) + 1) / ln(w).
double information_content(const Taxonomy& taxonomy, std::string_view concept_id);
/// Largest information content over the common subsumers of two concepts.
double msca_similarity(const Taxonomy& taxonomy, std::string_view c1, std::string_view c2);
double pair_similarity(const Taxonomy& taxonomy, std::string_view c1, std::string_view c2);
/// 1 - (I1 + I2 - 2 * msca) / 2.
double similarity_from_contents(double ic1, double ic2, double msca);

/// Symmetric N x N similarity matrix, row-major.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Total weight of a maximum spanning tree over the complete graph (Kruskal).
double max_spanning_tree_weight(const SimilarityMatrix& sim);

struct IdeaSetScore {
  std::size_t concept_count = 0;  // N
  double multi_information = 0;    // I_m
  double quotient = 0;             // Q = N - I_m
};

IdeaSetScore creativity_quotient(const SimilarityMatrix& sim);
/// Duplicate concepts are collapsed first; unknown concept ids throw NotFound.
IdeaSetScore creativity_quotient(const Taxonomy& taxonomy, std::span<const std::string> concepts);
IdeaSetScore creativity_quotient(const Taxonomy& taxonomy, std::span<const std::size_t> concepts);

enum class DistanceMethod { CosineA, WmdA, CosineB };
inline constexpr std::array<DistanceMethod, 3> kDistanceMethods = {
    DistanceMethod::CosineA, DistanceMethod::WmdA, DistanceMethod::CosineB};
std::string_view to_string(DistanceMethod method);

using Document = std::vector<std::string>;

/// 1 - cosine of the mean in-vocabulary token vectors.
double cosine_distance(const EmbeddingTable& table, const Document& a, const Document& b);
/// Exact word mover's distance: uniform token mass, Euclidean ground cost.
double word_movers_distance(const EmbeddingTable& table, const Document& a, const Document& b);

/// Throws MissingVocabulary when either document has no in-vocabulary token.
double doc_distance(DistanceMethod method, const EmbeddingTable& table_a,
                    const EmbeddingTable& table_b, const Document& a, const Document& b);
std::optional<double> try_doc_distance(DistanceMethod method, const EmbeddingTable& table_a,
                                       const EmbeddingTable& table_b, const Document& a,
                                       const Document& b);

// Text normalization shared by concept extraction and idea binning.
std::vector<std::string> tokenize(std::string_view text);
bool is_stop_word(std::string_view token);
std::string singularize(std::string_view token);

/// Stop-word removal, spell normalization against the lexicon, noun lookup and
/// polysemy resolution (most specific concept wins). Unmapped tokens drop out.
std::vector<std::string> extract_concepts(const Taxonomy& taxonomy, std::string_view text);

}  // namespace socialmuse
