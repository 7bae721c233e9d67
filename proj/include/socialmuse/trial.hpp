// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "socialmuse/graph.hpp"
#include "socialmuse/io.hpp"
#include "socialmuse/semantics.hpp"

namespace socialmuse {

enum class Condition { Control, Treatment };
std::string_view to_string(Condition c);
Condition parse_condition(std::string_view text);

enum class Role { Ego, Alter };
std::string_view to_string(Role r);
Role parse_role(std::string_view text);

enum class Gender { A, B };

using BinId = std::int64_t;
using BinSet = std::set<BinId>;
inline constexpr BinId kDegenerateBin = -1;

/// One submitted idea. Alters submit a single attempt per round.
struct IdeaRecord {
  std::string idea_id;
  Role role = Role::Ego;
  std::int32_t author_id = 0;
  int trial = 0;
  Condition condition = Condition::Control;
  int round = 1;
  int attempt = 1;
  std::optional<BinId> bin_id;
  std::string text;
  std::vector<std::string> concept_ids;
};

/// Temporal bipartite network of one (trial, condition) plus everything the
/// egos and alters submitted.
class TrialState {
 public:
  TrialState() = default;
  TrialState(int trial, Condition condition, int n_alters);

  int trial() const { return trial_; }
  Condition condition() const { return condition_; }
  int n_alters() const { return n_alters_; }

  void set_gender(Role role, std::int32_t id, Gender gender);
  Gender gender(Role role, std::int32_t id) const;  // throws NotFound

  /// Registers an ego's global arrival position (0-based, unique).
  void set_arrival_rank(EgoId ego, int rank);
  int arrival_rank(EgoId ego) const;  // throws NotFound
  std::vector<EgoId> arrival_order() const;

  /// Records that `ego` follows `pair` in `round`; egos enter the round's
  /// arrival order by global rank.
  void set_follow(int round, EgoId ego, AlterPair pair);
  bool has_follow(int round, EgoId ego) const;
  const BipartiteRound& round_network(int round) const;  // throws NotFound
  std::vector<int> rounds_with_edges() const;

  /// Network of `round` restricted to egos that arrived before `ego`, plus
  /// `ego` following `pair`.
  BipartiteRound hypothetical_round(int round, EgoId ego, AlterPair pair) const;

  void add_idea(IdeaRecord idea);
  const std::vector<IdeaRecord>& ideas() const { return ideas_; }
  /// Edits must not change the author, round or attempt of a record.
  std::vector<IdeaRecord>& mutable_ideas() { return ideas_; }
  std::vector<const IdeaRecord*> ideas_of(Role role, std::int32_t author, int round,
                                          std::optional<int> attempt = std::nullopt) const;
  /// Stop-word-free tokens of the selected ideas, in submission order.
  Document document(Role role, std::int32_t author, int round,
                    std::optional<int> attempt = std::nullopt) const;
  std::vector<std::string> concepts(Role role, std::int32_t author, int round,
                                    std::optional<int> attempt = std::nullopt) const;
  BinSet bins(Role role, std::int32_t author, int round,
              std::optional<int> attempt = std::nullopt) const;
  bool has_ideas(Role role, std::int32_t author, int round) const;

  std::vector<EgoId> egos() const;  // by arrival rank
  std::vector<AlterId> alters() const;

 private:
  using Key = std::tuple<Role, std::int32_t, int, int>;

  int trial_ = 0;
  Condition condition_ = Condition::Control;
  int n_alters_ = 6;
  std::map<std::pair<Role, std::int32_t>, Gender> genders_;
  std::map<EgoId, int> arrival_rank_;
  std::map<int, BipartiteRound> rounds_;
  std::vector<IdeaRecord> ideas_;
  std::map<Key, std::vector<std::size_t>> index_;
};

struct FollowEdgeRecord {
  int trial = 0;
  Condition condition = Condition::Control;
  int round = 1;
  std::int32_t ego_id = 0;
  std::int32_t alter_id = 0;
  int arrival_rank = 0;
};

struct ParticipantRecord {
  int trial = 0;
  std::optional<Condition> condition;  // unset for alters, shared by both conditions
  Role role = Role::Ego;
  std::int32_t participant_id = 0;
  Gender gender = Gender::A;
};

io::Json to_json(const IdeaRecord& r);
IdeaRecord idea_from_json(const io::Json& j);
io::Json to_json(const FollowEdgeRecord& r);
FollowEdgeRecord edge_from_json(const io::Json& j);
io::Json to_json(const ParticipantRecord& r);
ParticipantRecord participant_from_json(const io::Json& j);

/// One record per follow edge (two per ego per round).
std::vector<FollowEdgeRecord> edge_records(const TrialState& state);
std::vector<ParticipantRecord> participant_records(const TrialState& state, bool include_alters);

/// Appends line-delimited records.
void append_jsonl(std::ostream& out, const io::Json& record);

struct TrialFiles {
  std::filesystem::path ideas;
  std::filesystem::path edges;
  std::filesystem::path participants;
};

/// Groups records by (trial, condition). Alter records without a condition
/// are shared by every condition of their trial. Schema errors name the
/// offending file and line.
std::vector<TrialState> load_trials(const TrialFiles& files, int n_alters = 6);

/// Fills concept ids for ideas that carry text but no concepts.
void attach_concepts(std::vector<TrialState>& trials, const Taxonomy& taxonomy);

}  // namespace socialmuse
