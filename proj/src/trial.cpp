// Copyright (C) 2026 SocialMuse contributors
// SPDX-License-Identifier: Apache-2.0

#include "socialmuse/trial.hpp"

#include <algorithm>
#include <ostream>

#include "socialmuse/error.hpp"

namespace socialmuse {

namespace {
constexpr std::string_view kShared = "shared";
}

std::string_view to_string(Condition c) {
  return c == Condition::Control ? "control" : "treatment";
}

Condition parse_condition(std::string_view text) {
  if (text == "control") return Condition::Control;
  if (text == "treatment") return Condition::Treatment;
  throw Error(ErrorCode::Schema, "unknown condition '" + std::string(text) + "'");
}

std::string_view to_string(Role r) { return r == Role::Ego ? "ego" : "alter"; }

Role parse_role(std::string_view text) {
  if (text == "ego") return Role::Ego;
  if (text == "alter") return Role::Alter;
  throw Error(ErrorCode::Schema, "unknown role '" + std::string(text) + "'");
}

TrialState::TrialState(int trial, Condition condition, int n_alters)
    : trial_(trial), condition_(condition), n_alters_(n_alters) {
  if (n_alters < 2) throw Error(ErrorCode::InvalidInput, "a trial needs at least two alters");
}

void TrialState::set_gender(Role role, std::int32_t id, Gender gender) {
  genders_[{role, id}] = gender;
}

Gender TrialState::gender(Role role, std::int32_t id) const {
  auto it = genders_.find({role, id});
  if (it == genders_.end()) {
    throw Error(ErrorCode::NotFound, "no gender recorded for " + std::string(to_string(role)) +
                                         " " + std::to_string(id));
  }
  return it->second;
}

void TrialState::set_arrival_rank(EgoId ego, int rank) {
  for (const auto& [other, r] : arrival_rank_) {
    if (r == rank && other != ego) {
      throw Error(ErrorCode::InvalidInput, "arrival rank " + std::to_string(rank) + " used twice");
    }
  }
  auto it = arrival_rank_.find(ego);
  if (it != arrival_rank_.end() && it->second != rank) {
    throw Error(ErrorCode::InvalidInput,
                "ego " + std::to_string(ego.value) + " has conflicting arrival ranks");
  }
  arrival_rank_[ego] = rank;
}

int TrialState::arrival_rank(EgoId ego) const {
  auto it = arrival_rank_.find(ego);
  if (it == arrival_rank_.end()) {
    throw Error(ErrorCode::NotFound, "ego " + std::to_string(ego.value) + " has no arrival rank");
  }
  return it->second;
}

std::vector<EgoId> TrialState::arrival_order() const {
  std::vector<std::pair<int, EgoId>> ranked;
  for (const auto& [ego, rank] : arrival_rank_) ranked.emplace_back(rank, ego);
  std::sort(ranked.begin(), ranked.end());
  std::vector<EgoId> order;
  for (const auto& [rank, ego] : ranked) order.push_back(ego);
  return order;
}

std::vector<EgoId> TrialState::egos() const { return arrival_order(); }

std::vector<AlterId> TrialState::alters() const {
  std::vector<AlterId> out;
  for (int a = 0; a < n_alters_; ++a) out.push_back(AlterId{a});
  return out;
}

void TrialState::set_follow(int round, EgoId ego, AlterPair pair) {
  const int rank = arrival_rank(ego);
  if (pair.second().value >= n_alters_) {
    throw Error(ErrorCode::InvalidInput, "alter " + std::to_string(pair.second().value) +
                                             " outside the trial's " + std::to_string(n_alters_));
  }
  auto [it, inserted] = rounds_.try_emplace(round);
  BipartiteRound& net = it->second;
  if (inserted) {
    net.round_index = round;
    net.n_alters = n_alters_;
  }
  if (!net.follows.count(ego)) {
    auto pos = std::find_if(net.arrival_order.begin(), net.arrival_order.end(),
                            [&](EgoId other) { return arrival_rank(other) > rank; });
    net.arrival_order.insert(pos, ego);
  }
  net.follows[ego] = pair;
}

bool TrialState::has_follow(int round, EgoId ego) const {
  auto it = rounds_.find(round);
  return it != rounds_.end() && it->second.follows.count(ego) > 0;
}

const BipartiteRound& TrialState::round_network(int round) const {
  auto it = rounds_.find(round);
  if (it == rounds_.end()) {
    throw Error(ErrorCode::NotFound, "no follow edges for round " + std::to_string(round));
  }
  return it->second;
}

std::vector<int> TrialState::rounds_with_edges() const {
  std::vector<int> out;
  for (const auto& [round, net] : rounds_) out.push_back(round);
  return out;
}

BipartiteRound TrialState::hypothetical_round(int round, EgoId ego, AlterPair pair) const {
  const int rank = arrival_rank(ego);
  BipartiteRound net;
  net.round_index = round;
  net.n_alters = n_alters_;
  auto it = rounds_.find(round);
  if (it != rounds_.end()) {
    for (EgoId other : it->second.arrival_order) {
      if (arrival_rank(other) >= rank) break;
      net.arrival_order.push_back(other);
      net.follows[other] = it->second.follows.at(other);
    }
  }
  net.arrival_order.push_back(ego);
  net.follows[ego] = pair;
  return net;
}

void TrialState::add_idea(IdeaRecord idea) {
  if (idea.role == Role::Alter && idea.attempt != 1) {
    throw Error(ErrorCode::InvalidInput, "alters submit a single attempt per round");
  }
  if (idea.attempt != 1 && idea.attempt != 2) {
    throw Error(ErrorCode::InvalidInput, "attempt must be 1 or 2");
  }
  index_[{idea.role, idea.author_id, idea.round, idea.attempt}].push_back(ideas_.size());
  ideas_.push_back(std::move(idea));
}

std::vector<const IdeaRecord*> TrialState::ideas_of(Role role, std::int32_t author, int round,
                                                    std::optional<int> attempt) const {
  std::vector<const IdeaRecord*> out;
  for (int a : {1, 2}) {
    if (attempt && *attempt != a) continue;
    auto it = index_.find({role, author, round, a});
    if (it == index_.end()) continue;
    for (std::size_t i : it->second) out.push_back(&ideas_[i]);
  }
  return out;
}

Document TrialState::document(Role role, std::int32_t author, int round,
                              std::optional<int> attempt) const {
  Document doc;
  for (const IdeaRecord* idea : ideas_of(role, author, round, attempt)) {
    for (auto& token : tokenize(idea->text)) {
      if (!is_stop_word(token)) doc.push_back(std::move(token));
    }
  }
  return doc;
}

std::vector<std::string> TrialState::concepts(Role role, std::int32_t author, int round,
                                              std::optional<int> attempt) const {
  std::vector<std::string> out;
  for (const IdeaRecord* idea : ideas_of(role, author, round, attempt)) {
    out.insert(out.end(), idea->concept_ids.begin(), idea->concept_ids.end());
  }
  return out;
}

BinSet TrialState::bins(Role role, std::int32_t author, int round, std::optional<int> attempt) const {
  BinSet out;
  for (const IdeaRecord* idea : ideas_of(role, author, round, attempt)) {
    if (idea->bin_id && *idea->bin_id != kDegenerateBin) out.insert(*idea->bin_id);
  }
  return out;
}

bool TrialState::has_ideas(Role role, std::int32_t author, int round) const {
  return index_.count({role, author, round, 1}) > 0 || index_.count({role, author, round, 2}) > 0;
}

// ---------------------------------------------------------------------------
// Records

io::Json to_json(const IdeaRecord& r) {
  io::Json j;
  j["idea_id"] = r.idea_id;
  j["author_id"] = r.author_id;
  j["role"] = to_string(r.role);
  j["trial"] = r.trial;
  j["condition"] = r.role == Role::Alter ? kShared : to_string(r.condition);
  j["round"] = r.round;
  j["attempt"] = r.attempt;
  j["bin_id"] = r.bin_id ? io::Json(*r.bin_id) : io::Json(nullptr);
  j["text"] = r.text;
  j["concept_ids"] = r.concept_ids;
  return j;
}

IdeaRecord idea_from_json(const io::Json& j) {
  IdeaRecord r;
  r.idea_id = io::field(j, "idea_id").get<std::string>();
  r.author_id = io::field(j, "author_id").get<std::int32_t>();
  r.role = parse_role(io::field(j, "role").get<std::string>());
  r.trial = io::field(j, "trial").get<int>();
  const auto cond = io::field(j, "condition").get<std::string>();
  if (cond == kShared) {
    if (r.role != Role::Alter) throw Error(ErrorCode::Schema, "only alter ideas may be shared");
  } else {
    r.condition = parse_condition(cond);
  }
  r.round = io::field(j, "round").get<int>();
  r.attempt = io::field(j, "attempt").get<int>();
  if (r.round < 1) throw Error(ErrorCode::Schema, "round must be >= 1");
  if (r.attempt != 1 && r.attempt != 2) throw Error(ErrorCode::Schema, "attempt must be 1 or 2");
  if (r.role == Role::Alter && r.attempt != 1) {
    throw Error(ErrorCode::Schema, "alters submit a single attempt");
  }
  auto bin = j.find("bin_id");
  if (bin != j.end() && !bin->is_null()) r.bin_id = bin->get<BinId>();
  if (auto t = j.find("text"); t != j.end()) r.text = t->get<std::string>();
  if (auto c = j.find("concept_ids"); c != j.end()) {
    r.concept_ids = c->get<std::vector<std::string>>();
  }
  return r;
}

io::Json to_json(const FollowEdgeRecord& r) {
  return io::Json{{"trial", r.trial},
                  {"condition", to_string(r.condition)},
                  {"round", r.round},
                  {"ego_id", r.ego_id},
                  {"alter_id", r.alter_id},
                  {"arrival_rank", r.arrival_rank}};
}

FollowEdgeRecord edge_from_json(const io::Json& j) {
  FollowEdgeRecord r;
  r.trial = io::field(j, "trial").get<int>();
  r.condition = parse_condition(io::field(j, "condition").get<std::string>());
  r.round = io::field(j, "round").get<int>();
  r.ego_id = io::field(j, "ego_id").get<std::int32_t>();
  r.alter_id = io::field(j, "alter_id").get<std::int32_t>();
  r.arrival_rank = io::field(j, "arrival_rank").get<int>();
  return r;
}

io::Json to_json(const ParticipantRecord& r) {
  return io::Json{{"trial", r.trial},
                  {"condition", r.condition ? to_string(*r.condition) : kShared},
                  {"role", to_string(r.role)},
                  {"participant_id", r.participant_id},
                  {"gender", r.gender == Gender::A ? "a" : "b"}};
}

ParticipantRecord participant_from_json(const io::Json& j) {
  ParticipantRecord r;
  r.trial = io::field(j, "trial").get<int>();
  r.role = parse_role(io::field(j, "role").get<std::string>());
  const auto cond = io::field(j, "condition").get<std::string>();
  if (cond != kShared) r.condition = parse_condition(cond);
  r.participant_id = io::field(j, "participant_id").get<std::int32_t>();
  const auto g = io::field(j, "gender").get<std::string>();
  if (g != "a" && g != "b") throw Error(ErrorCode::Schema, "gender must be 'a' or 'b'");
  r.gender = g == "a" ? Gender::A : Gender::B;
  return r;
}

std::vector<FollowEdgeRecord> edge_records(const TrialState& state) {
  std::vector<FollowEdgeRecord> out;
  for (int round : state.rounds_with_edges()) {
    const BipartiteRound& net = state.round_network(round);
    for (EgoId ego : net.arrival_order) {
      const AlterPair& p = net.follows.at(ego);
      for (AlterId a : {p.first(), p.second()}) {
        out.push_back({state.trial(), state.condition(), round, ego.value, a.value,
                       state.arrival_rank(ego)});
      }
    }
  }
  return out;
}

std::vector<ParticipantRecord> participant_records(const TrialState& state, bool include_alters) {
  std::vector<ParticipantRecord> out;
  if (include_alters) {
    for (AlterId a : state.alters()) {
      out.push_back({state.trial(), std::nullopt, Role::Alter, a.value, state.gender(Role::Alter, a.value)});
    }
  }
  for (EgoId e : state.egos()) {
    out.push_back({state.trial(), state.condition(), Role::Ego, e.value, state.gender(Role::Ego, e.value)});
  }
  return out;
}

void append_jsonl(std::ostream& out, const io::Json& record) { out << record.dump() << '\n'; }

std::vector<TrialState> load_trials(const TrialFiles& files, int n_alters) {
  using Key = std::pair<int, Condition>;
  std::map<Key, TrialState> states;
  std::map<int, std::vector<ParticipantRecord>> shared_alters;
  std::map<int, std::vector<IdeaRecord>> shared_ideas;

  auto state_for = [&](int trial, Condition c) -> TrialState& {
    auto [it, inserted] = states.try_emplace(Key{trial, c});
    if (inserted) it->second = TrialState(trial, c, n_alters);
    return it->second;
  };

  io::for_each_jsonl(files.participants, [&](const io::Json& j, std::size_t) {
    ParticipantRecord p = participant_from_json(j);
    if (p.role == Role::Alter) {
      if (p.participant_id < 0 || p.participant_id >= n_alters) {
        throw Error(ErrorCode::Schema, "alter id outside [0, " + std::to_string(n_alters) + ")");
      }
      if (p.condition) {
        state_for(p.trial, *p.condition).set_gender(Role::Alter, p.participant_id, p.gender);
      } else {
        shared_alters[p.trial].push_back(p);
      }
    } else {
      if (!p.condition) throw Error(ErrorCode::Schema, "ego participants need a condition");
      state_for(p.trial, *p.condition).set_gender(Role::Ego, p.participant_id, p.gender);
    }
  });

  // Arrival ranks first so edges can be inserted in any order.
  std::vector<std::pair<std::size_t, FollowEdgeRecord>> edges;
  io::for_each_jsonl(files.edges, [&](const io::Json& j, std::size_t line) {
    FollowEdgeRecord e = edge_from_json(j);
    if (e.alter_id < 0 || e.alter_id >= n_alters) {
      throw Error(ErrorCode::Schema, "alter id outside [0, " + std::to_string(n_alters) + ")");
    }
    state_for(e.trial, e.condition).set_arrival_rank(EgoId{e.ego_id}, e.arrival_rank);
    edges.emplace_back(line, e);
  });
  std::map<std::tuple<int, Condition, int, std::int32_t>, std::vector<std::int32_t>> follow_sets;
  std::map<std::tuple<int, Condition, int, std::int32_t>, std::size_t> first_line;
  for (const auto& [line, e] : edges) {
    auto key = std::make_tuple(e.trial, e.condition, e.round, e.ego_id);
    follow_sets[key].push_back(e.alter_id);
    first_line.try_emplace(key, line);
  }
  for (const auto& [key, alters] : follow_sets) {
    const auto& [trial, cond, round, ego] = key;
    if (alters.size() != 2 || alters[0] == alters[1]) {
      throw Error(ErrorCode::Schema, files.edges.string() + ":" + std::to_string(first_line[key]) +
                                         ": ego " + std::to_string(ego) + " must follow exactly two "
                                         "distinct alters in round " + std::to_string(round));
    }
    state_for(trial, cond).set_follow(round, EgoId{ego}, AlterPair(AlterId{alters[0]}, AlterId{alters[1]}));
  }

  io::for_each_jsonl(files.ideas, [&](const io::Json& j, std::size_t) {
    IdeaRecord idea = idea_from_json(j);
    const bool shared = j.at("condition").get<std::string>() == kShared;
    if (shared) {
      shared_ideas[idea.trial].push_back(std::move(idea));
    } else {
      state_for(idea.trial, idea.condition).add_idea(std::move(idea));
    }
  });

  std::vector<TrialState> out;
  for (auto& [key, state] : states) {
    for (const auto& p : shared_alters[key.first]) {
      state.set_gender(Role::Alter, p.participant_id, p.gender);
    }
    for (IdeaRecord idea : shared_ideas[key.first]) {
      idea.condition = key.second;
      state.add_idea(std::move(idea));
    }
    out.push_back(std::move(state));
  }
  return out;
}

void attach_concepts(std::vector<TrialState>& trials, const Taxonomy& taxonomy) {
  for (auto& state : trials) {
    for (auto& idea : state.mutable_ideas()) {
      if (idea.concept_ids.empty() && !idea.text.empty()) {
        idea.concept_ids = extract_concepts(taxonomy, idea.text);
      }
    }
  }
}

}  // namespace socialmuse
