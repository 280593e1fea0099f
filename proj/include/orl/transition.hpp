#pragma once

// Transition system for <opinion, role(type)> structure parsing.
//
// A state is (sigma_o, alpha_o, sigma_r, alpha_r, lambda, beta, A, Y):
// two stacks of finished terms with their temporary counterparts, a single
// in-flight term, a buffer of unprocessed token indices, the action history
// and the detected pairs. Six actions drive it:
//
//   O_START/R_START  front of beta starts an opinion/role term; the end
//                    index payload fixes the span and loads it into lambda
//   NO_START         front of beta starts nothing; pop it
//   ARC              link lambda with the top of the opposite stack, pop
//                    that top into the matching alpha; role type payload
//   NO_ARC           same pop, no pair recorded
//   SHIFT            restore alphas onto their stacks, park lambda on its
//                    own stack, clear it, pop the buffer front
//
// Only NO_START and SHIFT consume buffer tokens, so buffer-touching work
// is exactly T per sentence.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "orl/core.hpp"

namespace orl {

enum class ActionTag { O_START, R_START, NO_START, ARC, NO_ARC, SHIFT };

constexpr int kNumActionTags = 6;

const char* to_string(ActionTag t);
std::optional<ActionTag> action_tag_from_string(const std::string& s);

struct Action {
  ActionTag tag = ActionTag::NO_START;
  std::optional<int> end_index;       // O_START / R_START only
  std::optional<RoleType> role_type;  // ARC only

  static Action start_opinion(int end) { return {ActionTag::O_START, end, std::nullopt}; }
  static Action start_role(int end) { return {ActionTag::R_START, end, std::nullopt}; }
  static Action no_start() { return {ActionTag::NO_START, std::nullopt, std::nullopt}; }
  static Action arc(RoleType t) { return {ActionTag::ARC, std::nullopt, t}; }
  static Action no_arc() { return {ActionTag::NO_ARC, std::nullopt, std::nullopt}; }
  static Action shift() { return {ActionTag::SHIFT, std::nullopt, std::nullopt}; }

  bool operator==(const Action&) const = default;
};

// JSON-lines serialization: {"tag": "...", "end": j|null, "role": "hd"|"tg"|null}
// with 1-based end indices on disk.
std::string action_to_json(const Action& a);
Action action_from_json(const std::string& line);

struct TransitionState {
  std::vector<TermSpan> sigma_o, sigma_r;  // back() is the stack top
  std::vector<TermSpan> alpha_o, alpha_r;
  std::optional<TermSpan> lambda;
  int buffer_front = 0;  // beta is the contiguous suffix [buffer_front, T)
  int num_tokens = 0;
  std::vector<Action> history;
  std::vector<OpinionRolePair> pairs;

  int buffer_size() const { return num_tokens - buffer_front; }
  bool buffer_empty() const { return buffer_front >= num_tokens; }
  bool terminal() const { return buffer_empty() && !lambda.has_value(); }
};

TransitionState initial_state(const Sentence& s);

// Legal action tags in the given state.
std::set<ActionTag> valid_actions(const TransitionState& st);

// Applies one action, returning the successor state. Throws Error with kind
// IllegalAction / MissingPayload / EndBeforeStart on contract violations.
TransitionState apply(const TransitionState& st, const Action& a);

struct OracleNotes {
  int skipped_terms = 0;
  int skipped_pairs = 0;
  std::vector<std::string> messages;
};

struct OracleTrace {
  std::vector<Action> actions;
  OracleNotes notes;
};

// Gold action sequence via a left-to-right sweep. Terms sharing a start
// token cannot be expressed by the action set: the one covering the most
// gold pairs is kept, the rest are skipped and reported in the notes.
OracleTrace oracle(const Sentence& s);

using Policy = std::function<Action(const TransitionState&)>;

struct RunResult {
  std::vector<OpinionRolePair> pairs;
  std::vector<Action> actions;
};

// Runs the executor until the terminal state. The policy must return a
// legal action; an illegal one raises PolicyIllegalAction rather than
// being silently fixed.
RunResult run(const Sentence& s, const Policy& policy);

// Replays a fixed action sequence (oracle traces, serialized traces).
RunResult replay(const Sentence& s, const std::vector<Action>& actions);

}  // namespace orl
