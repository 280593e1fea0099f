#include "orl/transition.hpp"

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

namespace orl {

const char* to_string(ActionTag t) {
  switch (t) {
    case ActionTag::O_START: return "O-START";
    case ActionTag::R_START: return "R-START";
    case ActionTag::NO_START: return "NO-START";
    case ActionTag::ARC: return "ARC";
    case ActionTag::NO_ARC: return "NO-ARC";
    case ActionTag::SHIFT: return "SHIFT";
  }
  return "?";
}

std::optional<ActionTag> action_tag_from_string(const std::string& s) {
  if (s == "O-START") return ActionTag::O_START;
  if (s == "R-START") return ActionTag::R_START;
  if (s == "NO-START") return ActionTag::NO_START;
  if (s == "ARC") return ActionTag::ARC;
  if (s == "NO-ARC") return ActionTag::NO_ARC;
  if (s == "SHIFT") return ActionTag::SHIFT;
  return std::nullopt;
}

std::string action_to_json(const Action& a) {
  nlohmann::ordered_json j;
  j["tag"] = to_string(a.tag);
  j["end"] = a.end_index ? nlohmann::json(*a.end_index + 1) : nlohmann::json(nullptr);
  j["role"] = a.role_type ? nlohmann::json(to_string(*a.role_type)) : nlohmann::json(nullptr);
  return j.dump();
}

Action action_from_json(const std::string& line) {
  auto j = nlohmann::json::parse(line);
  auto tag = action_tag_from_string(j.at("tag").get<std::string>());
  if (!tag) throw Error("ParseError", "unknown action tag in trace: " + line);
  Action a;
  a.tag = *tag;
  if (j.contains("end") && !j["end"].is_null()) a.end_index = j["end"].get<int>() - 1;
  if (j.contains("role") && !j["role"].is_null()) {
    auto r = role_type_from_string(j["role"].get<std::string>());
    if (!r) throw Error("ParseError", "unknown role type in trace: " + line);
    a.role_type = r;
  }
  return a;
}

TransitionState initial_state(const Sentence& s) {
  TransitionState st;
  st.num_tokens = s.size();
  st.buffer_front = 0;
  return st;
}

std::set<ActionTag> valid_actions(const TransitionState& st) {
  std::set<ActionTag> out;
  if (!st.buffer_empty() && !st.lambda) {
    out.insert(ActionTag::O_START);
    out.insert(ActionTag::R_START);
    out.insert(ActionTag::NO_START);
  }
  if (st.lambda) {
    out.insert(ActionTag::SHIFT);
    const auto& opposite =
        st.lambda->kind == SpanKind::opinion ? st.sigma_r : st.sigma_o;
    if (!opposite.empty()) {
      out.insert(ActionTag::ARC);
      out.insert(ActionTag::NO_ARC);
    }
  }
  return out;
}

TransitionState apply(const TransitionState& st, const Action& a) {
  const auto legal = valid_actions(st);
  if (!legal.contains(a.tag))
    throw Error("IllegalAction",
                std::string(to_string(a.tag)) + " not legal in current state");

  const bool is_start = a.tag == ActionTag::O_START || a.tag == ActionTag::R_START;
  if (is_start && !a.end_index)
    throw Error("MissingPayload", "START action without end index");
  if (a.tag == ActionTag::ARC && !a.role_type)
    throw Error("MissingPayload", "ARC action without role type");
  if (!is_start && a.end_index)
    throw Error("MissingPayload", "unexpected end index payload");
  if (a.tag != ActionTag::ARC && a.role_type)
    throw Error("MissingPayload", "unexpected role type payload");

  TransitionState next = st;
  switch (a.tag) {
    case ActionTag::O_START:
    case ActionTag::R_START: {
      const int start = st.buffer_front;
      if (*a.end_index < start)
        throw Error("EndBeforeStart", "end " + std::to_string(*a.end_index) +
                                          " before start " + std::to_string(start));
      if (*a.end_index >= st.num_tokens)
        throw Error("OutOfRangeSpan", "end beyond sentence");
      next.lambda = TermSpan{start, *a.end_index,
                             a.tag == ActionTag::O_START ? SpanKind::opinion
                                                         : SpanKind::role};
      break;  // the start token leaves beta later, at SHIFT
    }
    case ActionTag::NO_START:
      ++next.buffer_front;
      break;
    case ActionTag::ARC:
    case ActionTag::NO_ARC: {
      const bool lambda_is_opinion = st.lambda->kind == SpanKind::opinion;
      auto& opposite = lambda_is_opinion ? next.sigma_r : next.sigma_o;
      auto& temp = lambda_is_opinion ? next.alpha_r : next.alpha_o;
      if (a.tag == ActionTag::ARC) {
        OpinionRolePair p;
        if (lambda_is_opinion) {
          p.opinion = *st.lambda;
          p.role = opposite.back();
        } else {
          p.opinion = opposite.back();
          p.role = *st.lambda;
        }
        p.role_type = *a.role_type;
        next.pairs.push_back(p);
      }
      temp.push_back(opposite.back());
      opposite.pop_back();
      break;
    }
    case ActionTag::SHIFT: {
      // alphas hold terms in reverse stack order; popping them back restores it
      while (!next.alpha_o.empty()) {
        next.sigma_o.push_back(next.alpha_o.back());
        next.alpha_o.pop_back();
      }
      while (!next.alpha_r.empty()) {
        next.sigma_r.push_back(next.alpha_r.back());
        next.alpha_r.pop_back();
      }
      if (st.lambda->kind == SpanKind::opinion)
        next.sigma_o.push_back(*st.lambda);
      else
        next.sigma_r.push_back(*st.lambda);
      next.lambda.reset();
      ++next.buffer_front;
      break;
    }
  }
  next.history.push_back(a);
  return next;
}

namespace {

struct GoldIndex {
  // term -> number of pairs it participates in
  std::map<TermSpan, int> by_term;
  // (opinion span, role span) -> role type
  std::map<std::pair<TermSpan, TermSpan>, RoleType> link;
};

}  // namespace

OracleTrace oracle(const Sentence& s) {
  const int T = s.size();
  OracleTrace trace;

  GoldIndex idx;
  for (const auto& p : s.gold) {
    ++idx.by_term[p.opinion];
    ++idx.by_term[p.role];
    auto [it, inserted] = idx.link.try_emplace({p.opinion, p.role}, p.role_type);
    if (!inserted && it->second != p.role_type) {
      // one ARC per term pair: a second role type is unexpressible
      trace.notes.messages.push_back(
          "SharedStartUnsupported: duplicate opinion-role link with a second "
          "role type; skipped");
    }
  }

  // terms starting at each token; shared starts resolved by pair count,
  // then span length, then opinion kind
  std::vector<std::vector<TermSpan>> starts(T);
  for (const auto& [term, _] : idx.by_term) starts[term.start].push_back(term);

  std::set<TermSpan> kept;
  for (int i = 0; i < T; ++i) {
    auto& at = starts[i];
    if (at.empty()) continue;
    std::sort(at.begin(), at.end(), [&](const TermSpan& a, const TermSpan& b) {
      const int pa = idx.by_term[a], pb = idx.by_term[b];
      if (pa != pb) return pa > pb;
      if (a.length() != b.length()) return a.length() > b.length();
      return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    kept.insert(at.front());
    for (size_t k = 1; k < at.size(); ++k) {
      ++trace.notes.skipped_terms;
      trace.notes.messages.push_back(
          "SharedStartUnsupported: term [" + std::to_string(at[k].start + 1) + "," +
          std::to_string(at[k].end + 1) + "] shares start token " +
          std::to_string(i + 1) + "; skipped");
    }
  }
  std::set<OpinionRolePair> covered;
  for (const auto& [key, type] : idx.link)
    if (kept.contains(key.first) && kept.contains(key.second))
      covered.insert(OpinionRolePair{key.first, key.second, type});
  trace.notes.skipped_pairs = static_cast<int>(s.gold.size() - covered.size());

  TransitionState st = initial_state(s);
  auto emit = [&](const Action& a) {
    trace.actions.push_back(a);
    st = apply(st, a);
  };

  for (int i = 0; i < T; ++i) {
    const TermSpan* term = nullptr;
    for (const auto& t : starts[i])
      if (kept.contains(t)) term = &t;
    if (!term) {
      emit(Action::no_start());
      continue;
    }
    emit(term->kind == SpanKind::opinion ? Action::start_opinion(term->end)
                                         : Action::start_role(term->end));
    // sweep the opposite stack top to bottom
    const auto& opposite =
        term->kind == SpanKind::opinion ? st.sigma_r : st.sigma_o;
    for (int d = static_cast<int>(opposite.size()) - 1; d >= 0; --d) {
      const TermSpan other = opposite[d];
      const auto key = term->kind == SpanKind::opinion
                           ? std::make_pair(*term, other)
                           : std::make_pair(other, *term);
      auto it = idx.link.find(key);
      bool is_gold = it != idx.link.end() &&
                     covered.contains(OpinionRolePair{key.first, key.second, it->second});
      emit(is_gold ? Action::arc(it->second) : Action::no_arc());
    }
    emit(Action::shift());
  }
  return trace;
}

RunResult run(const Sentence& s, const Policy& policy) {
  TransitionState st = initial_state(s);
  const int T = s.size();
  // every action either pops beta or strictly shrinks the opposite stack,
  // so T*T + 3*T + 4 generously bounds any legal run
  const long max_steps = static_cast<long>(T) * T + 3L * T + 4;
  long steps = 0;
  while (!valid_actions(st).empty()) {
    Action a = policy(st);
    if (!valid_actions(st).contains(a.tag))
      throw Error("PolicyIllegalAction",
                  std::string(to_string(a.tag)) + " returned in a state where it is illegal");
    st = apply(st, a);
    if (++steps > max_steps)
      throw Error("Internal", "transition run exceeded step bound");
  }
  return RunResult{st.pairs, st.history};
}

RunResult replay(const Sentence& s, const std::vector<Action>& actions) {
  size_t next = 0;
  auto result = run(s, [&](const TransitionState&) {
    if (next >= actions.size())
      throw Error("PolicyIllegalAction", "trace exhausted before terminal state");
    return actions[next++];
  });
  if (next != actions.size())
    throw Error("PolicyIllegalAction", "trace continues past terminal state");
  return result;
}

}  // namespace orl
