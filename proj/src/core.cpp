#include "orl/core.hpp"

#include <algorithm>
#include <set>

namespace orl {

Token Token::make(int index, std::string surface, std::string pos) {
  Token t;
  t.index = index;
  t.pos = std::move(pos);
  t.surface = std::move(surface);
  for (char c : t.surface) t.chars.push_back(std::string(1, c));
  return t;
}

std::optional<RoleType> role_type_from_string(const std::string& s) {
  if (s == "hd") return RoleType::holder;
  if (s == "tg") return RoleType::target;
  return std::nullopt;
}

const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::OutOfRangeSpan: return "OutOfRangeSpan";
    case Violation::Kind::NonTreeDependencies: return "NonTreeDependencies";
    case Violation::Kind::DuplicatePair: return "DuplicatePair";
    case Violation::Kind::BadToken: return "BadToken";
  }
  return "?";
}

int overlap_tokens(const TermSpan& a, const TermSpan& b) {
  int lo = std::max(a.start, b.start);
  int hi = std::min(a.end, b.end);
  return std::max(0, hi - lo + 1);
}

namespace {

std::optional<Violation> check_span(const TermSpan& sp, SpanKind expect, int T) {
  if (sp.kind != expect)
    return Violation{Violation::Kind::OutOfRangeSpan, sp.start, "span kind mismatch"};
  if (sp.start < 0 || sp.end < sp.start || sp.end >= T)
    return Violation{Violation::Kind::OutOfRangeSpan, sp.start,
                     "span [" + std::to_string(sp.start) + "," + std::to_string(sp.end) +
                         "] outside [0," + std::to_string(T) + ")"};
  return std::nullopt;
}

}  // namespace

std::optional<Violation> validate_sentence(const Sentence& s) {
  const int T = s.size();
  for (int i = 0; i < T; ++i) {
    if (s.tokens[i].index != i)
      return Violation{Violation::Kind::BadToken, i, "token indices not contiguous"};
  }

  // deps: exactly one arc per token, heads in range, arcs form a tree
  if (static_cast<int>(s.deps.size()) != T)
    return Violation{Violation::Kind::NonTreeDependencies, -1,
                     "expected " + std::to_string(T) + " arcs, got " +
                         std::to_string(s.deps.size())};
  std::vector<int> head(T, kRootHead - 1);
  for (const auto& arc : s.deps) {
    if (arc.dependent < 0 || arc.dependent >= T)
      return Violation{Violation::Kind::NonTreeDependencies, arc.dependent,
                       "dependent out of range"};
    if (head[arc.dependent] != kRootHead - 1)
      return Violation{Violation::Kind::NonTreeDependencies, arc.dependent,
                       "token has two heads"};
    if (arc.head != kRootHead && (arc.head < 0 || arc.head >= T))
      return Violation{Violation::Kind::NonTreeDependencies, arc.dependent,
                       "head out of range"};
    if (arc.head == arc.dependent)
      return Violation{Violation::Kind::NonTreeDependencies, arc.dependent,
                       "self-headed token"};
    head[arc.dependent] = arc.head;
  }
  int roots = 0;
  for (int i = 0; i < T; ++i)
    if (head[i] == kRootHead) ++roots;
  if (T > 0 && roots != 1)
    return Violation{Violation::Kind::NonTreeDependencies, -1,
                     std::to_string(roots) + " root tokens"};
  // cycle check: walk up from every token; a tree reaches ROOT in <= T steps
  for (int i = 0; i < T; ++i) {
    int cur = i, steps = 0;
    while (cur != kRootHead) {
      cur = head[cur];
      if (++steps > T)
        return Violation{Violation::Kind::NonTreeDependencies, i, "dependency cycle"};
    }
  }

  std::set<OpinionRolePair> seen;
  for (const auto& p : s.gold) {
    if (auto v = check_span(p.opinion, SpanKind::opinion, T)) return v;
    if (auto v = check_span(p.role, SpanKind::role, T)) return v;
    if (!seen.insert(p).second)
      return Violation{Violation::Kind::DuplicatePair, p.opinion.start,
                       "duplicate gold pair"};
  }
  return std::nullopt;
}

void require_valid(const Sentence& s) {
  if (auto v = validate_sentence(s))
    throw Error(to_string(v->kind), "sentence '" + s.id + "': " + v->message);
}

}  // namespace orl
