#pragma once

// Core domain types for opinion role labeling: sentences with dependency
// trees and the <opinion, role(type)> output structure.
//
// Indexing convention: everything in memory is 0-based with inclusive span
// ends; file formats and logs are 1-based. The dependency ROOT head is -1
// in memory and 0 in files.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace orl {

constexpr int kRootHead = -1;

struct Token {
  int index = 0;
  std::string surface;
  std::string pos;
  // chars are the code units of surface; kept explicit so tests can
  // construct tokens whose char sequence differs from the surface.
  std::vector<std::string> chars;

  static Token make(int index, std::string surface, std::string pos);
};

struct DependencyArc {
  int dependent = 0;
  int head = kRootHead;
  std::string label;
};

enum class SpanKind { opinion, role };

struct TermSpan {
  int start = 0;
  int end = 0;  // inclusive
  SpanKind kind = SpanKind::opinion;

  int length() const { return end - start + 1; }
  bool operator==(const TermSpan&) const = default;
  // lexicographic (start, end, kind); used for canonical ordering
  bool operator<(const TermSpan& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return static_cast<int>(kind) < static_cast<int>(o.kind);
  }
};

enum class RoleType { holder, target };

inline const char* to_string(RoleType t) {
  return t == RoleType::holder ? "hd" : "tg";
}
std::optional<RoleType> role_type_from_string(const std::string& s);

struct OpinionRolePair {
  TermSpan opinion;  // kind == opinion
  TermSpan role;     // kind == role
  RoleType role_type = RoleType::holder;

  bool operator==(const OpinionRolePair&) const = default;
  bool operator<(const OpinionRolePair& o) const {
    if (!(opinion == o.opinion)) return opinion < o.opinion;
    if (!(role == o.role)) return role < o.role;
    return static_cast<int>(role_type) < static_cast<int>(o.role_type);
  }
};

inline OpinionRolePair make_pair_spans(int oi, int oj, int ri, int rj, RoleType t) {
  return OpinionRolePair{TermSpan{oi, oj, SpanKind::opinion},
                         TermSpan{ri, rj, SpanKind::role}, t};
}

struct Sentence {
  std::string id;
  std::string doc;
  std::vector<Token> tokens;
  std::vector<DependencyArc> deps;  // one arc per token, tree-shaped
  std::vector<OpinionRolePair> gold;

  int size() const { return static_cast<int>(tokens.size()); }
};

// Validation outcome: empty optional means the sentence is well formed.
struct Violation {
  enum class Kind { OutOfRangeSpan, NonTreeDependencies, DuplicatePair, BadToken };
  Kind kind;
  int index = -1;  // offending token index where applicable
  std::string message;
};

const char* to_string(Violation::Kind k);

// Token counts shared by two inclusive spans.
int overlap_tokens(const TermSpan& a, const TermSpan& b);

// Checks all structural invariants; reports the first violation found.
std::optional<Violation> validate_sentence(const Sentence& s);

// Errors thrown across the library. `kind` is a stable machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

// Throwing wrapper around validate_sentence.
void require_valid(const Sentence& s);

}  // namespace orl
