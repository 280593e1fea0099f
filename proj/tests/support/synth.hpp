#pragma once

// Synthetic annotated sentences for property tests and training runs.
// Every generated term has a distinct start token, so oracle round-trips
// are exact by construction. Surfaces and POS tags correlate with the term
// structure (role words, opinion words, fillers) to keep toy corpora
// learnable.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "orl/core.hpp"
#include "orl/data.hpp"

namespace orl::testing {

struct SynthOptions {
  int min_tokens = 5;
  int max_tokens = 30;
  int max_terms = 6;
  int fixed_terms = -1;  // exact term count when >= 0
  int max_term_len = 4;
  // chance that an opinion links a second role, creating shared roles
  double second_role = 0.35;
  // force a high rate of roles participating in >= 2 pairs
  bool heavy_overlap = false;
  // deterministic structure instead of random links: an opinion links every
  // role starting within `rule_window` tokens; holder before, target after.
  // The links follow from observable features, so toy corpora are learnable.
  bool rule_based_links = false;
  int rule_window = 4;
};

inline Sentence synth_sentence(std::mt19937_64& rng, const SynthOptions& opt,
                               int serial) {
  static const std::vector<std::string> role_words = {
      "ana", "bo", "cleo", "dima", "enzo", "fay", "gus", "hana"};
  static const std::vector<std::string> opinion_words = {
      "likes", "hates", "backs", "doubts", "praises", "blames"};
  static const std::vector<std::string> filler_words = {
      "the", "a", "on", "then", "still", "quite", "near", "old"};

  auto pick = [&rng](const std::vector<std::string>& v) {
    return v[std::uniform_int_distribution<size_t>(0, v.size() - 1)(rng)];
  };

  Sentence s;
  s.id = "synth" + std::to_string(serial);
  s.doc = "doc" + std::to_string(serial / 10);
  const int T =
      std::uniform_int_distribution<int>(opt.min_tokens, opt.max_tokens)(rng);

  // distinct start tokens
  std::vector<int> positions(T);
  for (int i = 0; i < T; ++i) positions[i] = i;
  std::shuffle(positions.begin(), positions.end(), rng);
  int want_terms = opt.fixed_terms >= 0
                       ? opt.fixed_terms
                       : std::uniform_int_distribution<int>(0, opt.max_terms)(rng);
  want_terms = std::min(want_terms, T);

  std::vector<TermSpan> opinions, roles;
  std::set<int> starts;
  for (int k = 0; k < want_terms; ++k) {
    const int start = positions[k];
    const int len = std::uniform_int_distribution<int>(1, opt.max_term_len)(rng);
    const int end = std::min(start + len - 1, T - 1);
    // alternate kinds so both sides exist whenever there are >= 2 terms
    const bool opinion = opt.heavy_overlap ? (k % 3 == 0) : (k % 2 == 0);
    starts.insert(start);
    if (opinion)
      opinions.push_back({start, end, SpanKind::opinion});
    else
      roles.push_back({start, end, SpanKind::role});
  }

  std::set<std::pair<TermSpan, TermSpan>> linked;
  auto link = [&](const TermSpan& o, const TermSpan& r) {
    if (!linked.insert({o, r}).second) return;
    const RoleType t = std::uniform_int_distribution<int>(0, 1)(rng) == 0
                           ? RoleType::holder
                           : RoleType::target;
    s.gold.push_back({o, r, t});
  };
  if (opt.rule_based_links) {
    for (const auto& o : opinions)
      for (const auto& r : roles)
        if (std::abs(o.start - r.start) <= opt.rule_window)
          s.gold.push_back({o, r,
                            r.start < o.start ? RoleType::holder
                                              : RoleType::target});
  } else if (!opinions.empty() && !roles.empty()) {
    std::uniform_int_distribution<size_t> role_at(0, roles.size() - 1);
    std::uniform_int_distribution<size_t> op_at(0, opinions.size() - 1);
    for (const auto& o : opinions) {
      link(o, roles[role_at(rng)]);
      if (std::uniform_real_distribution<double>(0, 1)(rng) < opt.second_role)
        link(o, roles[role_at(rng)]);
    }
    if (opt.heavy_overlap) {
      // every role joins at least two pairs when enough opinions exist
      for (const auto& r : roles) {
        link(opinions[op_at(rng)], r);
        link(opinions[op_at(rng)], r);
      }
    }
  }

  // surfaces and POS correlate with term membership
  std::vector<int> kind(T, 0);  // 0 filler, 1 role, 2 opinion
  for (const auto& r : roles)
    for (int i = r.start; i <= r.end; ++i) kind[i] = 1;
  for (const auto& o : opinions)
    for (int i = o.start; i <= o.end; ++i) kind[i] = 2;
  for (int i = 0; i < T; ++i) {
    const char* pos = kind[i] == 0 ? "XX" : (kind[i] == 1 ? "NN" : "VB");
    const std::string w = kind[i] == 0   ? pick(filler_words)
                          : kind[i] == 1 ? pick(role_words)
                                         : pick(opinion_words);
    s.tokens.push_back(Token::make(i, w, pos));
  }
  for (int i = 0; i < T; ++i) {
    const int head =
        i == 0 ? kRootHead : std::uniform_int_distribution<int>(0, i - 1)(rng);
    const char* rel = i % 2 == 0 ? "dep" : "mod";
    s.deps.push_back({i, head, rel});
  }
  return s;
}

inline std::vector<Sentence> synth_corpus(int n, uint64_t seed,
                                          const SynthOptions& opt = {}) {
  std::mt19937_64 rng(seed);
  std::vector<Sentence> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(synth_sentence(rng, opt, i));
  return out;
}

inline CorpusHeader synth_header() {
  CorpusHeader h;
  h.pos_tags = {"NN", "VB", "XX"};
  h.dep_labels = {"dep", "mod"};
  return h;
}

}  // namespace orl::testing
