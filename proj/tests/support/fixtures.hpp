#pragma once

// Shared hand-built fixtures: the nine-token walkthrough sentence with its
// four gold pairs, dependency tree and POS tags.

#include "orl/core.hpp"
#include "orl/data.hpp"

namespace orl::testing {

// "He says the agency seriously needs money to develop" with gold pairs
// <says, He(hd)>, <says, the agency(tg)>, <seriously needs, the agency(hd)>,
// <seriously needs, money to develop(tg)>.
inline Sentence walkthrough_sentence() {
  Sentence s;
  s.id = "walkthrough";
  s.doc = "doc1";
  const char* words[] = {"He",    "says",  "the", "agency", "seriously",
                         "needs", "money", "to",  "develop"};
  const char* pos[] = {"PRP", "VBZ", "DT", "NN", "RB", "VBZ", "NN", "TO", "VB"};
  const int heads[] = {1, kRootHead, 3, 5, 5, 1, 5, 8, 6};
  const char* rels[] = {"nsubj", "root", "det",  "nsubj", "advmod",
                        "ccomp", "obj",  "mark", "acl"};
  for (int i = 0; i < 9; ++i) {
    s.tokens.push_back(Token::make(i, words[i], pos[i]));
    s.deps.push_back({i, heads[i], rels[i]});
  }
  s.gold = {
      make_pair_spans(1, 1, 0, 0, RoleType::holder),
      make_pair_spans(1, 1, 2, 3, RoleType::target),
      make_pair_spans(4, 5, 2, 3, RoleType::holder),
      make_pair_spans(4, 5, 6, 8, RoleType::target),
  };
  return s;
}

inline CorpusHeader walkthrough_header() {
  CorpusHeader h;
  h.pos_tags = {"PRP", "VBZ", "DT", "NN", "RB", "TO", "VB", "XX"};
  h.dep_labels = {"nsubj", "root", "det", "advmod", "ccomp",
                  "obj",   "mark", "acl", "dep",    "mod"};
  return h;
}

}  // namespace orl::testing
