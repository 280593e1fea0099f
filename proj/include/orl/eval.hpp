#pragma once

// Precision/recall/F1 over four prediction objects (opinion terms, pairs,
// holder pairs, target pairs) under three matching regimes:
//
//   exact         every term boundary identical
//   binary        every constituent term shares at least one token
//   proportional  binary-eligible, credit = token-overlap ratio against the
//                 gold term (averaged or min'd over the terms of a pair)
//
// Role types must match exactly in all regimes. Credit is assigned by a
// one-to-one matching that maximizes total credit, so the credit dominance
// exact <= proportional <= binary carries over to P, R and F1.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orl/core.hpp"

namespace orl {

enum class MetricKind { exact, binary, proportional };
enum class PredObject { opinions, pairs, pairs_hd, pairs_tg };

const char* to_string(MetricKind m);
const char* to_string(PredObject o);

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MetricReport {
  Prf scores[4][3];  // [PredObject][MetricKind]

  Prf& at(PredObject o, MetricKind m) {
    return scores[static_cast<int>(o)][static_cast<int>(m)];
  }
  const Prf& at(PredObject o, MetricKind m) const {
    return scores[static_cast<int>(o)][static_cast<int>(m)];
  }
  nlohmann::ordered_json to_json() const;
};

struct EvalOptions {
  enum class PairAggregate { mean, min };
  // how per-term overlap ratios combine into a pair's proportional credit
  PairAggregate aggregate = PairAggregate::mean;
};

// pred and gold are aligned per sentence
MetricReport evaluate(const std::vector<std::vector<OpinionRolePair>>& pred,
                      const std::vector<std::vector<OpinionRolePair>>& gold,
                      const EvalOptions& opts = {});

}  // namespace orl
