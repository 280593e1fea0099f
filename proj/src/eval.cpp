#include "orl/eval.hpp"

#include <algorithm>
#include <set>

namespace orl {

const char* to_string(MetricKind m) {
  switch (m) {
    case MetricKind::exact: return "exact";
    case MetricKind::binary: return "binary";
    case MetricKind::proportional: return "proportional";
  }
  return "?";
}

const char* to_string(PredObject o) {
  switch (o) {
    case PredObject::opinions: return "O";
    case PredObject::pairs: return "O-R";
    case PredObject::pairs_hd: return "O-R(hd)";
    case PredObject::pairs_tg: return "O-R(tg)";
  }
  return "?";
}

namespace {

// one item per prediction object: a term list plus a type to match exactly
struct Item {
  std::vector<TermSpan> terms;
  int type = -1;
};

std::vector<Item> project(const std::vector<OpinionRolePair>& pairs, PredObject o) {
  std::vector<Item> items;
  if (o == PredObject::opinions) {
    std::set<TermSpan> seen;
    for (const auto& p : pairs)
      if (seen.insert(p.opinion).second) items.push_back({{p.opinion}, -1});
    return items;
  }
  std::set<OpinionRolePair> seen;
  for (const auto& p : pairs) {
    if (o == PredObject::pairs_hd && p.role_type != RoleType::holder) continue;
    if (o == PredObject::pairs_tg && p.role_type != RoleType::target) continue;
    if (!seen.insert(p).second) continue;
    items.push_back({{p.opinion, p.role}, static_cast<int>(p.role_type)});
  }
  return items;
}

double credit(const Item& pred, const Item& gold, MetricKind m,
              EvalOptions::PairAggregate agg) {
  if (pred.type != gold.type || pred.terms.size() != gold.terms.size()) return 0;
  double total = 0, least = 1;
  for (size_t t = 0; t < pred.terms.size(); ++t) {
    const int ov = overlap_tokens(pred.terms[t], gold.terms[t]);
    if (ov == 0) return 0;  // all regimes need every term to overlap
    if (m == MetricKind::exact && !(pred.terms[t] == gold.terms[t])) return 0;
    const double ratio = static_cast<double>(ov) / gold.terms[t].length();
    total += ratio;
    least = std::min(least, ratio);
  }
  if (m != MetricKind::proportional) return 1.0;
  return agg == EvalOptions::PairAggregate::mean
             ? total / static_cast<double>(pred.terms.size())
             : least;
}

// maximum-credit one-to-one assignment; bitmask DP over the smaller side,
// greedy by descending credit beyond what the DP can afford
double best_assignment(const std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(w.size());
  if (n == 0) return 0;
  const int m = static_cast<int>(w[0].size());
  if (m == 0) return 0;

  const bool flip = m < n;
  const int rows_n = flip ? m : n;
  const int cols_n = flip ? n : m;
  auto at = [&](int r, int c) { return flip ? w[c][r] : w[r][c]; };

  if (rows_n <= 14) {
    // dp over subsets of the row side; columns assigned greedily row by row
    std::vector<double> dp(1u << rows_n, 0.0);
    for (int c = 0; c < cols_n; ++c) {
      std::vector<double> next = dp;
      for (unsigned mask = 0; mask < dp.size(); ++mask)
        for (int r = 0; r < rows_n; ++r) {
          if (mask & (1u << r)) continue;
          const double cand = dp[mask] + at(r, c);
          unsigned nm = mask | (1u << r);
          if (cand > next[nm]) next[nm] = cand;
        }
      dp = std::move(next);
    }
    return *std::max_element(dp.begin(), dp.end());
  }

  // fallback for very large instances
  struct Edge { double c; int p, g; };
  std::vector<Edge> edges;
  for (int p = 0; p < n; ++p)
    for (int g = 0; g < m; ++g)
      if (w[p][g] > 0) edges.push_back({w[p][g], p, g});
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.c != b.c) return a.c > b.c;
    if (a.p != b.p) return a.p < b.p;
    return a.g < b.g;
  });
  std::vector<bool> pu(n, false), gu(m, false);
  double total = 0;
  for (const auto& e : edges) {
    if (pu[e.p] || gu[e.g]) continue;
    pu[e.p] = gu[e.g] = true;
    total += e.c;
  }
  return total;
}

Prf finish(double matched, long n_pred, long n_gold) {
  Prf out;
  out.precision = n_pred == 0 ? 0.0 : matched / static_cast<double>(n_pred);
  out.recall = n_gold == 0 ? 0.0 : matched / static_cast<double>(n_gold);
  out.f1 = (out.precision + out.recall) == 0
               ? 0.0
               : 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

}  // namespace

MetricReport evaluate(const std::vector<std::vector<OpinionRolePair>>& pred,
                      const std::vector<std::vector<OpinionRolePair>>& gold,
                      const EvalOptions& opts) {
  if (pred.size() != gold.size())
    throw Error("AlignmentError", "prediction and gold sentence counts differ");

  MetricReport report;
  for (int oi = 0; oi < 4; ++oi) {
    const auto obj = static_cast<PredObject>(oi);
    for (int mi = 0; mi < 3; ++mi) {
      const auto metric = static_cast<MetricKind>(mi);
      double matched = 0;
      long n_pred = 0, n_gold = 0;
      for (size_t s = 0; s < pred.size(); ++s) {
        const auto p_items = project(pred[s], obj);
        const auto g_items = project(gold[s], obj);
        n_pred += static_cast<long>(p_items.size());
        n_gold += static_cast<long>(g_items.size());
        if (p_items.empty() || g_items.empty()) continue;
        std::vector<std::vector<double>> w(p_items.size(),
                                           std::vector<double>(g_items.size()));
        for (size_t a = 0; a < p_items.size(); ++a)
          for (size_t b = 0; b < g_items.size(); ++b)
            w[a][b] = credit(p_items[a], g_items[b], metric, opts.aggregate);
        matched += best_assignment(w);
      }
      report.at(obj, metric) = finish(matched, n_pred, n_gold);
    }
  }
  return report;
}

nlohmann::ordered_json MetricReport::to_json() const {
  nlohmann::ordered_json j;
  for (int oi = 0; oi < 4; ++oi) {
    const auto obj = static_cast<PredObject>(oi);
    nlohmann::ordered_json oj;
    for (int mi = 0; mi < 3; ++mi) {
      const auto metric = static_cast<MetricKind>(mi);
      const Prf& s = at(obj, metric);
      oj[to_string(metric)] = {
          {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
    }
    j[to_string(obj)] = std::move(oj);
  }
  return j;
}

}  // namespace orl
