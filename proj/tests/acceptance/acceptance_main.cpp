// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "orl/eval.hpp"
#include "orl/gradcheck.hpp"
#include "orl/train.hpp"
#include "orl/udog.hpp"
#include "support/fixtures.hpp"
#include "support/synth.hpp"

using namespace orl;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("criterion %d [%s]: %s (%s)\n", criterion, name.c_str(),
              pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::set<OpinionRolePair> as_set(const std::vector<OpinionRolePair>& v) {
  return {v.begin(), v.end()};
}

int count_tag(const std::vector<Action>& actions, ActionTag t) {
  return static_cast<int>(std::count_if(
      actions.begin(), actions.end(), [t](const Action& a) { return a.tag == t; }));
}

// ---- criterion 1: walkthrough ------------------------------------------

void criterion_walkthrough() {
  const auto t0 = Clock::now();
  Sentence s = testing::walkthrough_sentence();
  OracleTrace trace = oracle(s);
  auto res = replay(s, trace.actions);
  const std::set<OpinionRolePair> expected = {
      make_pair_spans(1, 1, 0, 0, RoleType::holder),
      make_pair_spans(1, 1, 2, 3, RoleType::target),
      make_pair_spans(4, 5, 2, 3, RoleType::holder),
      make_pair_spans(4, 5, 6, 8, RoleType::target),
  };
  const bool pairs_ok = as_set(res.pairs) == expected && res.pairs.size() == 4;
  const double f1 =
      evaluate({res.pairs}, {s.gold}).at(PredObject::pairs, MetricKind::exact).f1;
  const double secs = seconds_since(t0);
  report(1, "walkthrough-replay",
         pairs_ok && f1 == 1.0 && trace.notes.skipped_pairs == 0 && secs < 1.0,
         "4 pairs, exact O-R F1 = " + std::to_string(f1) + ", " +
             std::to_string(secs) + " s");
}

// ---- criterion 2: transition invariants at scale -------------------------

void criterion_invariants() {
  const auto t0 = Clock::now();
  testing::SynthOptions opt;
  opt.min_tokens = 1;
  opt.max_tokens = 30;
  opt.max_terms = 6;
  auto corpus = testing::synth_corpus(10000, 20240613, opt);
  long failures = 0;
  for (const auto& s : corpus) {
    OracleTrace trace = oracle(s);
    std::set<TermSpan> terms;
    for (const auto& p : s.gold) {
      terms.insert(p.opinion);
      terms.insert(p.role);
    }
    TransitionState st = initial_state(s);
    bool alpha_ok = true;
    for (const auto& a : trace.actions) {
      st = apply(st, a);
      if (a.tag == ActionTag::SHIFT && !(st.alpha_o.empty() && st.alpha_r.empty()))
        alpha_ok = false;
    }
    const auto& actions = trace.actions;
    const bool buffer_ok = count_tag(actions, ActionTag::NO_START) +
                               count_tag(actions, ActionTag::SHIFT) ==
                           s.size();
    const int starts = count_tag(actions, ActionTag::O_START) +
                       count_tag(actions, ActionTag::R_START);
    const bool term_ok = starts == count_tag(actions, ActionTag::SHIFT) &&
                         starts == static_cast<int>(terms.size());
    const bool round_trip = as_set(st.pairs) == as_set(s.gold) && st.terminal();
    if (!(alpha_ok && buffer_ok && term_ok && round_trip)) ++failures;
  }
  const double secs = seconds_since(t0);
  report(2, "transition-invariants-10k", failures == 0 && secs < 30.0,
         std::to_string(corpus.size()) + " sentences, " + std::to_string(failures) +
             " failures, " + std::to_string(secs) + " s");
}

// ---- criterion 3: overlap handling ---------------------------------------

void criterion_overlap() {
  testing::SynthOptions opt;
  opt.min_tokens = 8;
  opt.max_tokens = 20;
  opt.fixed_terms = 6;
  opt.heavy_overlap = true;
  auto corpus = testing::synth_corpus(500, 7070, opt);
  long roles_total = 0, roles_shared = 0, pairs_total = 0, pairs_recalled = 0;
  for (const auto& s : corpus) {
    std::map<TermSpan, int> role_uses;
    for (const auto& p : s.gold) ++role_uses[p.role];
    for (const auto& [role, uses] : role_uses) {
      ++roles_total;
      if (uses >= 2) ++roles_shared;
    }
    auto res = replay(s, oracle(s).actions);
    const auto got = as_set(res.pairs);
    for (const auto& p : s.gold) {
      ++pairs_total;
      if (got.contains(p)) ++pairs_recalled;
    }
  }
  const double share =
      roles_total == 0 ? 0 : static_cast<double>(roles_shared) / roles_total;
  const bool recall_ok = pairs_recalled == pairs_total;
  report(3, "overlap-oracle-recall", share >= 0.30 && recall_ok,
         "shared-role rate " + std::to_string(share) + ", pair recall " +
             std::to_string(pairs_recalled) + "/" + std::to_string(pairs_total));
}

// ---- criterion 4: gradient checks ----------------------------------------

void criterion_gradients() {
  const auto t0 = Clock::now();
  auto checks = nn::gradcheck_heads(20240801);
  const std::vector<std::string> required = {
      "action_mlp", "pointer",   "pointer_pos_bde", "span_repr",
      "biaffine",   "rcga",      "triaffine",       "composite_loss",
      "composite_loss_syntax"};
  bool all_present = true;
  for (const auto& name : required) {
    bool found = false;
    for (const auto& c : checks)
      if (c.name == name) found = true;
    if (!found) all_present = false;
  }
  double worst = 0;
  std::string worst_name = "-";
  for (const auto& c : checks)
    if (c.max_rel_err > worst) {
      worst = c.max_rel_err;
      worst_name = c.name;
    }
  const double secs = seconds_since(t0);
  report(4, "gradient-checks", all_present && worst < 1e-4 && secs < 120.0,
         std::to_string(checks.size()) + " heads, worst " + worst_name + " " +
             std::to_string(worst) + ", " + std::to_string(secs) + " s");
}

// ---- criterion 5: overfit ------------------------------------------------

std::vector<Sentence> overfit_corpus() {
  testing::SynthOptions opt;
  opt.min_tokens = 5;
  opt.max_tokens = 8;
  opt.fixed_terms = 3;
  opt.max_term_len = 2;
  opt.rule_based_links = true;
  return testing::synth_corpus(16, 90125, opt);
}

ModelConfig overfit_config(bool enhanced) {
  ModelConfig cfg;
  cfg.word_dim = 24;
  cfg.char_dim = 8;
  cfg.char_filters = {4, 4, 4};
  cfg.enc_hidden = 16;
  cfg.span_dim = 24;
  cfg.stack_hidden = 20;
  cfg.lambda_hidden = 20;
  cfg.action_dim = 8;
  cfg.action_hidden = 12;
  cfg.pointer_dim = 16;
  cfg.mlp_hidden = 24;
  cfg.len_dim = 8;
  cfg.len_buckets = 5;
  cfg.pos_dim = 8;
  cfg.label_dim = 8;
  cfg.syntax_enhanced = enhanced;
  return cfg;
}

void criterion_overfit() {
  auto corpus = overfit_corpus();
  Vocab vocab = Vocab::build(corpus, testing::synth_header());

  TrainConfig tcfg;
  tcfg.epochs = 200;
  tcfg.learning_rate = 1e-3;
  tcfg.seed = 11;
  tcfg.early_stop_f1 = 1.0;

  const auto t0 = Clock::now();
  Model vanilla(overfit_config(false), vocab, 17);
  auto r1 = train(vanilla, corpus, {}, tcfg, "");
  const double f1_vanilla = exact_pair_f1(vanilla, corpus);
  const double secs_vanilla = seconds_since(t0);
  report(5, "overfit-vanilla",
         f1_vanilla == 1.0 && static_cast<int>(r1.epochs.size()) <= 200 &&
             secs_vanilla < 300.0,
         "exact O-R F1 " + std::to_string(f1_vanilla) + " after " +
             std::to_string(r1.epochs.size()) + " epochs, " +
             std::to_string(secs_vanilla) + " s");

  const auto t1 = Clock::now();
  tcfg.syntax_enhanced = true;
  Model enhanced(overfit_config(true), vocab, 17);
  auto r2 = train(enhanced, corpus, {}, tcfg, "");
  const double f1_enhanced = exact_pair_f1(enhanced, corpus);
  const double secs_enhanced = seconds_since(t1);
  report(5, "overfit-syntax-enhanced",
         f1_enhanced == 1.0 && static_cast<int>(r2.epochs.size()) <= 200,
         "exact O-R F1 " + std::to_string(f1_enhanced) + " after " +
             std::to_string(r2.epochs.size()) + " epochs, " +
             std::to_string(secs_enhanced) + " s");
}

// ---- criterion 6: metric oracle ------------------------------------------

struct BruteItem {
  std::vector<TermSpan> terms;
  int type;
};

std::vector<BruteItem> brute_project(const std::vector<OpinionRolePair>& pairs,
                                     PredObject o) {
  std::vector<BruteItem> items;
  auto push_unique = [&](const BruteItem& it) {
    for (const auto& e : items)
      if (e.terms == it.terms && e.type == it.type) return;
    items.push_back(it);
  };
  for (const auto& p : pairs) {
    if (o == PredObject::opinions) {
      push_unique({{p.opinion}, -1});
    } else {
      if (o == PredObject::pairs_hd && p.role_type != RoleType::holder) continue;
      if (o == PredObject::pairs_tg && p.role_type != RoleType::target) continue;
      push_unique({{p.opinion, p.role}, static_cast<int>(p.role_type)});
    }
  }
  return items;
}

double brute_credit(const BruteItem& p, const BruteItem& g, MetricKind m) {
  if (p.type != g.type) return 0;
  double total = 0;
  for (size_t t = 0; t < p.terms.size(); ++t) {
    const int lo = std::max(p.terms[t].start, g.terms[t].start);
    const int hi = std::min(p.terms[t].end, g.terms[t].end);
    const int ov = hi - lo + 1;
    if (ov <= 0) return 0;
    if (m == MetricKind::exact &&
        (p.terms[t].start != g.terms[t].start || p.terms[t].end != g.terms[t].end))
      return 0;
    total += static_cast<double>(ov) / g.terms[t].length();
  }
  return m == MetricKind::proportional
             ? total / static_cast<double>(p.terms.size())
             : 1.0;
}

double brute_best(const std::vector<BruteItem>& pred,
                  const std::vector<BruteItem>& gold, MetricKind m, size_t pi,
                  std::vector<bool>& used) {
  if (pi == pred.size()) return 0;
  double best = brute_best(pred, gold, m, pi + 1, used);
  for (size_t gi = 0; gi < gold.size(); ++gi) {
    if (used[gi]) continue;
    used[gi] = true;
    best = std::max(best, brute_credit(pred[pi], gold[gi], m) +
                              brute_best(pred, gold, m, pi + 1, used));
    used[gi] = false;
  }
  return best;
}

std::vector<OpinionRolePair> random_pairs(std::mt19937_64& rng, int max_items,
                                          int T) {
  std::uniform_int_distribution<int> count(0, max_items);
  std::uniform_int_distribution<int> pos(0, T - 1);
  std::uniform_int_distribution<int> len(0, 2);
  std::set<OpinionRolePair> seen;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const int os = pos(rng), oe = std::min(os + len(rng), T - 1);
    const int rs = pos(rng), re = std::min(rs + len(rng), T - 1);
    seen.insert(make_pair_spans(os, oe, rs, re,
                                rng() % 2 ? RoleType::holder : RoleType::target));
  }
  return {seen.begin(), seen.end()};
}

void criterion_metrics() {
  std::mt19937_64 rng(424242);
  long mismatches = 0, dominance_breaks = 0;
  for (int it = 0; it < 1000; ++it) {
    auto pred = random_pairs(rng, 5, 8);
    auto gold = random_pairs(rng, 5, 8);
    auto rep = evaluate({pred}, {gold});
    for (int o = 0; o < 4; ++o) {
      const auto obj = static_cast<PredObject>(o);
      double f1s[3];
      for (int m = 0; m < 3; ++m) {
        const auto metric = static_cast<MetricKind>(m);
        auto p_items = brute_project(pred, obj);
        auto g_items = brute_project(gold, obj);
        std::vector<bool> used(g_items.size(), false);
        const double matched = brute_best(p_items, g_items, metric, 0, used);
        const double prec =
            p_items.empty() ? 0 : matched / static_cast<double>(p_items.size());
        const double rec =
            g_items.empty() ? 0 : matched / static_cast<double>(g_items.size());
        const double f1 = prec + rec == 0 ? 0 : 2 * prec * rec / (prec + rec);
        const Prf& got = rep.at(obj, metric);
        if (std::abs(got.precision - prec) > 1e-9 ||
            std::abs(got.recall - rec) > 1e-9 || std::abs(got.f1 - f1) > 1e-9)
          ++mismatches;
        f1s[m] = got.f1;
      }
      if (f1s[0] > f1s[2] + 1e-12 || f1s[0] > f1s[1] + 1e-12 ||
          f1s[2] > f1s[1] + 1e-12)
        ++dominance_breaks;  // order: exact, binary, proportional
    }
  }
  report(6, "metric-oracle-1000", mismatches == 0 && dominance_breaks == 0,
         std::to_string(mismatches) + " mismatches, " +
             std::to_string(dominance_breaks) + " dominance violations");
}

// ---- criterion 7: graph properties ----------------------------------------

void criterion_graph() {
  std::mt19937_64 rng(1337);
  testing::SynthOptions opt;
  opt.min_tokens = 3;
  opt.max_tokens = 12;
  auto corpus = testing::synth_corpus(1000, 5151, opt);

  long multiset_mismatches = 0;
  for (const auto& s : corpus) {
    Udog batch = build_udog(s, s.gold);
    std::vector<OpinionRolePair> shuffled = s.gold;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    Udog inc = build_udog(s, {});
    for (const auto& p : shuffled) add_pair(inc, p);
    std::multiset<std::tuple<int, int, std::string, int>> a, b;
    for (const auto& e : batch.edges)
      a.insert({e.src, e.dst, e.label, static_cast<int>(e.family)});
    for (const auto& e : inc.edges)
      b.insert({e.src, e.dst, e.label, static_cast<int>(e.family)});
    if (a != b) ++multiset_mismatches;
  }

  // RCGA edge-order invariance and pooling node-permutation invariance
  nn::ParamStore store(2020);
  const int dim = 6;
  nn::RcgaHead head = nn::RcgaHead::wire(store, "rcga", dim, 4, 16, 2, false);
  auto slot = [](const std::string& label, bool incoming) {
    const std::vector<std::string> labels = {"dep", "mod", "hd", "tg",
                                             "opn", "role", "self"};
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return static_cast<int>(i) * 2 + (incoming ? 1 : 0);
    throw Error("Internal", "unknown label " + label);
  };
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  double worst_diff = 0;
  bool pool_ok = true;
  for (int it = 0; it < 50; ++it) {
    const Sentence& s = corpus[it * 7];
    Udog g = build_udog(s, s.gold);
    std::vector<UdogEdge> edges = g.edges;
    std::shuffle(edges.begin(), edges.end(), rng);
    Udog g2;
    g2.num_nodes = g.num_nodes;
    g2.incident.resize(g.num_nodes);
    for (const auto& e : edges) g2.add_edge(e);

    nn::Tape t;
    std::vector<nn::Expr> h1, h2;
    for (int i = 0; i < g.num_nodes; ++i) {
      nn::Mat x(dim, 1);
      for (int r = 0; r < dim; ++r) x(r, 0) = dist(rng);
      h1.push_back(t.constant(x));
      h2.push_back(t.constant(x));
    }
    auto a = nn::rcga_encode(t, head, slot, g, h1);
    auto b = nn::rcga_encode(t, head, slot, g2, h2);
    for (int i = 0; i < g.num_nodes; ++i)
      worst_diff = std::max(
          worst_diff, (a[i].val() - b[i].val()).lpNorm<Eigen::Infinity>());

    nn::Expr pooled = nn::graph_pool(t, a);
    std::vector<nn::Expr> perm = a;
    std::shuffle(perm.begin(), perm.end(), rng);
    if ((nn::graph_pool(t, perm).val() - pooled.val()).norm() != 0.0)
      pool_ok = false;
  }
  report(7, "udog-rcga-properties",
         multiset_mismatches == 0 && worst_diff < 1e-9 && pool_ok,
         std::to_string(multiset_mismatches) +
             " incremental/batch mismatches, max rcga perm diff " +
             std::to_string(worst_diff));
}

// ---- criterion 8: linear buffer behavior ----------------------------------

void criterion_linear() {
  const std::vector<int> sizes = {10, 20, 40, 80};
  std::vector<double> mean_steps;
  bool pops_ok = true;
  for (int T : sizes) {
    testing::SynthOptions opt;
    opt.min_tokens = T;
    opt.max_tokens = T;
    opt.fixed_terms = 4;  // constant structure size isolates buffer growth
    opt.max_term_len = 3;
    auto corpus = testing::synth_corpus(200, 600 + T, opt);
    double total = 0;
    for (const auto& s : corpus) {
      auto trace = oracle(s);
      const int pops = count_tag(trace.actions, ActionTag::NO_START) +
                       count_tag(trace.actions, ActionTag::SHIFT);
      if (pops != s.size()) pops_ok = false;
      total += static_cast<double>(trace.actions.size());
    }
    mean_steps.push_back(total / static_cast<double>(corpus.size()));
  }
  // least-squares slope over the four points
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(sizes.size());
  for (int i = 0; i < n; ++i) {
    sx += sizes[i];
    sy += mean_steps[i];
    sxx += static_cast<double>(sizes[i]) * sizes[i];
    sxy += sizes[i] * mean_steps[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double max_dev = 0;
  for (int i = 0; i + 1 < n; ++i) {
    const double seg = (mean_steps[i + 1] - mean_steps[i]) /
                       static_cast<double>(sizes[i + 1] - sizes[i]);
    max_dev = std::max(max_dev, std::abs(seg - slope) / slope);
  }
  report(8, "linear-buffer-growth", pops_ok && max_dev < 0.10,
         "slope " + std::to_string(slope) + ", max segment deviation " +
             std::to_string(100 * max_dev) + "%");
}

}  // namespace

int main() {
  criterion_walkthrough();
  criterion_invariants();
  criterion_overlap();
  criterion_gradients();
  criterion_overfit();
  criterion_metrics();
  criterion_graph();
  criterion_linear();
  if (g_failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criterion check(s) FAILED\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
