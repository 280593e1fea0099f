#pragma once

// Unified dependency-opinion graph: a labeled multigraph over the tokens
// that merges the dependency tree with inter-term and intra-term edges of
// the opinion-role structure detected so far, plus a relation-centered
// attention aggregator (RCGA), max graph pooling and the triaffine role
// scorer that consumes the pooled feature.

#include <functional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "orl/core.hpp"
#include "orl/graph.hpp"
#include "orl/params.hpp"

namespace orl {

struct UdogEdge {
  enum class Family { dep, inter_term, intra_term, self_loop };
  int src = 0;
  int dst = 0;
  std::string label;
  Family family = Family::dep;

  bool operator==(const UdogEdge&) const = default;
};

const char* to_string(UdogEdge::Family f);

struct Udog {
  int num_nodes = 0;
  std::vector<UdogEdge> edges;
  std::vector<std::vector<int>> incident;  // node -> edge ids, either endpoint

  // appends an edge; coincident parallel edges are kept (multigraph)
  void add_edge(const UdogEdge& e);
  bool has_edge(const UdogEdge& e) const;

 private:
  std::multiset<std::tuple<int, int, std::string, int>> keys_;
  std::set<TermSpan> terms_;
  std::set<OpinionRolePair> pairs_;
  friend Udog build_udog(const Sentence&, const std::vector<OpinionRolePair>&);
  friend void add_pair(Udog&, const OpinionRolePair&);
};

// Dependency edges with their syntactic labels, intra-term edges from each
// term's tail token to its other tokens ("opn"/"role"), one inter-term edge
// per pair from the opinion tail to the role tail labeled with the role
// type, and a "self" loop on every node.
Udog build_udog(const Sentence& s, const std::vector<OpinionRolePair>& pairs);

// Appends the pair's edges; idempotent for duplicates and shared terms.
void add_pair(Udog& g, const OpinionRolePair& p);

// Debug dump: one JSON object with the labeled edge list.
nlohmann::ordered_json udog_to_json(const Udog& g);

namespace nn {

struct RcgaLayer {
  Param* att_w = nullptr;  // 1 x (node + node + label)
  Param* msg_w = nullptr;  // out x (node + label)
};

struct RcgaHead {
  Param* label_table = nullptr;  // label_dim x slots; slot = label id * 2 + incoming
  std::vector<RcgaLayer> layers;
  double leaky_slope = 0.01;

  static RcgaHead wire(ParamStore& store, const std::string& prefix, int node_dim,
                       int label_dim, int label_slots, int num_layers, bool strict);
};

// one aggregation pass; label_slot maps (edge label, incoming?) to a column
using LabelSlotFn = std::function<int(const std::string&, bool)>;
std::vector<Expr> rcga_layer(Tape& tape, const RcgaLayer& layer, Param& label_table,
                             const LabelSlotFn& label_slot, const Udog& g,
                             std::span<const Expr> h, double leaky_slope);

// stacked passes with per-layer parameters
std::vector<Expr> rcga_encode(Tape& tape, const RcgaHead& head,
                              const LabelSlotFn& label_slot, const Udog& g,
                              std::span<const Expr> h);

// elementwise max over node vectors
Expr graph_pool(Tape& tape, std::span<const Expr> h);

struct TriaffineHead {
  // per class: (span+1) x (span * (pool+1)), column index b + c*span
  Param* slab_hd = nullptr;
  Param* slab_tg = nullptr;
  int span_dim = 0;
  int pool_dim = 0;

  static TriaffineHead wire(ParamStore& store, const std::string& prefix,
                            int span_dim, int pool_dim, bool strict);
  // raw trilinear scores over [a_o;1], a_r, [g;1]; row 0 = holder
  Expr scores(Tape& tape, Expr a_o, Expr a_r, Expr pooled) const;
};

}  // namespace nn
}  // namespace orl
