#include "orl/udog.hpp"

namespace orl {

const char* to_string(UdogEdge::Family f) {
  switch (f) {
    case UdogEdge::Family::dep: return "dep";
    case UdogEdge::Family::inter_term: return "inter_term";
    case UdogEdge::Family::intra_term: return "intra_term";
    case UdogEdge::Family::self_loop: return "self";
  }
  return "?";
}

void Udog::add_edge(const UdogEdge& e) {
  if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes)
    throw Error("OutOfRangeSpan", "edge endpoint outside the sentence");
  keys_.insert(std::make_tuple(e.src, e.dst, e.label, static_cast<int>(e.family)));
  const int id = static_cast<int>(edges.size());
  edges.push_back(e);
  incident[e.src].push_back(id);
  if (e.dst != e.src) incident[e.dst].push_back(id);
}

bool Udog::has_edge(const UdogEdge& e) const {
  return keys_.contains(
      std::make_tuple(e.src, e.dst, e.label, static_cast<int>(e.family)));
}

namespace {

// tail-first linking: the tail token connects to every other token
void add_term_edges(Udog& g, const TermSpan& term) {
  const char* label = term.kind == SpanKind::opinion ? "opn" : "role";
  for (int i = term.start; i < term.end; ++i)
    g.add_edge({term.end, i, label, UdogEdge::Family::intra_term});
}

}  // namespace

Udog build_udog(const Sentence& s, const std::vector<OpinionRolePair>& pairs) {
  Udog g;
  g.num_nodes = s.size();
  g.incident.resize(g.num_nodes);
  for (const auto& arc : s.deps) {
    if (arc.head == kRootHead) continue;  // ROOT is not a node
    g.add_edge({arc.head, arc.dependent, arc.label, UdogEdge::Family::dep});
  }
  for (int i = 0; i < g.num_nodes; ++i)
    g.add_edge({i, i, "self", UdogEdge::Family::self_loop});
  for (const auto& p : pairs) add_pair(g, p);
  return g;
}

void add_pair(Udog& g, const OpinionRolePair& p) {
  if (!g.pairs_.insert(p).second) return;  // already present
  if (g.terms_.insert(p.opinion).second) add_term_edges(g, p.opinion);
  if (g.terms_.insert(p.role).second) add_term_edges(g, p.role);
  g.add_edge({p.opinion.end, p.role.end, to_string(p.role_type),
              UdogEdge::Family::inter_term});
}

nlohmann::ordered_json udog_to_json(const Udog& g) {
  nlohmann::ordered_json j;
  j["nodes"] = g.num_nodes;
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    nlohmann::ordered_json ej;
    ej["src"] = e.src + 1;
    ej["dst"] = e.dst + 1;
    ej["label"] = e.label;
    ej["family"] = to_string(e.family);
    edges.push_back(std::move(ej));
  }
  j["edges"] = std::move(edges);
  return j;
}

namespace nn {

RcgaHead RcgaHead::wire(ParamStore& store, const std::string& prefix, int node_dim,
                        int label_dim, int label_slots, int num_layers,
                        bool strict) {
  auto wire_param = [&](const std::string& name, int rows, int cols, Init init) -> Param& {
    return strict ? store.require(name, rows, cols)
                  : store.ensure(name, rows, cols, init);
  };
  RcgaHead head;
  head.label_table = &wire_param(prefix + ".labels", label_dim, label_slots,
                                 Init::uniform);
  for (int l = 0; l < num_layers; ++l) {
    const std::string lp = prefix + ".l" + std::to_string(l + 1);
    RcgaLayer layer;
    layer.att_w = &wire_param(lp + ".att", 1, 2 * node_dim + label_dim, Init::glorot);
    layer.msg_w = &wire_param(lp + ".msg", node_dim, node_dim + label_dim, Init::glorot);
    head.layers.push_back(layer);
  }
  return head;
}

std::vector<Expr> rcga_layer(Tape& tape, const RcgaLayer& layer, Param& label_table,
                             const LabelSlotFn& label_slot, const Udog& g,
                             std::span<const Expr> h, double leaky_slope) {
  if (static_cast<int>(h.size()) != g.num_nodes)
    throw Error("Internal", "rcga: node feature count mismatch");
  Expr att = tape.param(*layer.att_w);
  Expr msg = tape.param(*layer.msg_w);
  std::vector<Expr> out(g.num_nodes);
  for (int i = 0; i < g.num_nodes; ++i) {
    const auto& inc = g.incident[i];
    if (inc.empty()) throw Error("Internal", "rcga: isolated node");
    std::vector<Expr> scores, messages;
    scores.reserve(inc.size());
    for (int eid : inc) {
      const UdogEdge& e = g.edges[eid];
      const bool incoming = e.dst == i && e.src != i;
      const int j = e.src == i ? e.dst : e.src;
      Expr relation =
          concat({h[j], tape.lookup(label_table, label_slot(e.label, incoming))});
      scores.push_back(
          leaky_relu(matmul(att, concat({h[i], relation})), leaky_slope));
      messages.push_back(matmul(msg, relation));
    }
    Expr weights = softmax(concat(scores));
    std::vector<Expr> weighted;
    weighted.reserve(messages.size());
    for (size_t v = 0; v < messages.size(); ++v)
      weighted.push_back(smul(pick(weights, static_cast<int>(v)), messages[v]));
    out[i] = scale(sum(weighted), 1.0 / static_cast<double>(inc.size()));
  }
  return out;
}

std::vector<Expr> rcga_encode(Tape& tape, const RcgaHead& head,
                              const LabelSlotFn& label_slot, const Udog& g,
                              std::span<const Expr> h) {
  std::vector<Expr> cur(h.begin(), h.end());
  for (const auto& layer : head.layers)
    cur = rcga_layer(tape, layer, *head.label_table, label_slot, g, cur,
                     head.leaky_slope);
  return cur;
}

Expr graph_pool(Tape& tape, std::span<const Expr> h) {
  if (h.empty()) throw Error("Internal", "graph pool of no nodes");
  return emax(std::vector<Expr>(h.begin(), h.end()));
}

TriaffineHead TriaffineHead::wire(ParamStore& store, const std::string& prefix,
                                  int span_dim, int pool_dim, bool strict) {
  auto wire_param = [&](const std::string& name, int rows, int cols) -> Param& {
    return strict ? store.require(name, rows, cols)
                  : store.ensure(name, rows, cols, Init::glorot);
  };
  TriaffineHead t;
  t.span_dim = span_dim;
  t.pool_dim = pool_dim;
  const int cols = span_dim * (pool_dim + 1);
  t.slab_hd = &wire_param(prefix + ".hd", span_dim + 1, cols);
  t.slab_tg = &wire_param(prefix + ".tg", span_dim + 1, cols);
  return t;
}

Expr TriaffineHead::scores(Tape& tape, Expr a_o, Expr a_r, Expr pooled) const {
  Expr one = tape.scalar_constant(1.0);
  Expr u = concat({a_o, one});      // span_dim + 1
  Expr gg = concat({pooled, one});  // pool_dim + 1
  auto contract = [&](Param& slab) {
    // t = sum_{a,b,c} u_a * a_r_b * g_c * slab(a, b + c*span_dim)
    Expr w = matmul(transpose(tape.param(slab)), u);  // span*(pool+1) x 1
    Expr m = reshape(w, span_dim, pool_dim + 1);
    return dot(a_r, matmul(m, gg));
  };
  return concat({contract(*slab_hd), contract(*slab_tg)});
}

}  // namespace nn
}  // namespace orl
