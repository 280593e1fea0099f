// Python bindings for the main operations: corpus I/O, validation, the
// transition oracle and executor, training, parsing, evaluation and the
// gradient-check battery.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orl/data.hpp"
#include "orl/eval.hpp"
#include "orl/gradcheck.hpp"
#include "orl/model.hpp"
#include "orl/train.hpp"
#include "orl/transition.hpp"

namespace py = pybind11;
using namespace orl;

namespace {

Sentence make_sentence(const std::vector<std::string>& tokens,
                       const std::vector<std::string>& pos,
                       const std::vector<int>& heads,
                       const std::vector<std::string>& deprels,
                       const std::vector<std::tuple<int, int, int, int, std::string>>& pairs,
                       const std::string& id, const std::string& doc) {
  if (tokens.size() != pos.size() || tokens.size() != heads.size() ||
      tokens.size() != deprels.size())
    throw Error("ParseError", "tokens, pos, heads and deprels must align");
  Sentence s;
  s.id = id;
  s.doc = doc;
  for (size_t i = 0; i < tokens.size(); ++i) {
    s.tokens.push_back(Token::make(static_cast<int>(i), tokens[i], pos[i]));
    // heads are 1-based with 0 for ROOT, matching the file format
    s.deps.push_back({static_cast<int>(i), heads[i] - 1, deprels[i]});
  }
  for (const auto& [oi, oj, ri, rj, type] : pairs) {
    auto t = role_type_from_string(type);
    if (!t) throw Error("ParseError", "unknown role type " + type);
    s.gold.push_back(make_pair_spans(oi - 1, oj - 1, ri - 1, rj - 1, *t));
  }
  require_valid(s);
  return s;
}

py::dict prf_dict(const Prf& p) {
  py::dict d;
  d["precision"] = p.precision;
  d["recall"] = p.recall;
  d["f1"] = p.f1;
  return d;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  for (int o = 0; o < 4; ++o) {
    py::dict od;
    for (int m = 0; m < 3; ++m)
      od[to_string(static_cast<MetricKind>(m))] =
          prf_dict(r.at(static_cast<PredObject>(o), static_cast<MetricKind>(m)));
    d[to_string(static_cast<PredObject>(o))] = od;
  }
  return d;
}

TrainConfig train_config_from_dict(const py::dict& d) {
  TrainConfig cfg;
  for (auto item : d) {
    const std::string key = py::cast<std::string>(item.first);
    if (key == "learning_rate") cfg.learning_rate = py::cast<double>(item.second);
    else if (key == "epochs") cfg.epochs = py::cast<int>(item.second);
    else if (key == "l2") cfg.l2 = py::cast<double>(item.second);
    else if (key == "seed") cfg.seed = py::cast<uint64_t>(item.second);
    else if (key == "syntax_enhanced") cfg.syntax_enhanced = py::cast<bool>(item.second);
    else if (key == "batch_size") cfg.batch_size = py::cast<int>(item.second);
    else if (key == "grad_clip") cfg.grad_clip = py::cast<double>(item.second);
    else if (key == "early_stop_f1") cfg.early_stop_f1 = py::cast<double>(item.second);
    else throw Error("ParseError", "unknown train config key " + key);
  }
  return cfg;
}

ModelConfig model_config_from_dict(const py::dict& d) {
  ModelConfig cfg;
  for (auto item : d) {
    const std::string key = py::cast<std::string>(item.first);
    const auto as_int = [&] { return py::cast<int>(item.second); };
    if (key == "word_dim") cfg.word_dim = as_int();
    else if (key == "char_dim") cfg.char_dim = as_int();
    else if (key == "enc_hidden") cfg.enc_hidden = as_int();
    else if (key == "span_dim") cfg.span_dim = as_int();
    else if (key == "stack_hidden") cfg.stack_hidden = as_int();
    else if (key == "lambda_hidden") cfg.lambda_hidden = as_int();
    else if (key == "action_dim") cfg.action_dim = as_int();
    else if (key == "action_hidden") cfg.action_hidden = as_int();
    else if (key == "pointer_dim") cfg.pointer_dim = as_int();
    else if (key == "mlp_hidden") cfg.mlp_hidden = as_int();
    else if (key == "len_dim") cfg.len_dim = as_int();
    else if (key == "len_buckets") cfg.len_buckets = as_int();
    else if (key == "pos_dim") cfg.pos_dim = as_int();
    else if (key == "label_dim") cfg.label_dim = as_int();
    else if (key == "char_filters")
      cfg.char_filters = py::cast<std::vector<int>>(item.second);
    else if (key == "syntax_enhanced")
      cfg.syntax_enhanced = py::cast<bool>(item.second);
    else if (key == "rcga_per_shift")
      cfg.rcga_per_shift = py::cast<bool>(item.second);
    else if (key == "tiny" && py::cast<bool>(item.second))
      cfg = ModelConfig::tiny();
    else throw Error("ParseError", "unknown model config key " + key);
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "opinion role labeling with a pointer-augmented transition parser";

  py::register_exception<Error>(m, "OrlError");

  py::enum_<SpanKind>(m, "SpanKind")
      .value("opinion", SpanKind::opinion)
      .value("role", SpanKind::role);

  py::class_<TermSpan>(m, "TermSpan")
      .def(py::init([](int start, int end, SpanKind kind) {
             return TermSpan{start, end, kind};
           }),
           py::arg("start"), py::arg("end"), py::arg("kind"))
      .def_readonly("start", &TermSpan::start)
      .def_readonly("end", &TermSpan::end)
      .def_readonly("kind", &TermSpan::kind)
      .def("__len__", &TermSpan::length)
      .def("__eq__", [](const TermSpan& a, const TermSpan& b) { return a == b; })
      .def("__repr__", [](const TermSpan& t) {
        return "TermSpan(" + std::to_string(t.start) + ", " + std::to_string(t.end) +
               (t.kind == SpanKind::opinion ? ", opinion)" : ", role)");
      });

  py::class_<OpinionRolePair>(m, "Pair")
      .def_readonly("opinion", &OpinionRolePair::opinion)
      .def_readonly("role", &OpinionRolePair::role)
      .def_property_readonly(
          "type", [](const OpinionRolePair& p) { return to_string(p.role_type); })
      .def("__eq__", [](const OpinionRolePair& a,
                        const OpinionRolePair& b) { return a == b; })
      .def("__repr__", [](const OpinionRolePair& p) {
        return "Pair(opinion=(" + std::to_string(p.opinion.start + 1) + "," +
               std::to_string(p.opinion.end + 1) + "), role=(" +
               std::to_string(p.role.start + 1) + "," +
               std::to_string(p.role.end + 1) + "), type=" +
               to_string(p.role_type) + ")";
      });

  py::class_<Sentence>(m, "Sentence")
      .def_readonly("id", &Sentence::id)
      .def_readonly("doc", &Sentence::doc)
      .def_property_readonly("tokens",
                             [](const Sentence& s) {
                               std::vector<std::string> out;
                               for (const auto& t : s.tokens)
                                 out.push_back(t.surface);
                               return out;
                             })
      .def_property_readonly("pos",
                             [](const Sentence& s) {
                               std::vector<std::string> out;
                               for (const auto& t : s.tokens) out.push_back(t.pos);
                               return out;
                             })
      .def_readonly("gold", &Sentence::gold)
      .def("__len__", &Sentence::size);

  m.def("make_sentence", &make_sentence, py::arg("tokens"), py::arg("pos"),
        py::arg("heads"), py::arg("deprels"),
        py::arg("pairs") = std::vector<std::tuple<int, int, int, int, std::string>>{},
        py::arg("id") = "s1", py::arg("doc") = "d1",
        "build a validated sentence; indices 1-based, head 0 is the root");

  m.def("validate", [](const Sentence& s) -> py::object {
    auto v = validate_sentence(s);
    if (!v) return py::none();
    return py::str(std::string(to_string(v->kind)) + ": " + v->message);
  });

  m.def("overlap_tokens", [](std::pair<int, int> a, std::pair<int, int> b) {
    return overlap_tokens(TermSpan{a.first, a.second, SpanKind::role},
                          TermSpan{b.first, b.second, SpanKind::role});
  });

  py::class_<Action>(m, "Action")
      .def_property_readonly("tag",
                             [](const Action& a) { return to_string(a.tag); })
      .def_property_readonly("end",
                             [](const Action& a) -> py::object {
                               if (!a.end_index) return py::none();
                               return py::int_(*a.end_index + 1);
                             })
      .def_property_readonly("role",
                             [](const Action& a) -> py::object {
                               if (!a.role_type) return py::none();
                               return py::str(to_string(*a.role_type));
                             })
      .def("to_json", &action_to_json)
      .def("__repr__", &action_to_json);
  m.def("action_from_json", &action_from_json);

  m.def("oracle", [](const Sentence& s) {
    OracleTrace trace = oracle(s);
    py::dict notes;
    notes["skipped_terms"] = trace.notes.skipped_terms;
    notes["skipped_pairs"] = trace.notes.skipped_pairs;
    notes["messages"] = trace.notes.messages;
    return py::make_tuple(trace.actions, notes);
  });

  m.def("replay", [](const Sentence& s, const std::vector<Action>& actions) {
    return replay(s, actions).pairs;
  });

  m.def("load_corpus", [](const std::string& path) {
    Corpus c = load_corpus(path);
    py::dict header;
    header["pos_tags"] = c.header.pos_tags;
    header["dep_labels"] = c.header.dep_labels;
    return py::make_tuple(c.sentences, header);
  });

  m.def("save_corpus", [](const std::vector<Sentence>& sentences,
                          const std::vector<std::string>& pos_tags,
                          const std::vector<std::string>& dep_labels,
                          const std::string& path) {
    Corpus c;
    c.header.pos_tags = pos_tags;
    c.header.dep_labels = dep_labels;
    c.sentences = sentences;
    save_corpus(c, path);
  });

  py::class_<Model>(m, "Model")
      .def_static(
          "fresh",
          [](const std::vector<Sentence>& corpus,
             const std::vector<std::string>& pos_tags,
             const std::vector<std::string>& dep_labels, const py::dict& config,
             uint64_t seed) {
            CorpusHeader header;
            header.pos_tags = pos_tags;
            header.dep_labels = dep_labels;
            return Model(model_config_from_dict(config),
                         Vocab::build(corpus, header), seed);
          },
          py::arg("corpus"), py::arg("pos_tags"), py::arg("dep_labels"),
          py::arg("config") = py::dict(), py::arg("seed") = 1)
      .def_static("load", &Model::load)
      .def("save", &Model::save)
      .def("parse",
           [](const Model& model, const Sentence& s) {
             auto out = model.parse(s);
             return py::make_tuple(out.pairs, out.actions);
           })
      .def_property_readonly("syntax_enhanced",
                             [](const Model& model) {
                               return model.config().syntax_enhanced;
                             })
      .def_property_readonly("param_names", [](const Model& model) {
        return model.params().names();
      });

  m.def(
      "train",
      [](Model& model, const std::vector<Sentence>& train_set,
         const std::vector<Sentence>& dev_set, const py::dict& config,
         const std::string& checkpoint_path) {
        TrainConfig cfg = train_config_from_dict(config);
        auto report = train(model, train_set, dev_set, cfg, checkpoint_path);
        return py::module_::import("json").attr("loads")(report.to_json().dump());
      },
      py::arg("model"), py::arg("train_set"),
      py::arg("dev_set") = std::vector<Sentence>{}, py::arg("config") = py::dict(),
      py::arg("checkpoint_path") = std::string());

  m.def(
      "evaluate",
      [](const std::vector<std::vector<OpinionRolePair>>& pred,
         const std::vector<std::vector<OpinionRolePair>>& gold,
         const std::string& aggregate) {
        EvalOptions opts;
        if (aggregate == "min")
          opts.aggregate = EvalOptions::PairAggregate::min;
        else if (aggregate != "mean")
          throw Error("ParseError", "aggregate must be mean or min");
        return report_dict(evaluate(pred, gold, opts));
      },
      py::arg("pred"), py::arg("gold"), py::arg("aggregate") = "mean");

  m.def(
      "split_folds",
      [](const std::vector<Sentence>& sentences, int k, uint64_t seed) {
        Corpus c;
        c.sentences = sentences;
        std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
        for (const auto& f : split_folds(c, k, seed)) out.push_back({f.train, f.test});
        return out;
      },
      py::arg("sentences"), py::arg("k"), py::arg("seed") = 1);

  m.def(
      "gradcheck",
      [](uint64_t seed, const std::vector<std::string>& heads) {
        std::vector<std::pair<std::string, double>> out;
        for (const auto& c : orl::nn::gradcheck_heads(seed, {}, heads))
          out.push_back({c.name, c.max_rel_err});
        return out;
      },
      py::arg("seed") = 1, py::arg("heads") = std::vector<std::string>{});
}
