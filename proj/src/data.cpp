#include "orl/data.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

namespace orl {

namespace {

nlohmann::json parse_line(const std::string& line, int lineno,
                          const std::string& origin) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error("ParseError",
                origin + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

}  // namespace

nlohmann::ordered_json sentence_to_json(const Sentence& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["doc"] = s.doc;
  auto tokens = nlohmann::ordered_json::array();
  auto pos = nlohmann::ordered_json::array();
  for (const auto& t : s.tokens) {
    tokens.push_back(t.surface);
    pos.push_back(t.pos);
  }
  j["tokens"] = std::move(tokens);
  j["pos"] = std::move(pos);
  std::vector<int> heads(s.tokens.size(), 0);
  std::vector<std::string> rels(s.tokens.size());
  for (const auto& arc : s.deps) {
    heads[arc.dependent] = arc.head == kRootHead ? 0 : arc.head + 1;
    rels[arc.dependent] = arc.label;
  }
  j["heads"] = heads;
  j["deprels"] = rels;
  auto pairs = nlohmann::ordered_json::array();
  for (const auto& p : s.gold) {
    nlohmann::ordered_json pj;
    pj["opinion"] = {p.opinion.start + 1, p.opinion.end + 1};
    pj["role"] = {p.role.start + 1, p.role.end + 1};
    pj["type"] = to_string(p.role_type);
    pairs.push_back(std::move(pj));
  }
  j["pairs"] = std::move(pairs);
  return j;
}

Sentence sentence_from_json(const nlohmann::json& j, const CorpusHeader& header) {
  Sentence s;
  s.id = j.value("id", "");
  s.doc = j.value("doc", "d0");
  const auto& tokens = j.at("tokens");
  const auto& pos = j.at("pos");
  if (tokens.size() != pos.size())
    throw Error("ParseError", "tokens and pos have different lengths");
  const std::set<std::string> tagset(header.pos_tags.begin(), header.pos_tags.end());
  for (size_t i = 0; i < tokens.size(); ++i) {
    const auto tag = pos[i].get<std::string>();
    if (!tagset.contains(tag))
      throw Error("ParseError", "POS tag '" + tag + "' not in the header tagset");
    s.tokens.push_back(Token::make(static_cast<int>(i), tokens[i].get<std::string>(), tag));
  }
  const auto& heads = j.at("heads");
  const auto& rels = j.at("deprels");
  if (heads.size() != tokens.size() || rels.size() != tokens.size())
    throw Error("ParseError", "heads/deprels length mismatch");
  for (size_t i = 0; i < heads.size(); ++i) {
    DependencyArc arc;
    arc.dependent = static_cast<int>(i);
    arc.head = heads[i].get<int>() - 1;  // 0 on disk is ROOT
    arc.label = rels[i].get<std::string>();
    s.deps.push_back(arc);
  }
  for (const auto& pj : j.value("pairs", nlohmann::json::array())) {
    const auto& o = pj.at("opinion");
    const auto& r = pj.at("role");
    auto type = role_type_from_string(pj.at("type").get<std::string>());
    if (!type) throw Error("ParseError", "unknown role type");
    s.gold.push_back(make_pair_spans(o.at(0).get<int>() - 1, o.at(1).get<int>() - 1,
                                     r.at(0).get<int>() - 1, r.at(1).get<int>() - 1,
                                     *type));
  }
  return s;
}

Corpus corpus_from_stream(std::istream& in, const std::string& origin) {
  Corpus c;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int auto_id = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = parse_line(line, lineno, origin);
    if (!have_header) {
      if (j.value("format", "") != kCorpusFormat)
        throw Error("HeaderMismatch",
                    origin + ": first record must declare format '" +
                        std::string(kCorpusFormat) + "'");
      if (j.value("version", 0) != 1)
        throw Error("HeaderMismatch", origin + ": unsupported corpus version");
      c.header.version = 1;
      c.header.pos_tags = j.at("pos_tags").get<std::vector<std::string>>();
      c.header.dep_labels = j.at("dep_labels").get<std::vector<std::string>>();
      have_header = true;
      continue;
    }
    try {
      Sentence s = sentence_from_json(j, c.header);
      if (s.id.empty()) s.id = "s" + std::to_string(++auto_id);
      if (auto v = validate_sentence(s))
        throw Error("ParseError", std::string(to_string(v->kind)) + ": " + v->message);
      c.sentences.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error("ParseError",
                  origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header)
    throw Error("HeaderMismatch", origin + ": empty corpus, no header record");
  return c;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open corpus file " + path);
  return corpus_from_stream(in, path);
}

void save_corpus(const Corpus& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("IoError", "cannot write corpus file " + path);
  nlohmann::ordered_json header;
  header["format"] = kCorpusFormat;
  header["version"] = c.header.version;
  header["pos_tags"] = c.header.pos_tags;
  header["dep_labels"] = c.header.dep_labels;
  out << header.dump() << "\n";
  for (const auto& s : c.sentences) out << sentence_to_json(s).dump() << "\n";
}

void save_predictions(const Corpus& c, const std::vector<Prediction>& preds,
                      const std::string& path, bool with_trace) {
  if (c.sentences.size() != preds.size())
    throw Error("AlignmentError", "prediction count differs from sentence count");
  std::ofstream out(path);
  if (!out) throw Error("IoError", "cannot write predictions file " + path);
  for (size_t i = 0; i < preds.size(); ++i) {
    auto j = sentence_to_json(c.sentences[i]);
    auto pred_pairs = nlohmann::ordered_json::array();
    for (const auto& p : preds[i].pairs) {
      nlohmann::ordered_json pj;
      pj["opinion"] = {p.opinion.start + 1, p.opinion.end + 1};
      pj["role"] = {p.role.start + 1, p.role.end + 1};
      pj["type"] = to_string(p.role_type);
      pred_pairs.push_back(std::move(pj));
    }
    j["pred_pairs"] = std::move(pred_pairs);
    if (with_trace) {
      auto trace = nlohmann::ordered_json::array();
      for (const auto& a : preds[i].trace)
        trace.push_back(nlohmann::ordered_json::parse(action_to_json(a)));
      j["trace"] = std::move(trace);
    }
    out << j.dump() << "\n";
  }
}

std::vector<std::vector<OpinionRolePair>> load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open predictions file " + path);
  std::vector<std::vector<OpinionRolePair>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = parse_line(line, lineno, path);
    std::vector<OpinionRolePair> pairs;
    for (const auto& pj : j.value("pred_pairs", nlohmann::json::array())) {
      const auto& o = pj.at("opinion");
      const auto& r = pj.at("role");
      auto type = role_type_from_string(pj.at("type").get<std::string>());
      if (!type)
        throw Error("ParseError", path + ":" + std::to_string(lineno) +
                                      ": unknown role type");
      pairs.push_back(make_pair_spans(o.at(0).get<int>() - 1, o.at(1).get<int>() - 1,
                                      r.at(0).get<int>() - 1, r.at(1).get<int>() - 1,
                                      *type));
    }
    out.push_back(std::move(pairs));
  }
  return out;
}

EmbeddingStats load_embeddings(const std::string& path,
                               const std::vector<std::string>& vocab_words,
                               nn::Param& table) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open embeddings file " + path);
  std::unordered_map<std::string, int> want;
  for (size_t i = 0; i < vocab_words.size(); ++i)
    want.emplace(vocab_words[i], static_cast<int>(i));

  EmbeddingStats stats;
  stats.vocab_size = static_cast<int>(vocab_words.size());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    double v;
    while (ss >> v) values.push_back(v);
    if (values.empty())
      throw Error("DimensionMismatch",
                  path + ":" + std::to_string(lineno) + ": no values");
    if (stats.dim == 0) stats.dim = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != stats.dim)
      throw Error("DimensionMismatch",
                  path + ":" + std::to_string(lineno) + ": row has " +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(stats.dim));
    auto it = want.find(word);
    if (it == want.end()) continue;
    if (table.rows() != stats.dim)
      throw Error("DimensionMismatch",
                  "embedding table has " + std::to_string(table.rows()) +
                      " rows, file provides " + std::to_string(stats.dim));
    for (int r = 0; r < stats.dim; ++r) table.value(r, it->second) = values[r];
    ++stats.matched;
  }
  return stats;
}

int peek_embedding_dim(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("IoError", "cannot open embeddings file " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    int dim = 0;
    double v;
    while (ss >> v) ++dim;
    if (dim == 0) throw Error("DimensionMismatch", path + ": first row has no values");
    return dim;
  }
  throw Error("DimensionMismatch", path + ": empty embeddings file");
}

std::vector<Fold> split_folds(const Corpus& c, int k, uint64_t seed) {
  if (k < 2) throw Error("TooFewDocuments", "fold count must be at least 2");
  std::vector<std::string> docs;
  std::set<std::string> seen;
  for (const auto& s : c.sentences)
    if (seen.insert(s.doc).second) docs.push_back(s.doc);
  if (static_cast<int>(docs.size()) < k)
    throw Error("TooFewDocuments",
                std::to_string(docs.size()) + " documents cannot fill " +
                    std::to_string(k) + " folds");
  std::mt19937_64 rng(seed);
  std::shuffle(docs.begin(), docs.end(), rng);

  const int n = static_cast<int>(docs.size());
  std::unordered_map<std::string, int> fold_of;
  for (int i = 0; i < n; ++i)
    fold_of[docs[i]] = static_cast<int>((static_cast<long>(i) * k) / n);

  std::vector<Fold> folds(k);
  for (int si = 0; si < static_cast<int>(c.sentences.size()); ++si) {
    const int f = fold_of.at(c.sentences[si].doc);
    for (int g = 0; g < k; ++g)
      (g == f ? folds[g].test : folds[g].train).push_back(si);
  }
  return folds;
}

}  // namespace orl
