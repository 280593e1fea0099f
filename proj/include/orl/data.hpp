#pragma once

// Corpus ingestion and serialization. The corpus is newline-delimited JSON:
// a header line declaring the POS tagset and dependency label set, then one
// sentence record per line. All indices on disk are 1-based; heads use 0
// for the dependency ROOT. Span ends are inclusive.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "orl/core.hpp"
#include "orl/params.hpp"
#include "orl/transition.hpp"

namespace orl {

struct CorpusHeader {
  int version = 1;
  std::vector<std::string> pos_tags;
  std::vector<std::string> dep_labels;
};

struct Corpus {
  CorpusHeader header;
  std::vector<Sentence> sentences;
};

inline constexpr const char* kCorpusFormat = "orl-corpus";

Corpus load_corpus(const std::string& path);
Corpus corpus_from_stream(std::istream& in, const std::string& origin);
void save_corpus(const Corpus& c, const std::string& path);

nlohmann::ordered_json sentence_to_json(const Sentence& s);
Sentence sentence_from_json(const nlohmann::json& j, const CorpusHeader& header);

// Prediction records mirror the corpus schema plus "pred_pairs" and an
// optional replayable "trace".
struct Prediction {
  std::vector<OpinionRolePair> pairs;
  std::vector<Action> trace;
};

void save_predictions(const Corpus& c, const std::vector<Prediction>& preds,
                      const std::string& path, bool with_trace);
std::vector<std::vector<OpinionRolePair>> load_predictions(const std::string& path);

// Whitespace-delimited text embeddings: word then floats, dimension fixed
// by the first row. Matched vocabulary rows overwrite `table` columns.
struct EmbeddingStats {
  int dim = 0;
  int matched = 0;
  int vocab_size = 0;
  double coverage() const {
    return vocab_size == 0 ? 0.0 : static_cast<double>(matched) / vocab_size;
  }
};
EmbeddingStats load_embeddings(const std::string& path,
                               const std::vector<std::string>& vocab_words,
                               nn::Param& table);
int peek_embedding_dim(const std::string& path);

// Deterministic, disjoint, exhaustive k-fold split at document granularity.
struct Fold {
  std::vector<int> train;  // sentence indices
  std::vector<int> test;
};
std::vector<Fold> split_folds(const Corpus& c, int k, uint64_t seed);

}  // namespace orl
