// Command-line front end: train, parse, eval, oracle-check, gradcheck.
// Exit codes: 0 success, 1 check failure, 2 usage or I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "orl/data.hpp"
#include "orl/eval.hpp"
#include "orl/gradcheck.hpp"
#include "orl/model.hpp"
#include "orl/train.hpp"
#include "orl/transition.hpp"

namespace {

using namespace orl;

void add_model_flags(CLI::App* cmd, ModelConfig& cfg) {
  cmd->add_option("--word-dim", cfg.word_dim, "word embedding size");
  cmd->add_option("--char-dim", cfg.char_dim, "character embedding size");
  cmd->add_option("--enc-hidden", cfg.enc_hidden, "BiLSTM size per direction");
  cmd->add_option("--span-dim", cfg.span_dim, "term representation size");
  cmd->add_option("--stack-hidden", cfg.stack_hidden, "stack encoder size");
  cmd->add_option("--lambda-hidden", cfg.lambda_hidden, "lambda encoder size");
  cmd->add_option("--action-hidden", cfg.action_hidden, "action encoder size");
  cmd->add_option("--pointer-dim", cfg.pointer_dim, "pointer feature size");
  cmd->add_option("--mlp-hidden", cfg.mlp_hidden, "action classifier hidden size");
  cmd->add_option("--len-buckets", cfg.len_buckets, "span length buckets");
  cmd->add_flag("--rcga-per-shift", cfg.rcga_per_shift,
                "re-encode the graph once per SHIFT instead of per pair");
}

int cmd_train(const std::string& corpus_path, const std::string& dev_path,
              const std::string& embeddings_path, const std::string& out_path,
              const std::string& report_path, TrainConfig tcfg, ModelConfig mcfg,
              int folds, int fold, uint64_t fold_seed) {
  Corpus corpus = load_corpus(corpus_path);
  std::vector<Sentence> train_set = corpus.sentences;
  std::vector<Sentence> dev_set;
  if (!dev_path.empty()) dev_set = load_corpus(dev_path).sentences;
  if (folds > 0) {
    auto parts = split_folds(corpus, folds, fold_seed);
    if (fold < 0 || fold >= folds) throw Error("IoError", "fold index out of range");
    train_set.clear();
    for (int i : parts[fold].train) train_set.push_back(corpus.sentences[i]);
    if (dev_path.empty()) {
      dev_set.clear();
      for (int i : parts[fold].test) dev_set.push_back(corpus.sentences[i]);
    }
  }

  mcfg.syntax_enhanced = tcfg.syntax_enhanced;
  if (!embeddings_path.empty()) mcfg.word_dim = peek_embedding_dim(embeddings_path);
  Vocab vocab = Vocab::build(train_set, corpus.header);
  Model model(mcfg, vocab, tcfg.seed);
  if (!embeddings_path.empty()) {
    auto stats = load_embeddings(embeddings_path, vocab.words,
                                 model.params().get("emb.word"));
    std::fprintf(stderr, "embeddings: dim %d, coverage %d/%d (%.1f%%)\n",
                 stats.dim, stats.matched, stats.vocab_size,
                 100.0 * stats.coverage());
  }

  auto report = train(model, train_set, dev_set, tcfg, out_path,
                      [](const EpochStats& e) {
                        std::printf("epoch %d  loss %.4f (a %.4f, p %.4f, c %.4f, "
                                    "l2 %.6f)  dev exact O-R F1 %.4f\n",
                                    e.epoch, e.loss_total, e.loss_action,
                                    e.loss_pointer, e.loss_role, e.loss_l2,
                                    e.dev_exact_pair_f1);
                        std::fflush(stdout);
                      });
  std::printf("best epoch %d  dev exact O-R F1 %.4f\n", report.best_epoch,
              report.best_dev_f1);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw Error("IoError", "cannot write report " + report_path);
    out << report.to_json().dump(2) << "\n";
  }
  return 0;
}

int cmd_parse(const std::string& corpus_path, const std::string& model_path,
              const std::string& out_path, bool with_trace, int enhanced_flag) {
  Model model = Model::load(model_path);
  if (enhanced_flag >= 0 &&
      static_cast<bool>(enhanced_flag) != model.config().syntax_enhanced)
    throw Error("CheckpointMismatch",
                "checkpoint was trained with syntax_enhanced = " +
                    std::string(model.config().syntax_enhanced ? "true" : "false"));
  Corpus corpus = load_corpus(corpus_path);
  std::vector<Prediction> preds;
  preds.reserve(corpus.sentences.size());
  for (const auto& s : corpus.sentences) {
    auto out = model.parse(s);
    preds.push_back({std::move(out.pairs), std::move(out.actions)});
  }
  save_predictions(corpus, preds, out_path, with_trace);
  std::printf("parsed %zu sentences -> %s\n", corpus.sentences.size(),
              out_path.c_str());
  return 0;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path,
             const std::string& out_path, const std::string& aggregate) {
  auto pred = load_predictions(pred_path);
  Corpus gold = load_corpus(gold_path);
  std::vector<std::vector<OpinionRolePair>> gold_pairs;
  for (const auto& s : gold.sentences) gold_pairs.push_back(s.gold);
  EvalOptions opts;
  if (aggregate == "min")
    opts.aggregate = EvalOptions::PairAggregate::min;
  else if (aggregate != "mean")
    throw Error("IoError", "unknown aggregate '" + aggregate + "'");
  auto report = evaluate(pred, gold_pairs, opts);
  auto j = report.to_json();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw Error("IoError", "cannot write report " + out_path);
    out << j.dump(2) << "\n";
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_oracle_check(const std::string& corpus_path, const std::string& dump_path) {
  Corpus corpus = load_corpus(corpus_path);
  int failures = 0, shared_start = 0, skipped_pairs = 0;
  std::ofstream dump;
  if (!dump_path.empty()) {
    dump.open(dump_path);
    if (!dump) throw Error("IoError", "cannot write trace dump " + dump_path);
  }
  for (const auto& s : corpus.sentences) {
    OracleTrace trace = oracle(s);
    shared_start += trace.notes.skipped_terms;
    skipped_pairs += trace.notes.skipped_pairs;
    auto res = replay(s, trace.actions);
    std::set<OpinionRolePair> got(res.pairs.begin(), res.pairs.end());
    std::set<OpinionRolePair> want(s.gold.begin(), s.gold.end());
    if (trace.notes.skipped_pairs == 0 && got != want) {
      ++failures;
      std::fprintf(stderr, "round-trip failure on sentence %s\n", s.id.c_str());
    }
    if (dump.is_open()) {
      for (const auto& a : trace.actions) dump << action_to_json(a) << "\n";
      dump << "\n";
    }
  }
  std::printf("sentences %zu, round-trip failures %d, shared-start terms %d, "
              "skipped pairs %d\n",
              corpus.sentences.size(), failures, shared_start, skipped_pairs);
  return failures == 0 ? 0 : 1;
}

int cmd_gradcheck(uint64_t seed, double tolerance,
                  const std::vector<std::string>& only) {
  auto checks = orl::nn::gradcheck_heads(seed, {}, only);
  bool ok = true;
  for (const auto& c : checks) {
    const bool pass = c.max_rel_err < tolerance;
    ok = ok && pass;
    std::printf("%-24s max rel err %.3e  %s\n", c.name.c_str(), c.max_rel_err,
                pass ? "ok" : "FAIL");
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opinion role labeling with a pointer-augmented transition parser"};
  app.set_config("--config", "", "config file (TOML/INI); flags override it");
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string corpus_path, dev_path, embeddings_path, out_path = "model.json",
              report_path;
  TrainConfig tcfg;
  ModelConfig mcfg;
  int folds = 0, fold = 0;
  uint64_t fold_seed = 1;
  train_cmd->add_option("--corpus", corpus_path, "training corpus (JSONL)")
      ->required();
  train_cmd->add_option("--dev", dev_path, "development corpus (JSONL)");
  train_cmd->add_option("--embeddings", embeddings_path,
                        "pretrained word embeddings (text)");
  train_cmd->add_option("--out", out_path, "checkpoint output path");
  train_cmd->add_option("--report", report_path, "write the train report JSON");
  train_cmd->add_option("--epochs", tcfg.epochs, "training epochs");
  train_cmd->add_option("--lr", tcfg.learning_rate, "learning rate");
  train_cmd->add_option("--l2", tcfg.l2, "L2 regularizer coefficient");
  train_cmd->add_option("--seed", tcfg.seed, "random seed");
  train_cmd->add_option("--batch", tcfg.batch_size, "sentences per update");
  train_cmd->add_option("--clip", tcfg.grad_clip, "global gradient norm clip");
  train_cmd->add_option("--early-stop-f1", tcfg.early_stop_f1,
                        "stop once dev exact O-R F1 reaches this value");
  train_cmd->add_flag("--syntax-enhanced", tcfg.syntax_enhanced,
                      "enable POS pointer features and the opinion graph");
  train_cmd->add_option("--folds", folds, "number of cross-validation folds");
  train_cmd->add_option("--fold", fold, "fold index to train");
  train_cmd->add_option("--fold-seed", fold_seed, "fold shuffling seed");
  add_model_flags(train_cmd, mcfg);

  // parse
  auto* parse_cmd = app.add_subcommand("parse", "parse a corpus with a model");
  std::string parse_corpus, model_path, parse_out = "predictions.jsonl";
  bool with_trace = false;
  int parse_enhanced = -1;
  parse_cmd->add_option("--corpus", parse_corpus, "input corpus (JSONL)")
      ->required();
  parse_cmd->add_option("--model", model_path, "checkpoint path")->required();
  parse_cmd->add_option("--out", parse_out, "predictions output path");
  parse_cmd->add_flag("--trace", with_trace, "include replayable action traces");
  parse_cmd->add_flag("--syntax-enhanced{1},--no-syntax-enhanced{0}",
                      parse_enhanced,
                      "require the checkpoint to match this variant");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
  std::string pred_path, gold_path, eval_out, aggregate = "mean";
  eval_cmd->add_option("--pred", pred_path, "predictions file")->required();
  eval_cmd->add_option("--gold", gold_path, "gold corpus")->required();
  eval_cmd->add_option("--out", eval_out, "metric report JSON path");
  eval_cmd->add_option("--aggregate", aggregate,
                       "proportional credit across a pair's terms: mean|min");

  // oracle-check
  auto* oracle_cmd =
      app.add_subcommand("oracle-check", "verify oracle round-trips on a corpus");
  std::string oracle_corpus, dump_path;
  oracle_cmd->add_option("--corpus", oracle_corpus, "corpus (JSONL)")->required();
  oracle_cmd->add_option("--dump-traces", dump_path, "write traces as JSON lines");

  // gradcheck
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference check of every head");
  uint64_t grad_seed = 1;
  double tolerance = 1e-4;
  std::vector<std::string> grad_only;
  grad_cmd->add_option("--seed", grad_seed, "random seed");
  grad_cmd->add_option("--tolerance", tolerance, "max relative error allowed");
  grad_cmd->add_option("--heads", grad_only, "restrict to these named heads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*train_cmd)
      return cmd_train(corpus_path, dev_path, embeddings_path, out_path,
                       report_path, tcfg, mcfg, folds, fold, fold_seed);
    if (*parse_cmd)
      return cmd_parse(parse_corpus, model_path, parse_out, with_trace,
                       parse_enhanced);
    if (*eval_cmd) return cmd_eval(pred_path, gold_path, eval_out, aggregate);
    if (*oracle_cmd) return cmd_oracle_check(oracle_corpus, dump_path);
    if (*grad_cmd) return cmd_gradcheck(grad_seed, tolerance, grad_only);
  } catch (const orl::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
