#include "orl/params.hpp"

#include <cmath>
#include <random>

namespace orl::nn {

namespace {

void init_values(Param& p, Init init, uint64_t seed) {
  if (init == Init::zeros) {
    p.value.setZero();
    return;
  }
  std::seed_seq seq{seed, static_cast<uint64_t>(std::hash<std::string>{}(p.name))};
  std::mt19937_64 rng(seq);
  double range = 0.1;  // embeddings
  if (init == Init::glorot)
    range = std::sqrt(6.0 / static_cast<double>(p.rows() + p.cols()));
  std::uniform_real_distribution<double> dist(-range, range);
  for (int c = 0; c < p.cols(); ++c)
    for (int r = 0; r < p.rows(); ++r) p.value(r, c) = dist(rng);
}

}  // namespace

Param& ParamStore::ensure(const std::string& name, int rows, int cols, Init init) {
  auto it = params_.find(name);
  if (it != params_.end()) {
    Param& p = *it->second;
    if (p.rows() != rows || p.cols() != cols)
      throw Error("CheckpointMismatch",
                  "parameter " + name + " has shape " + std::to_string(p.rows()) +
                      "x" + std::to_string(p.cols()) + ", expected " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    return p;
  }
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value.resize(rows, cols);
  p->grad = Mat::Zero(rows, cols);
  init_values(*p, init, seed_);
  Param& ref = *p;
  params_.emplace(name, std::move(p));
  return ref;
}

Param& ParamStore::require(const std::string& name, int rows, int cols) {
  if (!params_.contains(name))
    throw Error("CheckpointMismatch", "checkpoint is missing parameter " + name);
  return ensure(name, rows, cols, Init::zeros);
}

Param& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("Internal", "unknown parameter " + name);
  return *it->second;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  for (auto& [_, p] : params_) out.push_back(p.get());
  return out;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : params_) out.push_back(n);
  return out;
}

void ParamStore::zero_grads() {
  for (auto& [_, p] : params_) p->grad.setZero();
}

nlohmann::ordered_json ParamStore::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed_;
  nlohmann::ordered_json ps;
  for (const auto& [name, p] : params_) {
    nlohmann::ordered_json pj;
    pj["shape"] = {p->rows(), p->cols()};
    std::vector<double> data(p->value.data(), p->value.data() + p->value.size());
    pj["data"] = data;  // column-major
    ps[name] = std::move(pj);
  }
  j["params"] = std::move(ps);
  return j;
}

ParamStore ParamStore::from_json(const nlohmann::json& j) {
  ParamStore store(j.value("seed", 0ull));
  for (const auto& [name, pj] : j.at("params").items()) {
    const int rows = pj.at("shape").at(0).get<int>();
    const int cols = pj.at("shape").at(1).get<int>();
    const auto data = pj.at("data").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != rows * cols)
      throw Error("CheckpointMismatch", "parameter " + name + " data size mismatch");
    Param& p = store.ensure(name, rows, cols, Init::zeros);
    p.value = Eigen::Map<const Mat>(data.data(), rows, cols);
  }
  return store;
}

void AdamTrainer::step(ParamStore& store) {
  auto params = store.all();
  double norm_sq = 0;
  for (Param* p : params) norm_sq += p->grad.squaredNorm();
  const double norm = std::sqrt(norm_sq);
  const double rescale = (clip > 0 && norm > clip) ? clip / norm : 1.0;

  ++steps;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
  for (Param* p : params) {
    if (p->adam_m.size() == 0) {
      p->adam_m = Mat::Zero(p->rows(), p->cols());
      p->adam_v = Mat::Zero(p->rows(), p->cols());
    }
    Mat g = rescale * p->grad;
    p->adam_m = beta1 * p->adam_m + (1.0 - beta1) * g;
    p->adam_v = beta2 * p->adam_v + (1.0 - beta2) * g.cwiseProduct(g);
    Mat mhat = p->adam_m / bc1;
    Mat vhat = p->adam_v / bc2;
    p->value -= learning_rate *
                mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
    p->grad.setZero();
  }
}

}  // namespace orl::nn
