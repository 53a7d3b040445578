#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bpv/corpus.hpp"
#include "bpv/model.hpp"
#include "bpv/sampling.hpp"

namespace bpv {

struct TrainConfig {
  // Inner loop: noise-free ascent on one document's paragraph vector.
  double inner_lr = 0.05;
  std::uint32_t inner_max_iters = 100;
  double inner_grad_tol = 1e-4;  // stop when ||grad||_inf drops below

  // Outer loop: one noisy global step per document visit,
  // lr_t = outer_lr0 / (1 + t / N_docs).
  double outer_lr0 = 0.025;
  std::uint32_t epochs = 5;

  void validate() const;
};

// k = round(mean positive-pair count over documents). Throws InputError on an
// empty document list.
std::int64_t compute_negatives_per_doc(std::span<const Document> docs,
                                       std::uint32_t window);

struct DocOptResult {
  Vec d;
  double objective = 0.0;  // doc_log_joint at the returned d
  std::uint32_t iterations = 0;
};

// Maximizes the per-document joint over d by constant-rate gradient ascent
// from d = 0, halving the step on any objective decrease (max 10 halvings per
// iteration). Negatives inside `pairs` stay fixed.
DocOptResult optimize_doc_vector(const PairData& pairs, const Matrix& u,
                                 const Matrix& v, double phi,
                                 const TrainConfig& cfg);

struct EpochStats {
  std::uint32_t epoch = 0;             // 1-based
  double mean_doc_objective = 0.0;     // mean inner objective over documents
  double lr_end = 0.0;                 // learning rate after the last visit
};

struct TrainResult {
  GlobalEmbeddings embeddings;
  std::vector<EpochStats> log;
};

using EpochCallback =
    std::function<void(const EpochStats&, const GlobalEmbeddings&)>;

// Stage-1 inference. Per epoch, documents are visited in shuffled order; each
// visit samples k fresh negatives, optimizes d_n to convergence, applies one
// global step with prior_scale = 1/N_docs, then discards d_n.
//
// When resume_epoch > 0, training continues from `init` (the checkpoint of
// that many completed epochs) and reproduces the uninterrupted run exactly.
TrainResult train_global_embeddings(std::span<const Document> docs,
                                    const Vocabulary& vocab,
                                    const Hyperparams& hyper,
                                    const TrainConfig& cfg,
                                    const EpochCallback& on_epoch = nullptr,
                                    const GlobalEmbeddings* init = nullptr,
                                    std::uint32_t resume_epoch = 0);

}  // namespace bpv
