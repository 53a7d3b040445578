#include "bpv/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bpv/errors.hpp"

namespace bpv {

void TrainConfig::validate() const {
  if (!(inner_lr > 0.0)) throw InputError("inner_lr must be > 0");
  if (!(outer_lr0 > 0.0)) throw InputError("outer_lr0 must be > 0");
  if (!(inner_grad_tol > 0.0)) throw InputError("inner_grad_tol must be > 0");
  if (inner_max_iters < 1) throw InputError("inner_max_iters must be >= 1");
  if (epochs < 1) throw InputError("epochs must be >= 1");
}

std::int64_t compute_negatives_per_doc(std::span<const Document> docs,
                                       std::uint32_t window) {
  if (docs.empty()) {
    throw InputError("cannot compute negatives-per-doc on zero documents");
  }
  const auto c = static_cast<std::int64_t>(window);
  std::int64_t total_pairs = 0;
  for (const auto& doc : docs) {
    // |X+| for length L: every (t, delta) with t+delta in range.
    const auto len = static_cast<std::int64_t>(doc.token_ids.size());
    for (std::int64_t t = 0; t < len; ++t) {
      total_pairs += std::min(t, c) + std::min(len - 1 - t, c);
    }
  }
  const double mean =
      static_cast<double>(total_pairs) / static_cast<double>(docs.size());
  return std::llround(mean);
}

DocOptResult optimize_doc_vector(const PairData& pairs, const Matrix& u,
                                 const Matrix& v, double phi,
                                 const TrainConfig& cfg) {
  const std::size_t dim = u.cols();
  DocOptResult result;
  result.d.assign(dim, 0.0);
  result.objective = doc_log_joint(pairs, u, v, result.d, phi);

  Vec candidate(dim, 0.0);
  for (std::uint32_t iter = 0; iter < cfg.inner_max_iters; ++iter) {
    const Vec grad = grad_d(pairs, u, v, result.d, phi);
    result.iterations = iter + 1;
    if (inf_norm(grad) < cfg.inner_grad_tol) break;

    // Constant learning rate; the local optimization is noise free. Halve
    // the step when the objective drops, up to 10 times.
    double lr = cfg.inner_lr;
    bool accepted = false;
    for (int halving = 0; halving <= 10; ++halving) {
      candidate = result.d;
      axpy(lr, grad, candidate);
      const double objective = doc_log_joint(pairs, u, v, candidate, phi);
      if (!std::isfinite(objective)) {
        throw NumericError("divergence; reduce inner_lr");
      }
      if (objective >= result.objective) {
        result.d = candidate;
        result.objective = objective;
        accepted = true;
        break;
      }
      lr *= 0.5;
    }
    if (!accepted) break;  // no ascent direction left at this resolution
  }
  return result;
}

namespace {

GlobalEmbeddings initialize_embeddings(std::size_t vocab_size,
                                       const Hyperparams& hyper) {
  GlobalEmbeddings emb;
  emb.u = Matrix(vocab_size, hyper.embedding_dim);
  emb.v = Matrix(vocab_size, hyper.embedding_dim);
  Rng rng = make_rng(hyper.seed, SeedTag::kInit);
  std::normal_distribution<double> init_dist(0.0, 0.01);
  for (std::size_t i = 0; i < emb.u.size(); ++i) emb.u.data()[i] = init_dist(rng);
  // V starts at zero, the word2vec convention.
  return emb;
}

void apply_row_gradients(Matrix& m, const RowGradients& grads, double lr) {
  for (std::size_t k = 0; k < grads.size(); ++k) {
    axpy(lr, grads.value(k), m.row(grads.ids()[k]));
  }
}

void check_touched_rows(const Matrix& m, const RowGradients& grads,
                        std::uint32_t epoch, std::size_t doc_index) {
  for (std::uint32_t id : grads.ids()) {
    if (!all_finite(m.row(id))) {
      throw NumericError("non-finite embeddings after update at epoch " +
                         std::to_string(epoch) + ", doc " +
                         std::to_string(doc_index));
    }
  }
}

}  // namespace

TrainResult train_global_embeddings(std::span<const Document> docs,
                                    const Vocabulary& vocab,
                                    const Hyperparams& hyper,
                                    const TrainConfig& cfg,
                                    const EpochCallback& on_epoch,
                                    const GlobalEmbeddings* init,
                                    std::uint32_t resume_epoch) {
  hyper.validate();
  cfg.validate();
  if (vocab.size() == 0) throw InputError("cannot train on an empty vocabulary");

  TrainResult result;
  result.embeddings = init != nullptr
                          ? *init
                          : initialize_embeddings(vocab.size(), hyper);
  Matrix& u = result.embeddings.u;
  Matrix& v = result.embeddings.v;

  if (docs.empty()) return result;

  const NoiseSampler sampler(vocab);
  const std::int64_t k = hyper.negatives_per_doc >= 0
                             ? hyper.negatives_per_doc
                             : compute_negatives_per_doc(docs, hyper.window);

  const auto n_docs = static_cast<double>(docs.size());
  const double prior_scale = 1.0 / n_docs;

  std::vector<std::size_t> order(docs.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::uint32_t epoch = resume_epoch; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng = make_rng(hyper.seed, SeedTag::kShuffle, epoch);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double objective_sum = 0.0;
    double lr = cfg.outer_lr0;
    std::uint64_t t = static_cast<std::uint64_t>(epoch) * docs.size();

    for (std::size_t pos = 0; pos < docs.size(); ++pos, ++t) {
      const Document& doc = docs[order[pos]];
      Rng neg_rng = make_rng(hyper.seed, SeedTag::kNegatives, epoch,
                             static_cast<std::uint64_t>(doc.doc_id));
      const PairData pairs =
          make_pair_data(doc, hyper.window, &sampler,
                         static_cast<std::size_t>(k), neg_rng);

      // Nested noise-free optimization of this document's paragraph vector.
      const DocOptResult inner =
          optimize_doc_vector(pairs, u, v, hyper.prior_std_doc, cfg);
      objective_sum += inner.objective;

      // One noisy global step, then d_n is discarded.
      lr = cfg.outer_lr0 / (1.0 + static_cast<double>(t) / n_docs);
      const UvGradients grads =
          grad_uv(pairs, u, v, inner.d, hyper.prior_std_global, prior_scale);
      apply_row_gradients(u, grads.du, lr);
      apply_row_gradients(v, grads.dv, lr);
      check_touched_rows(u, grads.du, epoch + 1, order[pos]);
      check_touched_rows(v, grads.dv, epoch + 1, order[pos]);
    }

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.mean_doc_objective = objective_sum / n_docs;
    stats.lr_end = lr;
    result.log.push_back(stats);
    if (on_epoch) on_epoch(stats, result.embeddings);
  }
  return result;
}

}  // namespace bpv
