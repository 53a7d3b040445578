#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bpv/corpus.hpp"
#include "bpv/matrix.hpp"
#include "bpv/numeric.hpp"
#include "bpv/vocab.hpp"

namespace bpv {

// Word embeddings U and context embeddings V, both W x E.
struct GlobalEmbeddings {
  Matrix u;
  Matrix v;
};

struct Hyperparams {
  std::uint32_t embedding_dim = 100;  // E
  double prior_std_global = 1.0;      // lambda
  double prior_std_doc = 1.0;         // phi
  std::uint32_t window = 4;           // c
  std::int64_t negatives_per_doc = -1;  // k; -1 = average positive-pair count
  std::uint64_t seed = 42;

  void validate() const;  // throws InputError on violated invariants
};

// Pre-sigmoid score of pair (i,j): u_i . (v_j + d). With d = 0 this is the
// plain word2vec logit.
inline double pair_logit(std::span<const double> u_i,
                         std::span<const double> v_j,
                         std::span<const double> d) {
  double s = 0.0;
  for (std::size_t k = 0; k < u_i.size(); ++k) s += u_i[k] * (v_j[k] + d[k]);
  return s;
}

inline double pair_logit(std::span<const double> u_i,
                         std::span<const double> v_j) {
  return dot(u_i, v_j);
}

// log p(z | logit): z log sigma(x) + (1-z) log sigma(-x). Always <= 0.
inline double log_likelihood_pair(double logit, int z) {
  return z ? log_sigmoid(logit) : log_sigmoid(-logit);
}

// Log-likelihood of one document's positive and negative pairs at paragraph
// vector d.
double log_likelihood_doc(const PairData& pairs, const Matrix& u,
                          const Matrix& v, std::span<const double> d);

// Sum of log_likelihood_doc over documents; d_by_doc is indexed by doc_id.
// Throws InputError naming the doc_id when its vector is missing.
double log_likelihood_data(std::span<const PairData> pairs, const Matrix& u,
                           const Matrix& v, const std::vector<Vec>& d_by_doc);

// Full Gaussian log-density of (U, V, d_1..d_N) under the priors
// N(0, lambda^2 I) and N(0, phi^2 I), normalization constants included.
double log_prior(const Matrix& u, const Matrix& v,
                 const std::vector<Vec>& d_all, double lambda, double phi);

// log N(d; 0, phi^2 I), the per-document prior term.
double log_prior_doc(std::span<const double> d, double phi);

// Per-document joint log p(X+, X-, d | U, V) up to the U,V prior.
double doc_log_joint(const PairData& pairs, const Matrix& u, const Matrix& v,
                     std::span<const double> d, double phi);

// Gradient of doc_log_joint w.r.t. d:
//   sum_{X+} sigma(-x) u_i - sum_{X-} sigma(x) u_i - d / phi^2.
Vec grad_d(const PairData& pairs, const Matrix& u, const Matrix& v,
           std::span<const double> d, double phi);

// Sparse per-row gradient accumulator. Rows keep first-touch order so that
// accumulation is deterministic.
class RowGradients {
 public:
  explicit RowGradients(std::size_t dim) : dim_(dim) {}

  std::span<double> row(std::uint32_t id);

  std::size_t size() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<std::uint32_t>& ids() const { return ids_; }
  std::span<const double> value(std::size_t k) const {
    return {values_.data() + k * dim_, dim_};
  }

 private:
  std::size_t dim_;
  std::vector<std::uint32_t> ids_;
  std::vector<double> values_;
  std::unordered_map<std::uint32_t, std::size_t> index_;
};

struct UvGradients {
  RowGradients du;
  RowGradients dv;
};

// Minibatch gradient for one document's pairs w.r.t. the touched rows of U
// and V, plus prior_scale of the Gaussian prior gradient on each touched row.
UvGradients grad_uv(const PairData& pairs, const Matrix& u, const Matrix& v,
                    std::span<const double> d, double lambda,
                    double prior_scale);

// Text format: header "W E", then W lines "token v_1 ... v_E" with 9
// significant digits.
void save_embedding_matrix(const Matrix& m, const Vocabulary& vocab,
                           const std::string& path);

// Checks the header and every token against vocab; throws InputError on
// mismatch.
Matrix load_embedding_matrix(const std::string& path, const Vocabulary& vocab);

}  // namespace bpv
