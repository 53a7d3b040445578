#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bpv/corpus.hpp"
#include "bpv/model.hpp"
#include "bpv/sampling.hpp"

namespace bpv {

// Mean-field Gaussian posterior for one paragraph vector. sigma is kept
// positive through sigma = softplus(rho).
struct GaussianPosterior {
  std::int32_t doc_id = 0;
  Vec mu;
  Vec rho;

  Vec sigma() const;

  static GaussianPosterior prior(std::int32_t doc_id, std::size_t dim,
                                 double phi);
};

struct ViConfig {
  std::uint32_t steps = 500;    // per document
  double lr0 = 0.05;            // lr_t = lr0 / (1 + t/100)
  std::uint32_t mc_samples = 1;

  void validate() const;
};

// KL(q || p) between N(mu, diag(sigma^2)) and the prior N(0, phi^2 I):
//   sum_k [ log(phi/sigma_k) + (sigma_k^2 + mu_k^2) / (2 phi^2) - 1/2 ].
double kl_gaussian(std::span<const double> mu, std::span<const double> sigma,
                   double phi);

// Differential entropy in nats: sum_k log sigma_k + E/2 (1 + log 2 pi).
double posterior_entropy(std::span<const double> sigma);

// Monte Carlo ELBO with S reparameterized samples d = mu + sigma * eps.
double elbo_estimate(const PairData& pairs, const Matrix& u, const Matrix& v,
                     const GaussianPosterior& q, double phi, Rng& rng,
                     std::uint32_t samples);

struct ElboValueGrad {
  double elbo = 0.0;
  Vec d_mu;
  Vec d_rho;
};

// ELBO and its reparameterization gradient w.r.t. (mu, rho) for fixed pairs
// and fixed standard-normal draws eps (samples x E, row-major). The KL term
// is closed form; only the likelihood expectation is Monte Carlo.
ElboValueGrad elbo_value_and_grad(const PairData& pairs, const Matrix& u,
                                  const Matrix& v, std::span<const double> mu,
                                  std::span<const double> rho, double phi,
                                  std::span<const double> eps,
                                  std::uint32_t samples);

// Evidence for one document during stage-2 inference: fixed positive pairs
// plus k fresh noise negatives per update step. sampler may be null only when
// negatives_per_step == 0.
struct DocEvidence {
  std::int32_t doc_id = 0;
  std::vector<IdPair> positives;
  const NoiseSampler* sampler = nullptr;
  std::int64_t negatives_per_step = 0;
};

struct ViResult {
  GaussianPosterior q;
  std::vector<double> elbo_trace;  // one estimate per step
};

// Black-box VI with reparameterization gradients; starts from the prior
// (mu = 0, sigma = phi) and takes cfg.steps ascent steps with decreasing
// learning rate.
ViResult fit_vi_paragraph(const DocEvidence& evidence, const Matrix& u,
                          const Matrix& v, double phi, const ViConfig& cfg,
                          Rng& rng);

// MAP baseline: gradient ascent on the per-document log-joint from d = 0,
// fresh negatives per step, same learning-rate schedule as VI.
Vec fit_map_paragraph(const DocEvidence& evidence, const Matrix& u,
                      const Matrix& v, double phi, const ViConfig& cfg,
                      Rng& rng);

// Batch inference over a corpus with per-document derived seeds; results are
// identical for any thread count.
std::vector<GaussianPosterior> infer_vi_corpus(std::span<const Document> docs,
                                               const Matrix& u, const Matrix& v,
                                               const NoiseSampler* sampler,
                                               std::int64_t k,
                                               const Hyperparams& hyper,
                                               const ViConfig& cfg,
                                               std::uint32_t threads = 1);

std::vector<Vec> infer_map_corpus(std::span<const Document> docs,
                                  const Matrix& u, const Matrix& v,
                                  const NoiseSampler* sampler, std::int64_t k,
                                  const Hyperparams& hyper, const ViConfig& cfg,
                                  std::uint32_t threads = 1);

struct EntropyRow {
  std::int32_t doc_id = 0;
  std::uint32_t raw_length = 0;
  std::uint32_t in_vocab_length = 0;
  double entropy_nats = 0.0;
};

struct EntropyReport {
  std::vector<EntropyRow> rows;
  // Spearman rank correlation of in_vocab_length vs entropy; empty with
  // fewer than two documents.
  std::optional<double> spearman_rho;
};

// One row per document. Throws InputError naming the doc_id when a posterior
// is missing.
EntropyReport make_entropy_report(std::span<const GaussianPosterior> posteriors,
                                  std::span<const Document> docs);

// CSV "doc_id,raw_length,in_vocab_length,entropy_nats".
void write_entropy_csv(const EntropyReport& report, const std::string& path);

// Posterior file: header "N_docs E", then per document a "mu:" and a
// "sigma:" line.
void save_posteriors(std::span<const GaussianPosterior> posteriors,
                     const std::string& path);
std::vector<GaussianPosterior> load_posteriors(const std::string& path);

// MAP vector file: header "N_docs E", one line per document.
void save_map_vectors(const std::vector<Vec>& vectors, const std::string& path);
std::vector<Vec> load_map_vectors(const std::string& path);

}  // namespace bpv
