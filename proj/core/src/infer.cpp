#include "bpv/infer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bpv/errors.hpp"
#include "bpv/parallel.hpp"
#include "bpv/stats.hpp"

namespace bpv {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;

// d log-likelihood / dd, without the prior term of grad_d.
Vec likelihood_grad_d(const PairData& pairs, const Matrix& u, const Matrix& v,
                      std::span<const double> d) {
  Vec grad(d.size(), 0.0);
  for (const auto& [i, j] : pairs.positives) {
    axpy(sigmoid(-pair_logit(u.row(i), v.row(j), d)), u.row(i), grad);
  }
  for (const auto& [i, j] : pairs.negatives) {
    axpy(-sigmoid(pair_logit(u.row(i), v.row(j), d)), u.row(i), grad);
  }
  return grad;
}

}  // namespace

Vec GaussianPosterior::sigma() const {
  Vec s(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) s[k] = softplus(rho[k]);
  return s;
}

GaussianPosterior GaussianPosterior::prior(std::int32_t doc_id,
                                           std::size_t dim, double phi) {
  GaussianPosterior q;
  q.doc_id = doc_id;
  q.mu.assign(dim, 0.0);
  q.rho.assign(dim, softplus_inverse(phi));
  return q;
}

void ViConfig::validate() const {
  if (steps < 1) throw InputError("vi steps must be >= 1");
  if (mc_samples < 1) throw InputError("mc_samples must be >= 1");
  if (!(lr0 > 0.0)) throw InputError("vi lr0 must be > 0");
}

double kl_gaussian(std::span<const double> mu, std::span<const double> sigma,
                   double phi) {
  const double phi_sq = phi * phi;
  double kl = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    kl += std::log(phi / sigma[k]) +
          (sigma[k] * sigma[k] + mu[k] * mu[k]) / (2.0 * phi_sq) - 0.5;
  }
  return kl;
}

double posterior_entropy(std::span<const double> sigma) {
  double h = 0.0;
  for (double s : sigma) h += std::log(s);
  return h + static_cast<double>(sigma.size()) * (0.5 + kHalfLog2Pi);
}

double elbo_estimate(const PairData& pairs, const Matrix& u, const Matrix& v,
                     const GaussianPosterior& q, double phi, Rng& rng,
                     std::uint32_t samples) {
  const std::size_t dim = q.mu.size();
  const Vec sigma = q.sigma();
  std::normal_distribution<double> normal(0.0, 1.0);

  double lik = 0.0;
  Vec d(dim);
  for (std::uint32_t s = 0; s < samples; ++s) {
    for (std::size_t k = 0; k < dim; ++k) {
      d[k] = q.mu[k] + sigma[k] * normal(rng);
    }
    lik += log_likelihood_doc(pairs, u, v, d);
  }
  return lik / static_cast<double>(samples) - kl_gaussian(q.mu, sigma, phi);
}

ElboValueGrad elbo_value_and_grad(const PairData& pairs, const Matrix& u,
                                  const Matrix& v, std::span<const double> mu,
                                  std::span<const double> rho, double phi,
                                  std::span<const double> eps,
                                  std::uint32_t samples) {
  const std::size_t dim = mu.size();
  const double phi_sq = phi * phi;
  const double inv_s = 1.0 / static_cast<double>(samples);

  Vec sigma(dim);
  for (std::size_t k = 0; k < dim; ++k) sigma[k] = softplus(rho[k]);

  ElboValueGrad out;
  out.d_mu.assign(dim, 0.0);
  out.d_rho.assign(dim, 0.0);  // accumulates d/d sigma until the chain rule
  double lik = 0.0;

  Vec d(dim);
  for (std::uint32_t s = 0; s < samples; ++s) {
    const std::span<const double> eps_s = eps.subspan(s * dim, dim);
    for (std::size_t k = 0; k < dim; ++k) d[k] = mu[k] + sigma[k] * eps_s[k];
    lik += log_likelihood_doc(pairs, u, v, d);
    const Vec g = likelihood_grad_d(pairs, u, v, d);
    for (std::size_t k = 0; k < dim; ++k) {
      out.d_mu[k] += inv_s * g[k];
      out.d_rho[k] += inv_s * g[k] * eps_s[k];
    }
  }

  out.elbo = lik * inv_s - kl_gaussian(mu, sigma, phi);
  for (std::size_t k = 0; k < dim; ++k) {
    out.d_mu[k] -= mu[k] / phi_sq;
    const double d_sigma = out.d_rho[k] + 1.0 / sigma[k] - sigma[k] / phi_sq;
    out.d_rho[k] = d_sigma * softplus_grad(rho[k]);
  }
  return out;
}

namespace {

PairData step_pairs(const DocEvidence& evidence, Rng& rng) {
  PairData pairs;
  pairs.doc_id = evidence.doc_id;
  pairs.positives = evidence.positives;
  if (evidence.negatives_per_step > 0) {
    if (evidence.sampler == nullptr) {
      throw InputError("negative sampling requested without a noise sampler");
    }
    pairs.negatives = sample_negatives(
        *evidence.sampler,
        static_cast<std::size_t>(evidence.negatives_per_step), rng);
  }
  return pairs;
}

double step_lr(double lr0, std::uint32_t t) {
  return lr0 / (1.0 + static_cast<double>(t) / 100.0);
}

}  // namespace

ViResult fit_vi_paragraph(const DocEvidence& evidence, const Matrix& u,
                          const Matrix& v, double phi, const ViConfig& cfg,
                          Rng& rng) {
  cfg.validate();
  const std::size_t dim = u.cols();

  ViResult result;
  result.q = GaussianPosterior::prior(evidence.doc_id, dim, phi);
  result.elbo_trace.reserve(cfg.steps);

  PairData pairs;
  pairs.doc_id = evidence.doc_id;
  pairs.positives = evidence.positives;

  std::normal_distribution<double> normal(0.0, 1.0);
  Vec eps(static_cast<std::size_t>(cfg.mc_samples) * dim);

  for (std::uint32_t t = 0; t < cfg.steps; ++t) {
    // Fresh negatives every update step.
    if (evidence.negatives_per_step > 0) {
      if (evidence.sampler == nullptr) {
        throw InputError("negative sampling requested without a noise sampler");
      }
      pairs.negatives = sample_negatives(
          *evidence.sampler,
          static_cast<std::size_t>(evidence.negatives_per_step), rng);
    }
    for (double& e : eps) e = normal(rng);

    const ElboValueGrad vg = elbo_value_and_grad(
        pairs, u, v, result.q.mu, result.q.rho, phi, eps, cfg.mc_samples);
    const double lr = step_lr(cfg.lr0, t);
    axpy(lr, vg.d_mu, result.q.mu);
    axpy(lr, vg.d_rho, result.q.rho);
    if (!all_finite(result.q.mu) || !all_finite(result.q.rho)) {
      throw NumericError("VI divergence at step " + std::to_string(t) +
                         " for doc " + std::to_string(evidence.doc_id));
    }
    result.elbo_trace.push_back(vg.elbo);
  }
  return result;
}

Vec fit_map_paragraph(const DocEvidence& evidence, const Matrix& u,
                      const Matrix& v, double phi, const ViConfig& cfg,
                      Rng& rng) {
  cfg.validate();
  Vec d(u.cols(), 0.0);
  for (std::uint32_t t = 0; t < cfg.steps; ++t) {
    const PairData pairs = step_pairs(evidence, rng);
    const Vec grad = grad_d(pairs, u, v, d, phi);
    axpy(step_lr(cfg.lr0, t), grad, d);
    if (!all_finite(d)) {
      throw NumericError("MAP divergence at step " + std::to_string(t) +
                         " for doc " + std::to_string(evidence.doc_id));
    }
  }
  return d;
}

std::vector<GaussianPosterior> infer_vi_corpus(std::span<const Document> docs,
                                               const Matrix& u, const Matrix& v,
                                               const NoiseSampler* sampler,
                                               std::int64_t k,
                                               const Hyperparams& hyper,
                                               const ViConfig& cfg,
                                               std::uint32_t threads) {
  std::vector<GaussianPosterior> posteriors(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t n) {
    DocEvidence evidence;
    evidence.doc_id = docs[n].doc_id;
    evidence.positives = extract_positive_pairs(docs[n], hyper.window);
    evidence.sampler = sampler;
    evidence.negatives_per_step = k;
    Rng rng = make_rng(hyper.seed, SeedTag::kVi,
                       static_cast<std::uint64_t>(docs[n].doc_id));
    posteriors[n] = fit_vi_paragraph(evidence, u, v, hyper.prior_std_doc, cfg,
                                     rng).q;
  });
  return posteriors;
}

std::vector<Vec> infer_map_corpus(std::span<const Document> docs,
                                  const Matrix& u, const Matrix& v,
                                  const NoiseSampler* sampler, std::int64_t k,
                                  const Hyperparams& hyper, const ViConfig& cfg,
                                  std::uint32_t threads) {
  std::vector<Vec> vectors(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t n) {
    DocEvidence evidence;
    evidence.doc_id = docs[n].doc_id;
    evidence.positives = extract_positive_pairs(docs[n], hyper.window);
    evidence.sampler = sampler;
    evidence.negatives_per_step = k;
    Rng rng = make_rng(hyper.seed, SeedTag::kMap,
                       static_cast<std::uint64_t>(docs[n].doc_id));
    vectors[n] = fit_map_paragraph(evidence, u, v, hyper.prior_std_doc, cfg,
                                   rng);
  });
  return vectors;
}

EntropyReport make_entropy_report(std::span<const GaussianPosterior> posteriors,
                                  std::span<const Document> docs) {
  std::unordered_map<std::int32_t, const GaussianPosterior*> by_id;
  for (const auto& q : posteriors) by_id.emplace(q.doc_id, &q);

  EntropyReport report;
  report.rows.reserve(docs.size());
  Vec lengths, entropies;
  for (const auto& doc : docs) {
    const auto it = by_id.find(doc.doc_id);
    if (it == by_id.end()) {
      throw InputError("no posterior for doc_id " + std::to_string(doc.doc_id));
    }
    EntropyRow row;
    row.doc_id = doc.doc_id;
    row.raw_length = doc.raw_length;
    row.in_vocab_length = static_cast<std::uint32_t>(doc.token_ids.size());
    row.entropy_nats = posterior_entropy(it->second->sigma());
    report.rows.push_back(row);
    lengths.push_back(static_cast<double>(row.in_vocab_length));
    entropies.push_back(row.entropy_nats);
  }
  report.spearman_rho = spearman_rank_correlation(lengths, entropies);
  return report;
}

void write_entropy_csv(const EntropyReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write entropy report: " + path);
  out << "doc_id,raw_length,in_vocab_length,entropy_nats\n";
  char buf[32];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%.9g", row.entropy_nats);
    out << row.doc_id << "," << row.raw_length << "," << row.in_vocab_length
        << "," << buf << "\n";
  }
  if (!out) throw InputError("failed writing entropy report: " + path);
}

namespace {

void write_vector_line(std::ofstream& out, const char* prefix,
                       std::span<const double> values) {
  char buf[32];
  bool first = true;
  if (prefix != nullptr && prefix[0] != '\0') {
    out << prefix;
    first = false;
  }
  for (double x : values) {
    std::snprintf(buf, sizeof(buf), first ? "%.9g" : " %.9g", x);
    first = false;
    out << buf;
  }
  out << "\n";
}

std::pair<std::size_t, std::size_t> read_count_dim_header(
    std::ifstream& in, const std::string& path) {
  std::string header;
  if (!std::getline(in, header)) {
    throw InputError(path + ":1: expected 'N_docs E' header");
  }
  std::istringstream hs(header);
  std::size_t n = 0, dim = 0;
  if (!(hs >> n >> dim)) {
    throw InputError(path + ":1: malformed 'N_docs E' header: " + header);
  }
  return {n, dim};
}

Vec parse_values(const std::string& line, const char* prefix, std::size_t dim,
                 const std::string& path, std::size_t line_no) {
  std::istringstream ls(line);
  if (prefix != nullptr) {
    std::string head;
    ls >> head;
    if (head != prefix) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected '" +
                       prefix + "' line, got: " + line);
    }
  }
  Vec values(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(ls >> values[k])) {
      throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values");
    }
  }
  return values;
}

}  // namespace

void save_posteriors(std::span<const GaussianPosterior> posteriors,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write posterior file: " + path);
  const std::size_t dim = posteriors.empty() ? 0 : posteriors.front().mu.size();
  out << posteriors.size() << " " << dim << "\n";
  for (const auto& q : posteriors) {
    write_vector_line(out, "mu:", q.mu);
    write_vector_line(out, "sigma:", q.sigma());
  }
  if (!out) throw InputError("failed writing posterior file: " + path);
}

std::vector<GaussianPosterior> load_posteriors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open posterior file: " + path);
  const auto [n, dim] = read_count_dim_header(in, path);

  std::vector<GaussianPosterior> posteriors;
  posteriors.reserve(n);
  std::string line;
  for (std::size_t doc = 0; doc < n; ++doc) {
    GaussianPosterior q;
    q.doc_id = static_cast<std::int32_t>(doc);
    if (!std::getline(in, line)) {
      throw InputError(path + ": truncated posterior file at doc " +
                       std::to_string(doc));
    }
    q.mu = parse_values(line, "mu:", dim, path, 2 * doc + 2);
    if (!std::getline(in, line)) {
      throw InputError(path + ": truncated posterior file at doc " +
                       std::to_string(doc));
    }
    const Vec sigma = parse_values(line, "sigma:", dim, path, 2 * doc + 3);
    q.rho.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!(sigma[k] > 0.0)) {
        throw InputError(path + ": sigma must be > 0 for doc " +
                         std::to_string(doc));
      }
      q.rho[k] = softplus_inverse(sigma[k]);
    }
    posteriors.push_back(std::move(q));
  }
  return posteriors;
}

void save_map_vectors(const std::vector<Vec>& vectors,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write MAP vector file: " + path);
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
  out << vectors.size() << " " << dim << "\n";
  for (const auto& d : vectors) write_vector_line(out, "", d);
  if (!out) throw InputError("failed writing MAP vector file: " + path);
}

std::vector<Vec> load_map_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open MAP vector file: " + path);
  const auto [n, dim] = read_count_dim_header(in, path);

  std::vector<Vec> vectors;
  vectors.reserve(n);
  std::string line;
  for (std::size_t doc = 0; doc < n; ++doc) {
    if (!std::getline(in, line)) {
      throw InputError(path + ": truncated MAP vector file at doc " +
                       std::to_string(doc));
    }
    vectors.push_back(parse_values(line, nullptr, dim, path, doc + 2));
  }
  return vectors;
}

}  // namespace bpv
