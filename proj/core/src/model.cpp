#include "bpv/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bpv/errors.hpp"

namespace bpv {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // (1/2) log(2 pi)

}  // namespace

void Hyperparams::validate() const {
  if (embedding_dim < 1) throw InputError("embedding_dim must be >= 1");
  if (!(prior_std_global > 0.0)) throw InputError("lambda must be > 0");
  if (!(prior_std_doc > 0.0)) throw InputError("phi must be > 0");
  if (window < 1) throw InputError("window must be >= 1");
}

double log_likelihood_doc(const PairData& pairs, const Matrix& u,
                          const Matrix& v, std::span<const double> d) {
  double total = 0.0;
  for (const auto& [i, j] : pairs.positives) {
    total += log_sigmoid(pair_logit(u.row(i), v.row(j), d));
  }
  for (const auto& [i, j] : pairs.negatives) {
    total += log_sigmoid(-pair_logit(u.row(i), v.row(j), d));
  }
  return total;
}

double log_likelihood_data(std::span<const PairData> pairs, const Matrix& u,
                           const Matrix& v, const std::vector<Vec>& d_by_doc) {
  double total = 0.0;
  for (const auto& doc_pairs : pairs) {
    const auto n = static_cast<std::size_t>(doc_pairs.doc_id);
    if (doc_pairs.doc_id < 0 || n >= d_by_doc.size()) {
      throw InputError("no paragraph vector for doc_id " +
                       std::to_string(doc_pairs.doc_id));
    }
    total += log_likelihood_doc(doc_pairs, u, v, d_by_doc[n]);
  }
  return total;
}

double log_prior_doc(std::span<const double> d, double phi) {
  const auto dim = static_cast<double>(d.size());
  return -squared_norm(d) / (2.0 * phi * phi) -
         dim * (std::log(phi) + kHalfLog2Pi);
}

double log_prior(const Matrix& u, const Matrix& v,
                 const std::vector<Vec>& d_all, double lambda, double phi) {
  const double lambda_sq = lambda * lambda;
  double total = -(u.frobenius_squared() + v.frobenius_squared()) /
                 (2.0 * lambda_sq);
  total -= static_cast<double>(u.size() + v.size()) *
           (std::log(lambda) + kHalfLog2Pi);
  for (const auto& d : d_all) total += log_prior_doc(d, phi);
  return total;
}

double doc_log_joint(const PairData& pairs, const Matrix& u, const Matrix& v,
                     std::span<const double> d, double phi) {
  return log_likelihood_doc(pairs, u, v, d) + log_prior_doc(d, phi);
}

Vec grad_d(const PairData& pairs, const Matrix& u, const Matrix& v,
           std::span<const double> d, double phi) {
  Vec grad(d.size(), 0.0);
  for (const auto& [i, j] : pairs.positives) {
    const double x = pair_logit(u.row(i), v.row(j), d);
    axpy(sigmoid(-x), u.row(i), grad);
  }
  for (const auto& [i, j] : pairs.negatives) {
    const double x = pair_logit(u.row(i), v.row(j), d);
    axpy(-sigmoid(x), u.row(i), grad);
  }
  axpy(-1.0 / (phi * phi), d, grad);
  return grad;
}

std::span<double> RowGradients::row(std::uint32_t id) {
  auto [it, inserted] = index_.emplace(id, ids_.size());
  if (inserted) {
    ids_.push_back(id);
    values_.resize(values_.size() + dim_, 0.0);
  }
  return {values_.data() + it->second * dim_, dim_};
}

UvGradients grad_uv(const PairData& pairs, const Matrix& u, const Matrix& v,
                    std::span<const double> d, double lambda,
                    double prior_scale) {
  const std::size_t dim = u.cols();
  UvGradients g{RowGradients(dim), RowGradients(dim)};

  for (const auto& [i, j] : pairs.positives) {
    const double x = pair_logit(u.row(i), v.row(j), d);
    const double w = sigmoid(-x);
    auto du_i = g.du.row(i);
    for (std::size_t k = 0; k < dim; ++k) du_i[k] += w * (v.row(j)[k] + d[k]);
    axpy(w, u.row(i), g.dv.row(j));
  }
  for (const auto& [i, j] : pairs.negatives) {
    const double x = pair_logit(u.row(i), v.row(j), d);
    const double w = sigmoid(x);
    auto du_i = g.du.row(i);
    for (std::size_t k = 0; k < dim; ++k) du_i[k] -= w * (v.row(j)[k] + d[k]);
    axpy(-w, u.row(i), g.dv.row(j));
  }

  // prior_scale of the Gaussian prior gradient, once per touched row
  const double shrink = prior_scale / (lambda * lambda);
  for (std::size_t k = 0; k < g.du.size(); ++k) {
    axpy(-shrink, u.row(g.du.ids()[k]), g.du.row(g.du.ids()[k]));
  }
  for (std::size_t k = 0; k < g.dv.size(); ++k) {
    axpy(-shrink, v.row(g.dv.ids()[k]), g.dv.row(g.dv.ids()[k]));
  }
  return g;
}

void save_embedding_matrix(const Matrix& m, const Vocabulary& vocab,
                           const std::string& path) {
  if (m.rows() != vocab.size()) {
    throw InputError("embedding row count " + std::to_string(m.rows()) +
                     " does not match vocabulary size " +
                     std::to_string(vocab.size()));
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write embedding file: " + path);
  out << m.rows() << " " << m.cols() << "\n";
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << vocab.token(i);
    for (double x : m.row(i)) {
      std::snprintf(buf, sizeof(buf), " %.9g", x);
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw InputError("failed writing embedding file: " + path);
}

Matrix load_embedding_matrix(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embedding file: " + path);

  std::size_t rows = 0, cols = 0;
  {
    std::string header;
    if (!std::getline(in, header)) {
      throw InputError(path + ":1: expected 'W E' header");
    }
    std::istringstream hs(header);
    if (!(hs >> rows >> cols)) {
      throw InputError(path + ":1: malformed 'W E' header: " + header);
    }
  }
  if (rows != vocab.size()) {
    throw InputError(path + ": embedding rows (" + std::to_string(rows) +
                     ") do not match vocabulary size (" +
                     std::to_string(vocab.size()) + ")");
  }

  Matrix m(rows, cols);
  std::string line;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw InputError(path + ": truncated embedding file at row " +
                       std::to_string(i));
    }
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    if (token != vocab.token(i)) {
      throw InputError(path + ":" + std::to_string(i + 2) + ": token '" +
                       token + "' does not match vocabulary entry '" +
                       vocab.token(i) + "'");
    }
    auto row = m.row(i);
    for (std::size_t k = 0; k < cols; ++k) {
      if (!(ls >> row[k])) {
        throw InputError(path + ":" + std::to_string(i + 2) +
                         ": expected " + std::to_string(cols) + " values");
      }
    }
  }
  return m;
}

}  // namespace bpv
