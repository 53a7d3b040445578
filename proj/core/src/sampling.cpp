#include "bpv/sampling.hpp"

#include <cmath>
#include <numeric>
#include <queue>

#include "bpv/errors.hpp"

namespace bpv {

AliasTable::AliasTable(std::span<const double> weights) {
  const std::size_t n = weights.size();
  if (n == 0) throw InputError("alias table requires at least one weight");

  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InputError("alias table weights must be >= 0");
    total += w;
  }
  if (total <= 0.0) throw InputError("alias table weights sum to zero");

  prob_.resize(n);
  for (std::size_t i = 0; i < n; ++i) prob_[i] = weights[i] / total;

  accept_.assign(n, 0.0);
  alias_.assign(n, 0);

  // Walker's method: split mass into n equal slots, pairing one light and one
  // heavy outcome per slot.
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = prob_[i] * static_cast<double>(n);

  std::queue<std::size_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    if (scaled[i] < 1.0) {
      small.push(i);
    } else {
      large.push(i);
    }
  }

  while (!small.empty() && !large.empty()) {
    const std::size_t s = small.front();
    const std::size_t l = large.front();
    small.pop();
    large.pop();
    accept_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    if (scaled[l] < 1.0) {
      small.push(l);
    } else {
      large.push(l);
    }
  }
  while (!large.empty()) {
    accept_[large.front()] = 1.0;
    alias_[large.front()] = large.front();
    large.pop();
  }
  while (!small.empty()) {
    accept_[small.front()] = 1.0;  // numerical leftovers
    alias_[small.front()] = small.front();
    small.pop();
  }
}

std::size_t AliasTable::sample(Rng& rng) const {
  std::uniform_int_distribution<std::size_t> slot_dist(0, accept_.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t slot = slot_dist(rng);
  return unit(rng) < accept_[slot] ? slot : alias_[slot];
}

std::vector<double> AliasTable::implied_probabilities() const {
  const std::size_t n = accept_.size();
  std::vector<double> p(n, 0.0);
  const double slot_mass = 1.0 / static_cast<double>(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    p[slot] += accept_[slot] * slot_mass;
    p[alias_[slot]] += (1.0 - accept_[slot]) * slot_mass;
  }
  return p;
}

namespace {

std::vector<double> tempered(const std::vector<double>& f, double power) {
  std::vector<double> w(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) w[i] = std::pow(f[i], power);
  return w;
}

const std::vector<double>& require_nonempty(const Vocabulary& vocab) {
  if (vocab.size() == 0) throw InputError("empty vocabulary");
  return vocab.frequencies();
}

}  // namespace

NoiseSampler::NoiseSampler(const Vocabulary& vocab)
    : i_table_(require_nonempty(vocab)),
      j_table_(tempered(vocab.frequencies(), 0.75)) {}

NoiseSampler build_noise_sampler(const Vocabulary& vocab) {
  return NoiseSampler(vocab);
}

std::vector<IdPair> sample_negatives(const NoiseSampler& sampler, std::size_t k,
                                     Rng& rng) {
  std::vector<IdPair> pairs;
  pairs.reserve(k);
  for (std::size_t n = 0; n < k; ++n) pairs.push_back(sampler.sample(rng));
  return pairs;
}

}  // namespace bpv
