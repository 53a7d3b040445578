#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bpv/corpus.hpp"
#include "bpv/rng.hpp"
#include "bpv/vocab.hpp"

namespace bpv {

// Walker alias table: constant-time sampling from a fixed discrete
// distribution given as unnormalized non-negative weights.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);

  std::size_t size() const { return accept_.size(); }

  std::size_t sample(Rng& rng) const;

  // The normalized target distribution.
  const std::vector<double>& probabilities() const { return prob_; }

  // Distribution the table actually encodes, reconstructed slot by slot.
  // Matches probabilities() up to arithmetic tolerance; used by tests.
  std::vector<double> implied_probabilities() const;

 private:
  std::vector<double> accept_;     // acceptance threshold per slot
  std::vector<std::size_t> alias_;
  std::vector<double> prob_;
};

// Noise distribution over word pairs, P(i,j) proportional to f(i) * f(j)^(3/4)
// with i and j drawn independently.
class NoiseSampler {
 public:
  explicit NoiseSampler(const Vocabulary& vocab);

  std::size_t vocab_size() const { return i_table_.size(); }

  IdPair sample(Rng& rng) const {
    return {static_cast<std::uint32_t>(i_table_.sample(rng)),
            static_cast<std::uint32_t>(j_table_.sample(rng))};
  }

  double pair_probability(std::uint32_t i, std::uint32_t j) const {
    return i_table_.probabilities()[i] * j_table_.probabilities()[j];
  }

  const AliasTable& i_table() const { return i_table_; }
  const AliasTable& j_table() const { return j_table_; }

 private:
  AliasTable i_table_;
  AliasTable j_table_;
};

NoiseSampler build_noise_sampler(const Vocabulary& vocab);

// Exactly k i.i.d. pairs from the noise distribution.
std::vector<IdPair> sample_negatives(const NoiseSampler& sampler, std::size_t k,
                                     Rng& rng);

}  // namespace bpv
