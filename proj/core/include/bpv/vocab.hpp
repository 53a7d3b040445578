#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace bpv {

// Truncation policy for vocabulary construction. When min_count > 0 every
// token occurring at least min_count times is kept; otherwise the most
// frequent max_vocab_size tokens are kept. Count ties break lexicographically.
struct VocabPolicy {
  std::size_t max_vocab_size = 10000;
  std::uint32_t min_count = 0;
};

// Token <-> dense id map with empirical unigram frequencies over the retained
// tokens. Immutable after construction.
class Vocabulary {
 public:
  Vocabulary() = default;

  std::size_t size() const { return tokens_.size(); }
  std::uint64_t total_tokens() const { return total_; }

  // -1 when the token is out of vocabulary.
  std::int64_t id_of(const std::string& token) const {
    auto it = id_.find(token);
    return it == id_.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

  const std::string& token(std::size_t id) const { return tokens_[id]; }
  std::uint64_t count(std::size_t id) const { return counts_[id]; }

  // Relative frequency f(i); sums to 1 over the vocabulary.
  double freq(std::size_t id) const { return freq_[id]; }
  const std::vector<double>& frequencies() const { return freq_; }

  // Text format: first line "W", then W lines "token<TAB>count".
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  friend Vocabulary build_vocab(
      const std::vector<std::vector<std::string>>& raw_documents,
      const VocabPolicy& policy);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> freq_;
  std::unordered_map<std::string, std::uint32_t> id_;
  std::uint64_t total_ = 0;

  void finalize();  // builds id_, freq_, total_ from tokens_/counts_
};

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& raw_documents,
                       const VocabPolicy& policy);

}  // namespace bpv
