#include "bpv/vocab.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bpv/errors.hpp"

namespace bpv {

void Vocabulary::finalize() {
  id_.clear();
  id_.reserve(tokens_.size());
  total_ = 0;
  for (std::size_t k = 0; k < tokens_.size(); ++k) {
    id_.emplace(tokens_[k], static_cast<std::uint32_t>(k));
    total_ += counts_[k];
  }
  freq_.resize(counts_.size());
  for (std::size_t k = 0; k < counts_.size(); ++k) {
    freq_[k] = static_cast<double>(counts_[k]) / static_cast<double>(total_);
  }
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& raw_documents,
                       const VocabPolicy& policy) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : raw_documents) {
    for (const auto& tok : doc) ++counts[tok];
  }

  std::vector<std::pair<std::string, std::uint64_t>> entries(counts.begin(),
                                                             counts.end());
  // Count descending, ties lexicographic.
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  for (const auto& [token, count] : entries) {
    if (policy.min_count > 0) {
      if (count < policy.min_count) break;  // entries are count-sorted
    } else if (vocab.tokens_.size() >= policy.max_vocab_size) {
      break;
    }
    vocab.tokens_.push_back(token);
    vocab.counts_.push_back(count);
  }
  if (!vocab.tokens_.empty()) vocab.finalize();
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write vocabulary file: " + path);
  out << tokens_.size() << "\n";
  for (std::size_t k = 0; k < tokens_.size(); ++k) {
    out << tokens_[k] << "\t" << counts_[k] << "\n";
  }
  if (!out) throw InputError("failed writing vocabulary file: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw InputError(path + ":1: expected vocabulary size header");
  }
  std::size_t w = 0;
  try {
    w = std::stoull(line);
  } catch (const std::exception&) {
    throw InputError(path + ":1: malformed vocabulary size header: " + line);
  }

  Vocabulary vocab;
  vocab.tokens_.reserve(w);
  vocab.counts_.reserve(w);
  for (std::size_t k = 0; k < w; ++k) {
    if (!std::getline(in, line)) {
      throw InputError(path + ": truncated vocabulary file, expected " +
                       std::to_string(w) + " entries");
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InputError(path + ":" + std::to_string(k + 2) +
                       ": malformed vocabulary line (expected token<TAB>count)");
    }
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw InputError(path + ":" + std::to_string(k + 2) +
                       ": malformed count: " + line.substr(tab + 1));
    }
    if (count == 0) {
      throw InputError(path + ":" + std::to_string(k + 2) +
                       ": zero count is not representable as a frequency");
    }
    vocab.tokens_.push_back(line.substr(0, tab));
    vocab.counts_.push_back(count);
  }
  if (!vocab.tokens_.empty()) vocab.finalize();
  return vocab;
}

}  // namespace bpv
