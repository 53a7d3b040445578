#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bpv/rng.hpp"
#include "bpv/vocab.hpp"

namespace bpv {

using IdPair = std::pair<std::uint32_t, std::uint32_t>;

// One document after vocabulary filtering. token_ids contains only in-vocab
// ids; raw_length is the token count before filtering.
struct Document {
  std::int32_t doc_id = 0;
  std::vector<std::uint32_t> token_ids;
  std::uint32_t raw_length = 0;
};

// Positive skip-gram pairs and sampled negative pairs for one document.
struct PairData {
  std::int32_t doc_id = 0;
  std::vector<IdPair> positives;
  std::vector<IdPair> negatives;
};

enum class CorpusFormat { kPlain, kLabeledTsv, kPairTsv };

CorpusFormat parse_corpus_format(const std::string& name);
std::string corpus_format_name(CorpusFormat format);

// Sentence pairing for the paraphrase format; indices refer to documents.
struct SentencePairing {
  std::uint32_t first = 0;
  std::uint32_t second = 0;
  std::int8_t label = -1;  // -1 = unlabeled
};

struct RawCorpus {
  std::vector<std::vector<std::string>> documents;  // tokenized text
  std::vector<std::int8_t> labels;  // per document; -1 = unlabeled
  std::vector<SentencePairing> pairs;  // pair-tsv only
};

// Lowercases ASCII, splits on whitespace, strips leading/trailing ASCII
// non-alphanumerics from each token. Bytes >= 0x80 are kept untouched.
std::vector<std::string> tokenize(const std::string& line);

// plain:       one document per line
// labeled-tsv: "label<TAB>text", label in {0, 1} or empty (unlabeled)
// pair-tsv:    "label<TAB>sentence1<TAB>sentence2"; each sentence becomes its
//              own document, pairs records the pairing
RawCorpus load_corpus(const std::string& path, CorpusFormat format);

// Maps tokenized documents to id sequences, dropping OOV tokens. Windows are
// later formed over the filtered sequence, closing over removed tokens.
std::vector<Document> to_documents(
    const std::vector<std::vector<std::string>>& raw_documents,
    const Vocabulary& vocab);

// Emits (token_ids[t], token_ids[t+delta]) for every position t and
// delta in [-window, window] \ {0} that stays in range, in (t, delta
// ascending) order.
std::vector<IdPair> extract_positive_pairs(const Document& doc,
                                           std::uint32_t window);

class NoiseSampler;

// Positive pairs from window extraction plus k noise-sampled negatives.
// sampler may be null only when k == 0.
PairData make_pair_data(const Document& doc, std::uint32_t window,
                        const NoiseSampler* sampler, std::size_t k, Rng& rng);

// Batch variant; each document uses its own derived seed so the result is
// identical for any thread count.
std::vector<PairData> make_all_pair_data(std::span<const Document> docs,
                                         std::uint32_t window,
                                         const NoiseSampler* sampler,
                                         std::size_t k,
                                         std::uint64_t global_seed,
                                         std::uint32_t threads = 1);

}  // namespace bpv
