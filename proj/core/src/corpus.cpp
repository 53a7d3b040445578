#include "bpv/corpus.hpp"

#include <cctype>
#include <fstream>

#include "bpv/errors.hpp"
#include "bpv/parallel.hpp"
#include "bpv/sampling.hpp"

namespace bpv {

namespace {

bool is_ascii_alnum(unsigned char c) { return c < 0x80 && std::isalnum(c); }

// Strippable from token edges: ASCII characters that are not alphanumeric.
// Non-ASCII bytes are treated as word characters.
bool is_strippable(unsigned char c) { return c < 0x80 && !std::isalnum(c); }

std::int8_t parse_label(const std::string& field, const std::string& path,
                        std::size_t line_no) {
  if (field.empty()) return -1;
  if (field == "0") return 0;
  if (field == "1") return 1;
  throw InputError(path + ":" + std::to_string(line_no) +
                   ": label must be 0, 1, or empty, got '" + field + "'");
}

}  // namespace

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i == start) break;

    std::string tok = line.substr(start, i - start);
    for (char& c : tok) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    std::size_t lo = 0, hi = tok.size();
    while (lo < hi && is_strippable(static_cast<unsigned char>(tok[lo]))) ++lo;
    while (hi > lo && is_strippable(static_cast<unsigned char>(tok[hi - 1])))
      --hi;
    if (hi > lo) tokens.push_back(tok.substr(lo, hi - lo));
  }
  return tokens;
}

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "plain") return CorpusFormat::kPlain;
  if (name == "labeled-tsv") return CorpusFormat::kLabeledTsv;
  if (name == "pair-tsv") return CorpusFormat::kPairTsv;
  throw InputError("unknown corpus format: " + name +
                   " (expected plain, labeled-tsv, or pair-tsv)");
}

std::string corpus_format_name(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::kPlain: return "plain";
    case CorpusFormat::kLabeledTsv: return "labeled-tsv";
    case CorpusFormat::kPairTsv: return "pair-tsv";
  }
  return "plain";
}

RawCorpus load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file: " + path);

  RawCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    switch (format) {
      case CorpusFormat::kPlain: {
        corpus.documents.push_back(tokenize(line));
        corpus.labels.push_back(-1);
        break;
      }
      case CorpusFormat::kLabeledTsv: {
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
          throw InputError(path + ":" + std::to_string(line_no) +
                           ": malformed labeled-tsv line (expected "
                           "label<TAB>text)");
        }
        corpus.labels.push_back(parse_label(line.substr(0, tab), path, line_no));
        corpus.documents.push_back(tokenize(line.substr(tab + 1)));
        break;
      }
      case CorpusFormat::kPairTsv: {
        const auto tab1 = line.find('\t');
        const auto tab2 =
            tab1 == std::string::npos ? std::string::npos
                                      : line.find('\t', tab1 + 1);
        if (tab1 == std::string::npos || tab2 == std::string::npos) {
          throw InputError(path + ":" + std::to_string(line_no) +
                           ": malformed pair-tsv line (expected "
                           "label<TAB>sentence1<TAB>sentence2)");
        }
        const std::int8_t label =
            parse_label(line.substr(0, tab1), path, line_no);
        SentencePairing pairing;
        pairing.first = static_cast<std::uint32_t>(corpus.documents.size());
        corpus.documents.push_back(
            tokenize(line.substr(tab1 + 1, tab2 - tab1 - 1)));
        corpus.labels.push_back(-1);
        pairing.second = static_cast<std::uint32_t>(corpus.documents.size());
        corpus.documents.push_back(tokenize(line.substr(tab2 + 1)));
        corpus.labels.push_back(-1);
        pairing.label = label;
        corpus.pairs.push_back(pairing);
        break;
      }
    }
  }
  return corpus;
}

std::vector<Document> to_documents(
    const std::vector<std::vector<std::string>>& raw_documents,
    const Vocabulary& vocab) {
  std::vector<Document> docs;
  docs.reserve(raw_documents.size());
  for (std::size_t n = 0; n < raw_documents.size(); ++n) {
    Document doc;
    doc.doc_id = static_cast<std::int32_t>(n);
    doc.raw_length = static_cast<std::uint32_t>(raw_documents[n].size());
    doc.token_ids.reserve(raw_documents[n].size());
    for (const auto& tok : raw_documents[n]) {
      const auto id = vocab.id_of(tok);
      if (id >= 0) doc.token_ids.push_back(static_cast<std::uint32_t>(id));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<IdPair> extract_positive_pairs(const Document& doc,
                                           std::uint32_t window) {
  const auto& ids = doc.token_ids;
  const auto len = static_cast<std::int64_t>(ids.size());
  const auto c = static_cast<std::int64_t>(window);

  std::vector<IdPair> pairs;
  if (len >= 2) pairs.reserve(static_cast<std::size_t>(len) * 2 * window);
  for (std::int64_t t = 0; t < len; ++t) {
    for (std::int64_t delta = -c; delta <= c; ++delta) {
      if (delta == 0) continue;
      const std::int64_t s = t + delta;
      if (s < 0 || s >= len) continue;
      pairs.emplace_back(ids[t], ids[s]);
    }
  }
  return pairs;
}

PairData make_pair_data(const Document& doc, std::uint32_t window,
                        const NoiseSampler* sampler, std::size_t k, Rng& rng) {
  PairData pairs;
  pairs.doc_id = doc.doc_id;
  pairs.positives = extract_positive_pairs(doc, window);
  if (k > 0) {
    if (sampler == nullptr) {
      throw InputError("negative sampling requested without a noise sampler");
    }
    pairs.negatives = sample_negatives(*sampler, k, rng);
  }
  return pairs;
}

std::vector<PairData> make_all_pair_data(std::span<const Document> docs,
                                         std::uint32_t window,
                                         const NoiseSampler* sampler,
                                         std::size_t k,
                                         std::uint64_t global_seed,
                                         std::uint32_t threads) {
  std::vector<PairData> all(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t n) {
    Rng rng = make_rng(global_seed, SeedTag::kNegatives,
                       static_cast<std::uint64_t>(docs[n].doc_id));
    all[n] = make_pair_data(docs[n], window, sampler, k, rng);
  });
  return all;
}

}  // namespace bpv
