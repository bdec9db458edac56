#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "socialwell/time.hpp"

namespace socialwell::text {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> label;  // absent means NA
  std::optional<time::Instant> timestamp;
  std::optional<std::string> unit;
};

/// Tokenization settings. `stemmer` names an entry of the stemmer registry
/// ("none" and "light" are built in).
struct TokenizerConfig {
  bool case_fold = true;
  std::string stemmer = "none";
  std::vector<int> ngram_orders{1, 2};
  std::size_t min_df = 2;

  void validate() const;
  bool operator==(const TokenizerConfig&) const = default;
};

using Stemmer = std::function<std::string(std::string_view)>;

/// Makes `stemmer` available under `name` for TokenizerConfig::stemmer.
void register_stemmer(const std::string& name, Stemmer stemmer);

/// NFC-normalized, optionally case-folded and stemmed tokens. Splits on
/// anything that is not a Unicode letter, digit or combining mark.
std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config);

/// Distinct n-grams of the configured orders (tokens joined by one space),
/// sorted.
std::vector<std::string> terms(std::string_view text, const TokenizerConfig& config);

class StemLexicon {
 public:
  StemLexicon(std::vector<std::string> stems, TokenizerConfig config);

  const std::vector<std::string>& stems() const { return stems_; }
  const TokenizerConfig& config() const { return config_; }
  std::size_t size() const { return stems_.size(); }
  std::optional<std::uint32_t> index_of(const std::string& term) const;

  bool operator==(const StemLexicon& other) const {
    return stems_ == other.stems_ && config_ == other.config_;
  }

  /// Header line with the config, then one stem per line.
  void save(std::ostream& out) const;
  static StemLexicon load(std::istream& in);

 private:
  std::vector<std::string> stems_;
  TokenizerConfig config_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Every term reaching `config.min_df` documents, lexicographically sorted.
StemLexicon build_lexicon(std::span<const Document> docs, const TokenizerConfig& config);

/// Binary incidence vector stored as the sorted positions of its ones.
struct StemVector {
  std::vector<std::uint32_t> ones;
  std::size_t length = 0;
  std::size_t multiplicity = 0;

  bool bit(std::size_t i) const;
  std::vector<std::uint8_t> bits() const;
  bool all_zero() const { return ones.empty(); }
};

struct EncodedCorpus {
  StemLexicon lexicon;
  /// Unique vectors in lexicographic order of their one-positions.
  std::vector<StemVector> unique_vectors;
  /// Per document, in input order.
  std::vector<std::string> ids;
  std::vector<std::size_t> assignment;
  std::vector<std::optional<std::string>> labels;

  std::size_t num_documents() const { return ids.size(); }
  std::size_t num_unique() const { return unique_vectors.size(); }
  /// Documents that contain no lexicon stem.
  std::size_t zero_vector_count() const;
  std::optional<std::size_t> find_vector(const std::vector<std::uint32_t>& ones) const;
};

/// Encodes documents over `lexicon`, merging identical vectors. Throws on
/// duplicate document ids.
EncodedCorpus encode(std::span<const Document> docs, const StemLexicon& lexicon);

/// Reads the JSON-lines corpus format (fields id, text, label, ts, unit).
std::vector<Document> read_corpus_jsonl(std::istream& in, const std::string& source = "<stream>");
void write_corpus_jsonl(std::ostream& out, std::span<const Document> docs);

}  // namespace socialwell::text
