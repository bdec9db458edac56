#include "socialwell/textproc.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

namespace socialwell::text {

namespace {

std::string light_stem(std::string_view token) {
  // Drops one final inflectional vowel (or plural s) from words of five or
  // more bytes: "amici" -> "amic", "amico" -> "amic".
  if (token.size() < 5) return std::string(token);
  const char last = token.back();
  if (last == 'a' || last == 'e' || last == 'i' || last == 'o' || last == 's')
    return std::string(token.substr(0, token.size() - 1));
  return std::string(token);
}

struct StemmerRegistry {
  std::mutex mutex;
  std::map<std::string, Stemmer> entries{{"light", light_stem}};
};

StemmerRegistry& registry() {
  static StemmerRegistry r;
  return r;
}

std::optional<Stemmer> lookup_stemmer(const std::string& name) {
  if (name == "none") return std::nullopt;
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.entries.find(name);
  if (it == r.entries.end()) throw std::invalid_argument("textproc: unknown stemmer '" + name + "'");
  return it->second;
}

bool is_token_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK || type == U_ENCLOSING_MARK ||
         u_hasBinaryProperty(c, UCHAR_ALPHABETIC);
}

icu::UnicodeString normalize(std::string_view text, bool case_fold) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("textproc: ICU NFC normalizer unavailable");
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s = nfc->normalize(s, status);
  if (case_fold) {
    s.foldCase();
    s = nfc->normalize(s, status);
  }
  if (U_FAILURE(status)) throw std::runtime_error("textproc: normalization failed");
  return s;
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

std::string join_config(const TokenizerConfig& c) {
  std::ostringstream os;
  os << "casefold=" << (c.case_fold ? 1 : 0) << " stemmer=" << c.stemmer << " ngrams=";
  for (std::size_t i = 0; i < c.ngram_orders.size(); ++i) os << (i ? "," : "") << c.ngram_orders[i];
  os << " min_df=" << c.min_df;
  return os.str();
}

}  // namespace

void TokenizerConfig::validate() const {
  if (ngram_orders.empty()) throw std::invalid_argument("textproc: at least one n-gram order is required");
  for (int n : ngram_orders)
    if (n < 1) throw std::invalid_argument("textproc: n-gram orders must be >= 1");
  if (min_df < 1) throw std::invalid_argument("textproc: min_df must be >= 1");
  lookup_stemmer(stemmer);
}

void register_stemmer(const std::string& name, Stemmer stemmer) {
  if (name == "none") throw std::invalid_argument("textproc: stemmer name 'none' is reserved");
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.entries[name] = std::move(stemmer);
}

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  const icu::UnicodeString s = normalize(text, config.case_fold);
  const auto stemmer = lookup_stemmer(config.stemmer);

  std::vector<std::string> tokens;
  icu::UnicodeString current;
  auto flush = [&] {
    if (current.isEmpty()) return;
    std::string token = to_utf8(current);
    if (stemmer) token = (*stemmer)(token);
    if (!token.empty()) tokens.push_back(std::move(token));
    current.remove();
  };
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    if (is_token_char(c))
      current.append(c);
    else
      flush();
    i = s.moveIndex32(i, 1);
  }
  flush();
  return tokens;
}

std::vector<std::string> terms(std::string_view text, const TokenizerConfig& config) {
  const auto tokens = tokenize(text, config);
  std::set<std::string> out;
  for (int order : config.ngram_orders) {
    const auto n = static_cast<std::size_t>(order);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < n; ++k) gram += ' ' + tokens[i + k];
      out.insert(std::move(gram));
    }
  }
  return {out.begin(), out.end()};
}

StemLexicon::StemLexicon(std::vector<std::string> stems, TokenizerConfig config)
    : stems_(std::move(stems)), config_(std::move(config)) {
  if (stems_.empty()) throw std::invalid_argument("textproc: lexicon must contain at least one stem");
  if (!std::is_sorted(stems_.begin(), stems_.end()))
    throw std::invalid_argument("textproc: lexicon stems must be sorted");
  for (std::size_t i = 0; i < stems_.size(); ++i) {
    if (!index_.emplace(stems_[i], static_cast<std::uint32_t>(i)).second)
      throw std::invalid_argument("textproc: duplicate stem '" + stems_[i] + "'");
  }
}

std::optional<std::uint32_t> StemLexicon::index_of(const std::string& term) const {
  auto it = index_.find(term);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void StemLexicon::save(std::ostream& out) const {
  out << "#lexicon " << join_config(config_) << '\n';
  for (const auto& s : stems_) out << s << '\n';
}

StemLexicon StemLexicon::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("#lexicon ", 0) != 0)
    throw std::invalid_argument("textproc: lexicon file lacks '#lexicon' header");
  TokenizerConfig config;
  std::istringstream hs(header.substr(9));
  std::string field;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("textproc: malformed lexicon header field '" + field + "'");
    const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
    if (key == "casefold") {
      config.case_fold = value == "1";
    } else if (key == "stemmer") {
      config.stemmer = value;
    } else if (key == "ngrams") {
      config.ngram_orders.clear();
      std::istringstream vs(value);
      std::string n;
      while (std::getline(vs, n, ',')) config.ngram_orders.push_back(std::stoi(n));
    } else if (key == "min_df") {
      config.min_df = std::stoul(value);
    } else {
      throw std::invalid_argument("textproc: unknown lexicon header key '" + key + "'");
    }
  }
  config.validate();
  std::vector<std::string> stems;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) stems.push_back(line);
  }
  return StemLexicon(std::move(stems), std::move(config));
}

StemLexicon build_lexicon(std::span<const Document> docs, const TokenizerConfig& config) {
  config.validate();
  if (docs.empty()) throw std::invalid_argument("textproc: cannot build a lexicon from an empty corpus");
  std::map<std::string, std::size_t> df;
  bool any_terms = false;
  for (const auto& doc : docs) {
    for (auto& t : terms(doc.text, config)) {
      ++df[std::move(t)];
      any_terms = true;
    }
  }
  if (!any_terms) throw std::invalid_argument("textproc: every document text is empty after tokenization");
  std::vector<std::string> stems;
  for (auto& [term, count] : df)
    if (count >= config.min_df) stems.push_back(term);
  if (stems.empty())
    throw std::invalid_argument("textproc: no term reaches the minimum document frequency " +
                                std::to_string(config.min_df));
  return StemLexicon(std::move(stems), config);
}

bool StemVector::bit(std::size_t i) const {
  return std::binary_search(ones.begin(), ones.end(), static_cast<std::uint32_t>(i));
}

std::vector<std::uint8_t> StemVector::bits() const {
  std::vector<std::uint8_t> out(length, 0);
  for (auto i : ones) out[i] = 1;
  return out;
}

std::size_t EncodedCorpus::zero_vector_count() const {
  if (!unique_vectors.empty() && unique_vectors.front().all_zero()) return unique_vectors.front().multiplicity;
  return 0;
}

std::optional<std::size_t> EncodedCorpus::find_vector(const std::vector<std::uint32_t>& ones) const {
  auto it = std::lower_bound(unique_vectors.begin(), unique_vectors.end(), ones,
                             [](const StemVector& v, const std::vector<std::uint32_t>& key) { return v.ones < key; });
  if (it == unique_vectors.end() || it->ones != ones) return std::nullopt;
  return static_cast<std::size_t>(it - unique_vectors.begin());
}

EncodedCorpus encode(std::span<const Document> docs, const StemLexicon& lexicon) {
  std::vector<std::vector<std::uint32_t>> keys;
  keys.reserve(docs.size());
  std::set<std::string> seen_ids;
  for (const auto& doc : docs) {
    if (!seen_ids.insert(doc.id).second) throw std::invalid_argument("textproc: duplicate document id '" + doc.id + "'");
    std::vector<std::uint32_t> ones;
    for (const auto& t : terms(doc.text, lexicon.config()))
      if (auto idx = lexicon.index_of(t)) ones.push_back(*idx);
    std::sort(ones.begin(), ones.end());
    keys.push_back(std::move(ones));
  }

  std::map<std::vector<std::uint32_t>, std::size_t> counts;
  for (const auto& k : keys) ++counts[k];

  EncodedCorpus out{lexicon, {}, {}, {}, {}};
  out.unique_vectors.reserve(counts.size());
  for (const auto& [ones, count] : counts) out.unique_vectors.push_back({ones, lexicon.size(), count});
  out.ids.reserve(docs.size());
  out.assignment.reserve(docs.size());
  out.labels.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    out.ids.push_back(docs[d].id);
    out.assignment.push_back(*out.find_vector(keys[d]));
    out.labels.push_back(docs[d].label);
  }
  return out;
}

std::vector<Document> read_corpus_jsonl(std::istream& in, const std::string& source) {
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  auto optional_string = [&](const nlohmann::json& obj, const char* key) -> std::optional<std::string> {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string())
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": field '" + key + "' must be a string or null");
    return it->get<std::string>();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!obj.is_object()) throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected a JSON object");
    Document doc;
    auto id = optional_string(obj, "id");
    auto text = optional_string(obj, "text");
    if (!id || !text)
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": fields 'id' and 'text' are required");
    doc.id = std::move(*id);
    doc.text = std::move(*text);
    doc.label = optional_string(obj, "label");
    if (auto ts = optional_string(obj, "ts")) {
      try {
        doc.timestamp = time::parse_instant(*ts);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    doc.unit = optional_string(obj, "unit");
    docs.push_back(std::move(doc));
  }
  return docs;
}

void write_corpus_jsonl(std::ostream& out, std::span<const Document> docs) {
  for (const auto& doc : docs) {
    nlohmann::ordered_json obj;
    obj["id"] = doc.id;
    obj["text"] = doc.text;
    obj["label"] = doc.label ? nlohmann::ordered_json(*doc.label) : nlohmann::ordered_json(nullptr);
    obj["ts"] = doc.timestamp ? nlohmann::ordered_json(time::format_instant(*doc.timestamp)) : nlohmann::ordered_json(nullptr);
    obj["unit"] = doc.unit ? nlohmann::ordered_json(*doc.unit) : nlohmann::ordered_json(nullptr);
    out << obj.dump() << '\n';
  }
}

}  // namespace socialwell::text
