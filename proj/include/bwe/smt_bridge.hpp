#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bwe/bilinear_model.hpp"

namespace bwe {

using Sentence = std::vector<std::string>;

/// Tokens known to the downstream translation system.
class SystemVocabulary {
 public:
  /// Throws bwe::Error when `tokens` is empty.
  explicit SystemVocabulary(std::vector<std::string> tokens);
  bool contains(std::string_view token) const;
  std::size_t size() const noexcept { return tokens_.size(); }

 private:
  std::unordered_set<std::string> tokens_;
};

/// One token per line; blank lines ignored.
SystemVocabulary load_system_vocabulary(const std::filesystem::path& path);
SystemVocabulary parse_system_vocabulary(std::string_view text);

/// Pre-tokenized corpus: one sentence per line, tokens split on whitespace.
std::vector<Sentence> parse_corpus(std::string_view text);
std::vector<Sentence> load_corpus(const std::filesystem::path& path);

/// Capitalization heuristic for named entities.
struct NamedEntityRule {
  /// A capitalized token right after one of these tokens is treated like a
  /// sentence-initial one.
  std::set<std::string, std::less<>> punctuation{".", "!", "?", ":", ";", "\""};

  /// True when the token at `position` is sentence-initial or follows punctuation.
  bool after_boundary(const Sentence& sentence, std::size_t position) const;
};

/// Named entity iff (starts uppercase and not at a boundary) or every
/// letter is uppercase with at least one letter present.
bool classify_named_entity(std::string_view token, bool is_sentence_initial_or_after_punct);

struct TokenFlag {
  bool oov = false;
  bool named_entity = false;  // meaningful only for OOVs
};

struct OovReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t oov_all = 0;
  std::size_t oov_cw = 0;  // OOVs that are not named entities

  double oov_all_fraction() const;
  double oov_cw_fraction() const;
};

struct OovScan {
  OovReport report;
  std::vector<std::vector<TokenFlag>> flags;  // parallel to the corpus
};

/// Throws bwe::Error when the corpus contains no tokens.
OovScan scan_oov(std::span<const Sentence> corpus, const SystemVocabulary& vocab,
                 const NamedEntityRule& rule = {});

enum class MarkupMode { none, verbatim, bwe_all, bwe_cw };

struct MarkupPolicy {
  MarkupMode mode = MarkupMode::bwe_cw;
  std::size_t top_n = 10;
  bool add_verbatim_option = true;
};

struct OptionList {
  std::vector<Translation> options;
  /// The model was asked but had no source vector, so verbatim copy was used.
  bool embedding_fallback = false;
};

/// Translation options for one OOV under `policy`; mode must not be none.
/// Model lists are renormalized to sum to one. The verbatim option gets the
/// highest model probability before renormalization, and is skipped when
/// the model list already contains the source token.
OptionList build_options(const BilinearModel* model, const std::string& oov,
                         const MarkupPolicy& policy, bool is_ne);

/// Sentence with each entry of `options` that is non-empty wrapped as
///   <tag translation="t1||t2" prob="p1||p2">token</tag>
/// Options are emitted by descending probability (stable for ties),
/// probabilities with 6 significant digits. Other tokens pass through.
/// `options` must be empty or parallel to `sentence`.
std::string emit_markup(const Sentence& sentence, std::span<const std::vector<Translation>> options,
                        std::string_view tag = "oov");

/// '<', '>', '&', '"' to entities.
std::string escape_xml(std::string_view text);
std::string unescape_xml(std::string_view text);

struct MarkupItem {
  std::string token;
  std::vector<Translation> options;  // empty for plain tokens
};

/// Parses lines produced by emit_markup. Throws FormatError on malformed
/// elements.
std::vector<MarkupItem> parse_markup(std::string_view line, std::string_view tag = "oov");

struct MarkupResult {
  std::vector<std::string> lines;
  OovScan scan;
  std::size_t embedding_fallbacks = 0;
  std::size_t marked_tokens = 0;
};

/// scan_oov -> build_options -> emit_markup over a corpus.
MarkupResult markup_corpus(std::span<const Sentence> corpus, const SystemVocabulary& vocab,
                           const BilinearModel* model, const MarkupPolicy& policy,
                           std::string_view tag = "oov", const NamedEntityRule& rule = {});

/// Tab-separated header plus one row (sentences, tokens, OOV_all, OOV_CW
/// and their fractions, verbatim fallbacks).
std::string oov_report_table(const OovReport& report, std::size_t embedding_fallbacks = 0);

std::string to_string(MarkupMode m);
MarkupMode parse_markup_mode(const std::string& s);

}  // namespace bwe
