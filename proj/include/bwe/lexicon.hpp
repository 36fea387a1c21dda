#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bwe/embedding_store.hpp"

namespace bwe {

struct WordPair {
  std::string source;
  std::string target;

  friend bool operator==(const WordPair&, const WordPair&) = default;
};

struct LexiconFilterReport {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t dropped_uncovered = 0;  // source or target lacks an embedding
  std::size_t duplicates = 0;
  std::size_t multiword = 0;  // either side contains an internal space
};

/// Seed dictionary with a train/dev partition over pair indices.
///
/// A freshly loaded lexicon puts every pair in train; `split` produces the
/// partition. Both index lists are sorted ascending.
class SeedLexicon {
 public:
  SeedLexicon() = default;
  /// Deduplicates `pairs`, keeping first occurrences. All pairs start in train.
  explicit SeedLexicon(std::vector<WordPair> pairs);

  const std::vector<WordPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  const std::vector<std::size_t>& train_indices() const noexcept { return train_; }
  const std::vector<std::size_t>& dev_indices() const noexcept { return dev_; }
  std::uint64_t split_seed() const noexcept { return seed_; }

  std::vector<WordPair> train_pairs() const;
  std::vector<WordPair> dev_pairs() const;

  /// Drops pairs whose source or target has no vector. Resets the partition.
  SeedLexicon filtered(const EmbeddingStore& source, const EmbeddingStore& target,
                       std::size_t* dropped = nullptr) const;

  /// Partitions by source-token group so no source appears on both sides.
  /// Groups are visited in a seeded shuffle and packed greedily into train
  /// without exceeding round(train_fraction * size()); when every source
  /// is distinct this hits the target exactly.
  SeedLexicon split(double train_fraction, std::uint64_t seed) const;

 private:
  std::vector<WordPair> pairs_;
  std::vector<std::size_t> train_;
  std::vector<std::size_t> dev_;
  std::uint64_t seed_ = 0;
};

struct LoadedLexicon {
  SeedLexicon lexicon;
  LexiconFilterReport report;
};

/// Reads "source<TAB>target" or "source target" lines; '#' starts a
/// comment line. Pairs are filtered to embedding coverage.
LoadedLexicon load_lexicon(const std::filesystem::path& path, const EmbeddingStore& source,
                           const EmbeddingStore& target);
LoadedLexicon parse_lexicon(std::string_view text, const EmbeddingStore& source,
                            const EmbeddingStore& target,
                            const std::string& source_name = "<memory>");

/// Tab-separated pair list, one per line.
std::string to_text(const std::vector<WordPair>& pairs);

}  // namespace bwe
