#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace bwe {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LoadOptions {
  /// Keep only the first `limit` rows (files are assumed frequency-sorted).
  std::optional<std::size_t> limit;
  /// Scale every vector to unit Euclidean length after loading.
  bool normalize = false;
  std::string language_tag;
};

/// Immutable vocabulary -> vector table for one language.
///
/// Components are parsed as single precision and widened to double, so a
/// store loaded from disk is exactly representable in the binary cache.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Builds a store from tokens and a |tokens| x dimension matrix. Tokens
  /// must be unique and non-empty; every component must be finite.
  EmbeddingStore(std::string language_tag, std::vector<std::string> tokens, RowMatrix matrix);

  const std::string& language_tag() const noexcept { return language_tag_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }

  const std::vector<std::string>& vocab() const noexcept { return tokens_; }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const RowMatrix& matrix() const noexcept { return matrix_; }

  std::optional<std::size_t> index_of(std::string_view token) const;
  bool contains(std::string_view token) const { return index_of(token).has_value(); }

  /// The stored row for `token`, or nullopt when out of vocabulary.
  std::optional<Eigen::VectorXd> lookup(std::string_view token) const;

  /// Row `index` without a copy.
  auto row(std::size_t index) const { return matrix_.row(static_cast<Eigen::Index>(index)); }

  /// Fraction of `tokens` that have a vector; 1 for an empty list.
  double coverage(std::span<const std::string> tokens) const;

  /// Returns a copy with every row scaled to unit norm. Zero rows stay zero.
  EmbeddingStore normalized() const;

 private:
  std::string language_tag_;
  std::vector<std::string> tokens_;
  RowMatrix matrix_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct LoadedEmbeddings {
  EmbeddingStore store;
  /// Rows dropped because their token had already been seen.
  std::size_t duplicates_dropped = 0;
};

/// Loads either the text format ("vocab_size dimension" header, then one
/// token and `dimension` numbers per line) or the binary cache; the
/// binary cache is recognised by its magic bytes.
LoadedEmbeddings load_embeddings(const std::filesystem::path& path, const LoadOptions& options = {});

/// Parses the text format from an in-memory buffer.
LoadedEmbeddings parse_text_embeddings(std::string_view text, const LoadOptions& options = {},
                                       const std::string& source_name = "<memory>");

/// Text format. Components are written with 9 significant digits, enough
/// to round-trip single precision.
std::string to_text(const EmbeddingStore& store);
void save_text(const EmbeddingStore& store, const std::filesystem::path& path);

/// Binary cache: "BWEE", version byte, u32 dimension, u32 vocab count,
/// length-prefixed tokens, then row-major little-endian f32 components.
std::string to_binary(const EmbeddingStore& store);
void save_binary(const EmbeddingStore& store, const std::filesystem::path& path);

inline constexpr std::string_view kEmbeddingMagic = "BWEE";
inline constexpr std::uint8_t kEmbeddingVersion = 1;

}  // namespace bwe
