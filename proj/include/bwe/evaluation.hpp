#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bwe/bilinear_model.hpp"
#include "bwe/embedding_store.hpp"
#include "bwe/lexicon.hpp"

namespace bwe {

struct WordRank {
  std::string source;
  /// Best rank among the gold targets in the candidate set; absent when
  /// the source was excluded (no gold target covered, or no source vector).
  std::optional<std::size_t> rank;
};

struct EvalResult {
  std::vector<std::size_t> k_values;  // sorted ascending, unique
  std::map<std::size_t, double> precision_at_k;
  std::vector<WordRank> per_word_ranks;  // one per source type, first-appearance order
  std::size_t evaluated = 0;
  std::size_t gold_uncovered = 0;    // every gold target outside the candidate set
  std::size_t source_uncovered = 0;  // source has no embedding
};

/// Type-level precision@k: a source counts as a hit at k when any of its
/// gold targets ranks within the top k.
EvalResult precision_at_k(const BilinearModel& model, std::span<const WordPair> pairs,
                          std::span<const std::size_t> ks);

/// Both sides of the low-rank factorization W_k = (U_k S_k^1/2)(V_k S_k^1/2)^T
/// applied to the full vocabularies. Row dot products equal
/// phi_s(e)^T W_k phi_t(f).
struct CompressedEmbeddings {
  std::size_t rank_k = 0;
  EmbeddingStore source;
  EmbeddingStore target;
};

/// `k` defaults to the numerical rank of W. Throws bwe::Error when k is 0
/// or exceeds min(n_s, n_t).
CompressedEmbeddings compress(const BilinearModel& model, std::optional<std::size_t> k = {});

/// "<k>\t<precision>" rows with a header line.
std::string precision_table(const EvalResult& result);
/// "<source>\t<rank or ->" rows with a header line.
std::string rank_dump(const EvalResult& result);

}  // namespace bwe
