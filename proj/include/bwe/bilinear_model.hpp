#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bwe/embedding_store.hpp"
#include "bwe/lexicon.hpp"

namespace bwe {

struct Translation {
  std::string target;
  double probability = 0.0;
};

/// Ranked translations of one source word, descending probability with
/// ties broken by ascending target token.
struct TranslationDistribution {
  std::string source_token;
  std::vector<Translation> entries;
};

/// Log-bilinear softmax model
///
///   Pr(f | e; W) = exp(s(e, f)) / sum_{f' in C} exp(s(e, f')),
///   s(e, f)      = phi_s(e)^T W phi_t(f),
///
/// where C is the candidate set, an ordered duplicate-free subset of the
/// target vocabulary. All arithmetic is double precision.
class BilinearModel {
 public:
  using Store = std::shared_ptr<const EmbeddingStore>;

  /// `candidates` empty means the whole target vocabulary, in store order.
  BilinearModel(Store source, Store target, Eigen::MatrixXd weights,
                std::vector<std::string> candidates = {});

  /// W = 0, i.e. the uniform distribution over candidates.
  static BilinearModel zeros(Store source, Store target, std::vector<std::string> candidates = {});

  const EmbeddingStore& source_store() const noexcept { return *source_; }
  const EmbeddingStore& target_store() const noexcept { return *target_; }
  const Store& source_ptr() const noexcept { return source_; }
  const Store& target_ptr() const noexcept { return target_; }

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  /// Replaces W; dimensions must match and every entry must be finite.
  void set_weights(Eigen::MatrixXd weights);

  std::size_t candidate_count() const noexcept { return candidate_tokens_.size(); }
  const std::vector<std::string>& candidate_tokens() const noexcept { return candidate_tokens_; }
  std::optional<std::size_t> candidate_index(std::string_view target) const;
  /// |C| x n_t matrix whose rows are the candidate vectors.
  const RowMatrix& candidate_matrix() const noexcept { return candidates_; }

  /// Bilinear form before exponentiation. Throws UnknownTokenError.
  double score(std::string_view source, std::string_view target) const;

  /// Scores of every candidate for one source vector (length n_s).
  Eigen::VectorXd candidate_scores(const Eigen::Ref<const Eigen::VectorXd>& source_vector) const;
  Eigen::VectorXd candidate_scores(std::string_view source) const;

  TranslationDistribution distribution(std::string_view source) const;
  /// First `n` entries of `distribution`, not renormalized.
  TranslationDistribution top_n(std::string_view source, std::size_t n) const;

  /// 1-based position of `target` in the full sorted distribution.
  std::size_t rank_of(std::string_view source, std::string_view target) const;

  /// -sum log Pr(f | e; W) over `pairs`.
  double nll(std::span<const WordPair> pairs) const;
  /// Exact gradient of `nll` with respect to W (n_s x n_t).
  Eigen::MatrixXd nll_gradient(std::span<const WordPair> pairs) const;
  /// Both at once, sharing the softmax evaluation.
  std::pair<double, Eigen::MatrixXd> nll_and_gradient(std::span<const WordPair> pairs) const;

 private:
  std::size_t source_row(std::string_view source) const;
  std::size_t candidate_or_throw(std::string_view target) const;
  std::pair<double, Eigen::MatrixXd> evaluate(std::span<const WordPair> pairs, bool with_gradient) const;

  Store source_;
  Store target_;
  Eigen::MatrixXd weights_;
  std::vector<std::string> candidate_tokens_;
  std::unordered_map<std::string, std::size_t> candidate_index_;
  RowMatrix candidates_;
};

/// Sorts candidate indices by (score descending, token ascending).
std::vector<std::size_t> ranked_candidates(const Eigen::VectorXd& scores,
                                           const std::vector<std::string>& tokens);

/// Numerically stable log(sum(exp(scores))).
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& scores);

/// Model file: "BWEM", version byte, u32 n_s, u32 n_t, u32 candidate count,
/// length-prefixed candidate tokens, then W row-major as little-endian f64.
std::string model_to_bytes(const BilinearModel& model);
void save_model(const BilinearModel& model, const std::filesystem::path& path);
/// Candidate tokens are resolved against `target`; dimensions must match.
BilinearModel load_model(const std::filesystem::path& path, BilinearModel::Store source,
                         BilinearModel::Store target);
BilinearModel model_from_bytes(std::string_view bytes, BilinearModel::Store source,
                               BilinearModel::Store target,
                               const std::string& source_name = "<memory>");

inline constexpr std::string_view kModelMagic = "BWEM";
inline constexpr std::uint8_t kModelVersion = 1;

}  // namespace bwe
