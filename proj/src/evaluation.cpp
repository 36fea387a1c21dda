#include "bwe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <Eigen/SVD>

#include "bwe/binary_io.hpp"
#include "bwe/errors.hpp"
#include "bwe/prox.hpp"

namespace bwe {

EvalResult precision_at_k(const BilinearModel& model, std::span<const WordPair> pairs,
                          std::span<const std::size_t> ks) {
  if (pairs.empty()) throw Error("precision@k: no pairs to evaluate");
  if (ks.empty()) throw Error("precision@k: no k values");
  EvalResult out;
  out.k_values.assign(ks.begin(), ks.end());
  std::sort(out.k_values.begin(), out.k_values.end());
  out.k_values.erase(std::unique(out.k_values.begin(), out.k_values.end()), out.k_values.end());
  if (out.k_values.front() == 0) throw Error("precision@k: k must be at least 1");

  // gold targets per source type, first-appearance order
  std::vector<std::string> sources;
  std::unordered_map<std::string, std::vector<std::string>> gold;
  for (const auto& p : pairs) {
    auto [it, fresh] = gold.try_emplace(p.source);
    if (fresh) sources.push_back(p.source);
    it->second.push_back(p.target);
  }

  std::vector<std::size_t> hits(out.k_values.size(), 0);
  const auto& tokens = model.candidate_tokens();
  for (const auto& src : sources) {
    WordRank wr{src, std::nullopt};
    std::vector<std::size_t> covered;
    for (const auto& t : gold[src]) {
      if (auto c = model.candidate_index(t)) covered.push_back(*c);
    }
    if (!model.source_store().contains(src)) {
      ++out.source_uncovered;
    } else if (covered.empty()) {
      ++out.gold_uncovered;
    } else {
      Eigen::VectorXd scores = model.candidate_scores(src);
      std::size_t best = SIZE_MAX;
      for (auto c : covered) {
        const double sc = scores[static_cast<Eigen::Index>(c)];
        std::size_t rank = 1;
        for (Eigen::Index i = 0; i < scores.size(); ++i) {
          if (scores[i] > sc || (scores[i] == sc && tokens[static_cast<std::size_t>(i)] < tokens[c])) ++rank;
        }
        best = std::min(best, rank);
      }
      wr.rank = best;
      ++out.evaluated;
      for (std::size_t i = 0; i < out.k_values.size(); ++i) {
        if (best <= out.k_values[i]) ++hits[i];
      }
    }
    out.per_word_ranks.push_back(std::move(wr));
  }
  for (std::size_t i = 0; i < out.k_values.size(); ++i) {
    out.precision_at_k[out.k_values[i]] =
        out.evaluated == 0 ? 0.0 : static_cast<double>(hits[i]) / static_cast<double>(out.evaluated);
  }
  return out;
}

CompressedEmbeddings compress(const BilinearModel& model, std::optional<std::size_t> k) {
  const auto& W = model.weights();
  const auto max_k = static_cast<std::size_t>(std::min(W.rows(), W.cols()));
  const std::size_t rank = k ? *k : numerical_rank(W);
  if (rank == 0) throw Error(k ? "compress: k must be at least 1" : "compress: W has numerical rank 0");
  if (rank > max_k) {
    throw Error("compress: k=" + std::to_string(rank) + " exceeds min(n_s, n_t)=" + std::to_string(max_k));
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (!svd.singularValues().allFinite()) throw NumericalError("compress: SVD failed");
  const auto kk = static_cast<Eigen::Index>(rank);
  Eigen::VectorXd root = svd.singularValues().head(kk).cwiseSqrt();
  Eigen::MatrixXd left = svd.matrixU().leftCols(kk) * root.asDiagonal();
  Eigen::MatrixXd right = svd.matrixV().leftCols(kk) * root.asDiagonal();

  const auto& src = model.source_store();
  const auto& tgt = model.target_store();
  RowMatrix src_rows = src.matrix() * left;
  RowMatrix tgt_rows = tgt.matrix() * right;
  const std::string suffix = "-cmp-k" + std::to_string(rank);
  return {rank, EmbeddingStore(src.language_tag() + suffix, src.vocab(), std::move(src_rows)),
          EmbeddingStore(tgt.language_tag() + suffix, tgt.vocab(), std::move(tgt_rows))};
}

std::string precision_table(const EvalResult& result) {
  std::string out = "# evaluated=" + std::to_string(result.evaluated) +
                    " gold_uncovered=" + std::to_string(result.gold_uncovered) +
                    " source_uncovered=" + std::to_string(result.source_uncovered) + "\nk\tprecision\n";
  for (auto k : result.k_values) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu\t%.6f\n", k, result.precision_at_k.at(k));
    out += buf;
  }
  return out;
}

std::string rank_dump(const EvalResult& result) {
  std::string out = "source\trank\n";
  for (const auto& wr : result.per_word_ranks) {
    out += wr.source + "\t" + (wr.rank ? std::to_string(*wr.rank) : std::string("-")) + "\n";
  }
  return out;
}

}  // namespace bwe
