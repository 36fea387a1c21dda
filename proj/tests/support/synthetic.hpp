#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include <Eigen/Core>
#include <Eigen/QR>

#include "bwe/embedding_store.hpp"
#include "bwe/lexicon.hpp"

namespace bwe::testing {

/// Gaussian matrix from a seeded engine (Box-Muller on mt19937_64).
inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sigma = 1.0) {
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    m.data()[i] = sigma * std::sqrt(-2.0 * std::log(uniform())) * std::cos(2.0 * M_PI * uniform());
  }
  return m;
}

inline std::shared_ptr<const EmbeddingStore> make_store(const std::string& tag, const std::string& prefix,
                                                        const Eigen::MatrixXd& rows) {
  std::vector<std::string> tokens;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) tokens.push_back(prefix + std::to_string(i));
  return std::make_shared<const EmbeddingStore>(tag, std::move(tokens), RowMatrix(rows));
}

/// Cross-lingual recovery task: source vectors are random unit vectors,
/// target vectors are a random orthogonal transform of them plus
/// Gaussian noise, and the dictionary pairs word i with its image.
struct SyntheticTask {
  std::shared_ptr<const EmbeddingStore> source;
  std::shared_ptr<const EmbeddingStore> target;
  SeedLexicon lexicon;  // unsplit
  Eigen::MatrixXd rotation;
};

inline SyntheticTask make_synthetic(std::size_t words, Eigen::Index dim, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd src = gaussian(rng, static_cast<Eigen::Index>(words), dim);
  src.rowwise().normalize();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, dim, dim));
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd tgt = src * q.transpose() + gaussian(rng, static_cast<Eigen::Index>(words), dim, noise);

  SyntheticTask task;
  task.source = make_store("src", "s", src);
  task.target = make_store("tgt", "t", tgt);
  std::vector<WordPair> pairs;
  for (std::size_t i = 0; i < words; ++i) pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i)});
  task.lexicon = SeedLexicon(std::move(pairs));
  task.rotation = q;
  return task;
}

}  // namespace bwe::testing
