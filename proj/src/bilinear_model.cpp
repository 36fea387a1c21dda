#include "bwe/bilinear_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bwe/binary_io.hpp"
#include "bwe/errors.hpp"

namespace bwe {

namespace {

// Source rows per block when evaluating the softmax for many pairs; bounds
// the size of the block x |C| score matrix.
constexpr std::size_t kSourceBlock = 256;

struct ResolvedPairs {
  std::vector<std::size_t> source_rows;                   // unique source rows
  std::vector<std::vector<std::size_t>> gold_candidates;  // per unique source
};

}  // namespace

BilinearModel::BilinearModel(Store source, Store target, Eigen::MatrixXd weights, std::vector<std::string> candidates)
    : source_(std::move(source)), target_(std::move(target)) {
  if (!source_ || !target_) throw Error("bilinear model: null embedding store");
  if (candidates.empty()) candidates = target_->vocab();
  if (candidates.empty()) throw Error("bilinear model: empty candidate set");
  candidate_tokens_ = std::move(candidates);
  candidates_.resize(static_cast<Eigen::Index>(candidate_tokens_.size()),
                     static_cast<Eigen::Index>(target_->dimension()));
  candidate_index_.reserve(candidate_tokens_.size());
  for (std::size_t i = 0; i < candidate_tokens_.size(); ++i) {
    const auto& tok = candidate_tokens_[i];
    auto row = target_->index_of(tok);
    if (!row) throw UnknownTokenError(tok, "target vocabulary (candidate set)");
    if (!candidate_index_.emplace(tok, i).second) {
      throw Error("bilinear model: duplicate candidate '" + tok + "'");
    }
    candidates_.row(static_cast<Eigen::Index>(i)) = target_->row(*row);
  }
  set_weights(std::move(weights));
}

BilinearModel BilinearModel::zeros(Store source, Store target, std::vector<std::string> candidates) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(source->dimension()),
                                            static_cast<Eigen::Index>(target->dimension()));
  return BilinearModel(std::move(source), std::move(target), std::move(w), std::move(candidates));
}

void BilinearModel::set_weights(Eigen::MatrixXd weights) {
  if (static_cast<std::size_t>(weights.rows()) != source_->dimension() ||
      static_cast<std::size_t>(weights.cols()) != target_->dimension()) {
    throw Error("bilinear model: W is " + std::to_string(weights.rows()) + "x" + std::to_string(weights.cols()) +
                ", stores need " + std::to_string(source_->dimension()) + "x" +
                std::to_string(target_->dimension()));
  }
  if (!weights.allFinite()) throw Error("bilinear model: W has non-finite entries");
  weights_ = std::move(weights);
}

std::optional<std::size_t> BilinearModel::candidate_index(std::string_view target) const {
  auto it = candidate_index_.find(std::string(target));
  if (it == candidate_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t BilinearModel::source_row(std::string_view source) const {
  auto row = source_->index_of(source);
  if (!row) throw UnknownTokenError(std::string(source), "source embeddings");
  return *row;
}

std::size_t BilinearModel::candidate_or_throw(std::string_view target) const {
  auto idx = candidate_index(target);
  if (!idx) {
    if (!target_->contains(target)) throw UnknownTokenError(std::string(target), "target embeddings");
    throw UnknownTokenError(std::string(target), "candidate set");
  }
  return *idx;
}

double BilinearModel::score(std::string_view source, std::string_view target) const {
  auto t = target_->index_of(target);
  if (!t) throw UnknownTokenError(std::string(target), "target embeddings");
  auto s = source_row(source);
  return source_->row(s).dot(weights_ * target_->row(*t).transpose());
}

Eigen::VectorXd BilinearModel::candidate_scores(const Eigen::Ref<const Eigen::VectorXd>& source_vector) const {
  // (phi_s^T W) once, then one matrix-vector product over all candidates
  Eigen::VectorXd projected = weights_.transpose() * source_vector;
  return candidates_ * projected;
}

Eigen::VectorXd BilinearModel::candidate_scores(std::string_view source) const {
  auto s = source_row(source);
  return candidate_scores(source_->row(s).transpose());
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& scores) {
  const double m = scores.maxCoeff();
  return m + std::log((scores.array() - m).exp().sum());
}

std::vector<std::size_t> ranked_candidates(const Eigen::VectorXd& scores, const std::vector<std::string>& tokens) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto sa = scores[static_cast<Eigen::Index>(a)], sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return tokens[a] < tokens[b];
  });
  return order;
}

TranslationDistribution BilinearModel::distribution(std::string_view source) const {
  return top_n(source, candidate_count());
}

TranslationDistribution BilinearModel::top_n(std::string_view source, std::size_t n) const {
  if (n == 0) throw Error("top_n: n must be positive");
  Eigen::VectorXd scores = candidate_scores(source);
  const double lse = log_sum_exp(scores);
  n = std::min(n, candidate_count());

  std::vector<std::size_t> order(candidate_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto before = [&](std::size_t a, std::size_t b) {
    auto sa = scores[static_cast<Eigen::Index>(a)], sb = scores[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return candidate_tokens_[a] < candidate_tokens_[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), before);

  TranslationDistribution out;
  out.source_token = std::string(source);
  out.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto c = order[i];
    out.entries.push_back({candidate_tokens_[c], std::exp(scores[static_cast<Eigen::Index>(c)] - lse)});
  }
  return out;
}

std::size_t BilinearModel::rank_of(std::string_view source, std::string_view target) const {
  auto c = candidate_or_throw(target);
  Eigen::VectorXd scores = candidate_scores(source);
  const double sc = scores[static_cast<Eigen::Index>(c)];
  const auto& tok = candidate_tokens_[c];
  std::size_t rank = 1;
  for (std::size_t i = 0; i < candidate_count(); ++i) {
    auto si = scores[static_cast<Eigen::Index>(i)];
    if (si > sc || (si == sc && candidate_tokens_[i] < tok)) ++rank;
  }
  return rank;
}

double BilinearModel::nll(std::span<const WordPair> pairs) const { return evaluate(pairs, false).first; }

Eigen::MatrixXd BilinearModel::nll_gradient(std::span<const WordPair> pairs) const {
  return nll_and_gradient(pairs).second;
}

std::pair<double, Eigen::MatrixXd> BilinearModel::nll_and_gradient(std::span<const WordPair> pairs) const {
  return evaluate(pairs, true);
}

std::pair<double, Eigen::MatrixXd> BilinearModel::evaluate(std::span<const WordPair> pairs, bool with_gradient) const {
  // Group pairs by source so each source's softmax is evaluated once:
  //   grad = sum_e phi_s(e) (m_e E_e[phi_t] - sum_{gold f} phi_t(f))^T
  ResolvedPairs resolved;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (const auto& p : pairs) {
    auto row = source_row(p.source);
    auto c = candidate_or_throw(p.target);
    auto [it, fresh] = slot.emplace(row, resolved.source_rows.size());
    if (fresh) {
      resolved.source_rows.push_back(row);
      resolved.gold_candidates.emplace_back();
    }
    resolved.gold_candidates[it->second].push_back(c);
  }

  const auto ns = static_cast<Eigen::Index>(source_->dimension());
  const auto nt = static_cast<Eigen::Index>(target_->dimension());
  Eigen::MatrixXd grad = with_gradient ? Eigen::MatrixXd::Zero(ns, nt) : Eigen::MatrixXd();
  double nll = 0.0;

  const std::size_t m = resolved.source_rows.size();
  for (std::size_t begin = 0; begin < m; begin += kSourceBlock) {
    const std::size_t end = std::min(m, begin + kSourceBlock);
    const auto rows = static_cast<Eigen::Index>(end - begin);
    Eigen::MatrixXd phi(rows, ns);
    for (std::size_t i = begin; i < end; ++i) {
      phi.row(static_cast<Eigen::Index>(i - begin)) = source_->row(resolved.source_rows[i]);
    }
    // rows x |C| scores, turned into probabilities in place
    Eigen::MatrixXd prob = (phi * weights_) * candidates_.transpose();
    Eigen::MatrixXd residual(with_gradient ? rows : 0, nt);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto& gold = resolved.gold_candidates[begin + static_cast<std::size_t>(r)];
      const double lse = log_sum_exp(prob.row(r).transpose());
      for (auto c : gold) nll += lse - prob(r, static_cast<Eigen::Index>(c));
      if (!with_gradient) continue;
      prob.row(r) = (prob.row(r).array() - lse).exp().matrix();
      Eigen::RowVectorXd gold_sum = Eigen::RowVectorXd::Zero(nt);
      for (auto c : gold) gold_sum += candidates_.row(static_cast<Eigen::Index>(c));
      residual.row(r) = static_cast<double>(gold.size()) * (prob.row(r) * candidates_) - gold_sum;
    }
    if (with_gradient) grad.noalias() += phi.transpose() * residual;
  }
  return {nll, std::move(grad)};
}

std::string model_to_bytes(const BilinearModel& model) {
  io::ByteWriter w;
  w.bytes(kModelMagic);
  w.u8(kModelVersion);
  const auto& W = model.weights();
  w.u32(static_cast<std::uint32_t>(W.rows()));
  w.u32(static_cast<std::uint32_t>(W.cols()));
  w.u32(static_cast<std::uint32_t>(model.candidate_count()));
  for (const auto& t : model.candidate_tokens()) w.str(t);
  for (Eigen::Index r = 0; r < W.rows(); ++r) {
    for (Eigen::Index c = 0; c < W.cols(); ++c) w.f64(W(r, c));
  }
  return w.data();
}

void save_model(const BilinearModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, model_to_bytes(model));
}

BilinearModel model_from_bytes(std::string_view bytes, BilinearModel::Store source, BilinearModel::Store target,
                               const std::string& source_name) {
  io::ByteReader in(bytes, source_name);
  if (in.bytes(kModelMagic.size()) != kModelMagic) throw FormatError(source_name + ": not a model file");
  auto version = in.u8();
  if (version != kModelVersion) {
    throw FormatError(source_name + ": unsupported model version " + std::to_string(version));
  }
  auto rows = in.u32();
  auto cols = in.u32();
  auto count = in.u32();
  if (count == 0) throw FormatError(source_name + ": empty candidate set");
  if (rows != source->dimension() || cols != target->dimension()) {
    throw FormatError(source_name + ": model is " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " but embeddings have dimensions " + std::to_string(source->dimension()) + " and " +
                      std::to_string(target->dimension()));
  }
  std::vector<std::string> candidates;
  candidates.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) candidates.push_back(in.str());
  Eigen::MatrixXd W(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) W(r, c) = in.f64();
  }
  if (!in.at_end()) throw FormatError(source_name + ": trailing bytes after W");
  return BilinearModel(std::move(source), std::move(target), std::move(W), std::move(candidates));
}

BilinearModel load_model(const std::filesystem::path& path, BilinearModel::Store source,
                         BilinearModel::Store target) {
  return model_from_bytes(io::read_file(path), std::move(source), std::move(target), path.string());
}

}  // namespace bwe
