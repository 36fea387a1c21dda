#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bwe/bilinear_model.hpp"
#include "bwe/lexicon.hpp"
#include "bwe/prox.hpp"

namespace bwe {

enum class StepSchedule { constant, inverse_sqrt };
enum class InitKind { zeros, scaled_gaussian };
enum class CandidatePolicy { full_vocabulary, dictionary_targets };

struct TrainConfig {
  Regularizer regularizer = Regularizer::trace;
  double lambda = 0.01;
  double eta0 = 1.0;
  StepSchedule schedule = StepSchedule::inverse_sqrt;
  std::size_t epochs = 100;
  InitKind init = InitKind::zeros;
  double init_sigma = 0.01;
  std::uint64_t rng_seed = 1;
  std::optional<std::size_t> early_stop_patience;
  CandidatePolicy candidates = CandidatePolicy::full_vocabulary;

  /// Throws bwe::Error if lambda < 0, eta0 <= 0, epochs == 0 or sigma < 0.
  void validate() const;
  /// Step size at 1-based iteration t.
  double step_size(std::size_t t) const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double objective = 0.0;
  std::optional<double> dev_p1;  // absent when dev is empty
  std::size_t rank = 0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t final_rank = 0;
  std::size_t best_epoch = 0;  // 1-based index into `epochs`
  double initial_objective = 0.0;

  std::vector<double> objective_trace() const;
  std::vector<double> dev_p1_trace() const;
  std::optional<double> best_dev_p1() const;
};

/// L(W) = nll(pairs) + lambda * R(W).
double objective(const BilinearModel& model, std::span<const WordPair> pairs,
                 const TrainConfig& cfg);

/// One forward-backward step: W <- prox(W - eta grad nll(W), eta lambda).
/// Throws DivergenceError if the gradient is not finite.
Eigen::MatrixXd fobos_step(const BilinearModel& model, std::span<const WordPair> pairs, double eta,
                           const TrainConfig& cfg);

struct TrainResult {
  BilinearModel model;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Candidate set implied by `policy`: empty (whole vocabulary) or the
/// lexicon's target types in first-appearance order.
std::vector<std::string> candidate_set(const SeedLexicon& lexicon, CandidatePolicy policy);

/// Full-batch FOBOS on the train partition. Returns the weights from the
/// epoch with the best dev precision@1 (earliest on ties); with an empty
/// dev partition the last epoch is returned.
TrainResult train(BilinearModel::Store source, BilinearModel::Store target,
                  const SeedLexicon& lexicon, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

struct GridCell {
  TrainConfig config;
  std::optional<TrainReport> report;
  std::string error;  // non-empty when training this cell failed
};

struct SelectionResult {
  std::optional<BilinearModel> best_model;
  std::size_t best_index = 0;
  std::vector<GridCell> cells;
};

/// Trains each config; best dev P@1 wins, then lower final rank, then
/// lower grid index. Per-cell failures are recorded; if every cell fails
/// the first error is rethrown.
SelectionResult select_model(std::span<const TrainConfig> grid, BilinearModel::Store source,
                             BilinearModel::Store target, const SeedLexicon& lexicon);

std::string to_string(Regularizer r);
std::string to_string(StepSchedule s);
std::string to_string(InitKind k);
std::string to_string(CandidatePolicy p);
Regularizer parse_regularizer(const std::string& s);
StepSchedule parse_schedule(const std::string& s);
InitKind parse_init(const std::string& s);
CandidatePolicy parse_candidate_policy(const std::string& s);

}  // namespace bwe
