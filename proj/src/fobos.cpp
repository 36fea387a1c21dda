#include "bwe/fobos.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <unordered_set>

#include "bwe/errors.hpp"
#include "bwe/evaluation.hpp"

namespace bwe {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be a finite non-negative number");
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) throw Error("eta0 must be positive");
  if (epochs == 0) throw Error("epochs must be at least 1");
  if (!(init_sigma >= 0.0)) throw Error("init sigma must be non-negative");
  if (early_stop_patience && *early_stop_patience == 0) throw Error("early-stop patience must be at least 1");
}

double TrainConfig::step_size(std::size_t t) const {
  if (schedule == StepSchedule::constant) return eta0;
  return eta0 / std::sqrt(static_cast<double>(std::max<std::size_t>(t, 1)));
}

std::vector<double> TrainReport::objective_trace() const {
  std::vector<double> out;
  for (const auto& e : epochs) out.push_back(e.objective);
  return out;
}

std::vector<double> TrainReport::dev_p1_trace() const {
  std::vector<double> out;
  for (const auto& e : epochs) {
    if (e.dev_p1) out.push_back(*e.dev_p1);
  }
  return out;
}

std::optional<double> TrainReport::best_dev_p1() const {
  if (best_epoch == 0 || best_epoch > epochs.size()) return std::nullopt;
  return epochs[best_epoch - 1].dev_p1;
}

double objective(const BilinearModel& model, std::span<const WordPair> pairs, const TrainConfig& cfg) {
  double value = model.nll(pairs);
  if (cfg.lambda > 0.0) value += cfg.lambda * regularizer_value(cfg.regularizer, model.weights());
  return value;
}

Eigen::MatrixXd fobos_step(const BilinearModel& model, std::span<const WordPair> pairs, double eta,
                           const TrainConfig& cfg) {
  if (!(eta > 0.0)) throw Error("fobos step: eta must be positive");
  Eigen::MatrixXd grad = model.nll_gradient(pairs);
  if (!grad.allFinite()) throw DivergenceError("non-finite gradient; lower eta0");
  Eigen::MatrixXd forward = model.weights() - eta * grad;
  if (!forward.allFinite()) throw DivergenceError("gradient step overflowed; lower eta0");
  return prox(cfg.regularizer, forward, eta * cfg.lambda);
}

std::vector<std::string> candidate_set(const SeedLexicon& lexicon, CandidatePolicy policy) {
  if (policy == CandidatePolicy::full_vocabulary) return {};
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : lexicon.pairs()) {
    if (seen.insert(p.target).second) out.push_back(p.target);
  }
  return out;
}

namespace {

Eigen::MatrixXd initial_weights(const TrainConfig& cfg, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(rows, cols);
  if (cfg.init == InitKind::zeros || cfg.init_sigma == 0.0) return w;
  // Box-Muller over mt19937_64 keeps the draw identical across standard libraries.
  std::mt19937_64 rng(cfg.rng_seed);
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double u1 = uniform(), u2 = uniform();
    w.data()[i] = cfg.init_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return w;
}

}  // namespace

TrainResult train(BilinearModel::Store source, BilinearModel::Store target, const SeedLexicon& lexicon,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const auto train_pairs = lexicon.train_pairs();
  const auto dev_pairs = lexicon.dev_pairs();
  if (train_pairs.empty()) throw Error("train partition is empty");
  if (cfg.early_stop_patience && dev_pairs.empty()) throw Error("early stopping requires a non-empty dev partition");

  BilinearModel model = BilinearModel::zeros(source, target, candidate_set(lexicon, cfg.candidates));
  model.set_weights(initial_weights(cfg, model.weights().rows(), model.weights().cols()));

  TrainReport report;
  report.initial_objective = objective(model, train_pairs, cfg);
  const std::size_t one = 1;
  Eigen::MatrixXd best_weights = model.weights();
  double best_p1 = -1.0;

  for (std::size_t t = 1; t <= cfg.epochs; ++t) {
    model.set_weights(fobos_step(model, train_pairs, cfg.step_size(t), cfg));

    EpochRecord rec;
    rec.epoch = t;
    rec.objective = objective(model, train_pairs, cfg);
    if (!std::isfinite(rec.objective)) {
      throw DivergenceError("objective became non-finite at epoch " + std::to_string(t));
    }
    rec.rank = numerical_rank(model.weights());
    if (!dev_pairs.empty()) {
      auto eval = precision_at_k(model, dev_pairs, std::span<const std::size_t>(&one, 1));
      rec.dev_p1 = eval.precision_at_k.at(1);
    }
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool improved = !rec.dev_p1 || *rec.dev_p1 > best_p1;
    if (improved) {
      best_p1 = rec.dev_p1.value_or(best_p1);
      report.best_epoch = t;
      best_weights = model.weights();
    } else if (cfg.early_stop_patience && t - report.best_epoch >= *cfg.early_stop_patience) {
      break;
    }
  }

  model.set_weights(std::move(best_weights));
  report.final_rank = report.epochs[report.best_epoch - 1].rank;
  return {std::move(model), std::move(report)};
}

SelectionResult select_model(std::span<const TrainConfig> grid, BilinearModel::Store source,
                             BilinearModel::Store target, const SeedLexicon& lexicon) {
  if (grid.empty()) throw Error("model selection grid is empty");
  SelectionResult out;
  std::exception_ptr first_error;
  std::optional<std::size_t> best;

  auto better = [&](const TrainReport& a, const TrainReport& b) {
    const double pa = a.best_dev_p1().value_or(-1.0), pb = b.best_dev_p1().value_or(-1.0);
    if (pa != pb) return pa > pb;
    return a.final_rank < b.final_rank;  // equal rank keeps the earlier cell
  };

  for (std::size_t i = 0; i < grid.size(); ++i) {
    GridCell cell{grid[i], std::nullopt, {}};
    try {
      auto result = train(source, target, lexicon, grid[i]);
      cell.report = std::move(result.report);
      if (!best || better(*cell.report, *out.cells[*best].report)) {
        best = i;
        out.best_model.emplace(std::move(result.model));
      }
    } catch (const Error& e) {
      if (!first_error) first_error = std::current_exception();
      cell.error = e.what();
    }
    out.cells.push_back(std::move(cell));
  }
  if (!best) std::rethrow_exception(first_error);
  out.best_index = *best;
  return out;
}

std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::frobenius:
      return "frobenius";
    case Regularizer::frobenius_squared:
      return "frobenius_squared";
    case Regularizer::trace:
      return "trace";
  }
  return "?";
}

std::string to_string(StepSchedule s) { return s == StepSchedule::constant ? "constant" : "inverse_sqrt"; }
std::string to_string(InitKind k) { return k == InitKind::zeros ? "zeros" : "scaled_gaussian"; }
std::string to_string(CandidatePolicy p) {
  return p == CandidatePolicy::full_vocabulary ? "vocabulary" : "dictionary";
}

Regularizer parse_regularizer(const std::string& s) {
  if (s == "frobenius" || s == "l2") return Regularizer::frobenius;
  if (s == "frobenius_squared" || s == "l2sq") return Regularizer::frobenius_squared;
  if (s == "trace" || s == "nuclear") return Regularizer::trace;
  throw Error("unknown regularizer '" + s + "'");
}

StepSchedule parse_schedule(const std::string& s) {
  if (s == "constant") return StepSchedule::constant;
  if (s == "inverse_sqrt") return StepSchedule::inverse_sqrt;
  throw Error("unknown step schedule '" + s + "'");
}

InitKind parse_init(const std::string& s) {
  if (s == "zeros") return InitKind::zeros;
  if (s == "scaled_gaussian" || s == "gaussian") return InitKind::scaled_gaussian;
  throw Error("unknown init '" + s + "'");
}

CandidatePolicy parse_candidate_policy(const std::string& s) {
  if (s == "vocabulary") return CandidatePolicy::full_vocabulary;
  if (s == "dictionary") return CandidatePolicy::dictionary_targets;
  throw Error("unknown candidate policy '" + s + "'");
}

}  // namespace bwe
