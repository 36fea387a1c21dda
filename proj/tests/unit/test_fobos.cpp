#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "bwe/errors.hpp"
#include "bwe/evaluation.hpp"
#include "bwe/fobos.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace bwe;
using bwe::testing::gaussian;
using bwe::testing::make_store;

namespace {

// Small fixed problem: 6 source words, 8 targets, 4 dims.
struct Toy {
  BilinearModel::Store src, tgt;
  SeedLexicon lexicon;
};

Toy toy() {
  std::mt19937_64 rng(99);
  Toy t;
  t.src = make_store("s", "e", gaussian(rng, 6, 4));
  t.tgt = make_store("t", "f", gaussian(rng, 8, 3));
  t.lexicon = SeedLexicon({{"e0", "f0"}, {"e1", "f1"}, {"e2", "f2"}, {"e3", "f3"}, {"e4", "f4"}, {"e5", "f5"},
                           {"e0", "f6"}});
  return t;
}

TrainConfig constant_cfg(Regularizer reg, double lambda, double eta, std::size_t epochs) {
  TrainConfig cfg;
  cfg.regularizer = reg;
  cfg.lambda = lambda;
  cfg.eta0 = eta;
  cfg.schedule = StepSchedule::constant;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("config validation and step schedule") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.lambda = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.eta0 = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);

  cfg = {};
  cfg.eta0 = 2.0;
  cfg.schedule = StepSchedule::inverse_sqrt;
  CHECK(cfg.step_size(4) == doctest::Approx(1.0));
  cfg.schedule = StepSchedule::constant;
  CHECK(cfg.step_size(4) == 2.0);
}

TEST_CASE("fobos_step with lambda = 0 is a plain gradient step") {
  auto t = toy();
  std::mt19937_64 rng(1);
  BilinearModel m(t.src, t.tgt, gaussian(rng, 4, 3));
  auto pairs = t.lexicon.train_pairs();
  for (auto reg : {Regularizer::frobenius, Regularizer::trace}) {
    auto cfg = constant_cfg(reg, 0.0, 0.1, 1);
    Eigen::MatrixXd expected = m.weights() - 0.1 * m.nll_gradient(pairs);
    CHECK((fobos_step(m, pairs, 0.1, cfg) - expected).norm() < 1e-12);
  }
}

TEST_CASE("fobos_step with a huge trace penalty collapses W") {
  auto t = toy();
  std::mt19937_64 rng(2);
  BilinearModel m(t.src, t.tgt, gaussian(rng, 4, 3));
  auto cfg = constant_cfg(Regularizer::trace, 1e6, 0.1, 1);
  CHECK(fobos_step(m, t.lexicon.train_pairs(), 0.1, cfg).isZero(0.0));
  CHECK_THROWS_AS(fobos_step(m, t.lexicon.train_pairs(), 0.0, cfg), Error);
}

TEST_CASE("one step from W = 0 matches a hand-rolled step") {
  std::mt19937_64 rng(3);
  auto src = make_store("s", "e", gaussian(rng, 2, 3));
  auto tgt = make_store("t", "f", gaussian(rng, 4, 3));
  auto m = BilinearModel::zeros(src, tgt);
  std::vector<WordPair> pairs{{"e0", "f1"}, {"e1", "f3"}};
  const double eta = 0.7, lambda = 0.2;

  // W = 0: Pr is uniform, so E[phi_t] is the mean target vector.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  for (int f = 0; f < 4; ++f) mean += *tgt->lookup("f" + std::to_string(f)) / 4.0;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(3, 3);
  for (const auto& p : pairs) grad += *src->lookup(p.source) * (mean - *tgt->lookup(p.target)).transpose();
  Eigen::MatrixXd forward = -eta * grad;

  auto trace_cfg = constant_cfg(Regularizer::trace, lambda, eta, 1);
  CHECK((fobos_step(m, pairs, eta, trace_cfg) - testing::svt_oracle(forward, eta * lambda)).norm() < 1e-12);

  auto fro_cfg = constant_cfg(Regularizer::frobenius, lambda, eta, 1);
  Eigen::MatrixXd fro = forward * std::max(0.0, 1.0 - eta * lambda / forward.norm());
  CHECK((fobos_step(m, pairs, eta, fro_cfg) - fro).norm() < 1e-12);
}

TEST_CASE("a single small step lowers the objective") {
  auto t = toy();
  auto cfg = constant_cfg(Regularizer::trace, 0.0, 1e-2, 1);
  auto result = train(t.src, t.tgt, t.lexicon, cfg);
  REQUIRE(result.report.epochs.size() == 1);
  CHECK(result.report.initial_objective == doctest::Approx(7 * std::log(8.0)));
  CHECK(result.report.objective_trace()[0] < result.report.initial_objective);
}

TEST_CASE("objective is non-increasing with lambda = 0 and a small constant step") {
  auto t = toy();
  auto result = train(t.src, t.tgt, t.lexicon, constant_cfg(Regularizer::trace, 0.0, 1e-3, 50));
  auto trace = result.report.objective_trace();
  double prev = result.report.initial_objective;
  for (double v : trace) {
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
}

TEST_CASE("full objective is non-increasing with lambda > 0") {
  auto t = toy();
  for (auto reg : {Regularizer::frobenius, Regularizer::frobenius_squared, Regularizer::trace}) {
    auto result = train(t.src, t.tgt, t.lexicon, constant_cfg(reg, 0.05, 1e-2, 60));
    double prev = result.report.initial_objective;
    for (double v : result.report.objective_trace()) {
      CHECK(v <= prev + 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("training is deterministic") {
  auto t = toy();
  auto lex = t.lexicon.split(0.7, 3);
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.init = InitKind::scaled_gaussian;
  cfg.init_sigma = 0.1;
  cfg.rng_seed = 5;
  auto a = train(t.src, t.tgt, lex, cfg), b = train(t.src, t.tgt, lex, cfg);
  CHECK(a.report.objective_trace() == b.report.objective_trace());
  CHECK(a.report.dev_p1_trace() == b.report.dev_p1_trace());
  CHECK(a.model.weights() == b.model.weights());
  cfg.rng_seed = 6;
  auto c = train(t.src, t.tgt, lex, cfg);
  CHECK(c.report.objective_trace() != a.report.objective_trace());
}

TEST_CASE("training errors") {
  auto t = toy();
  TrainConfig cfg;
  cfg.early_stop_patience = 3;
  CHECK_THROWS_AS(train(t.src, t.tgt, t.lexicon, cfg), Error);  // no dev partition

  auto diverge = constant_cfg(Regularizer::frobenius, 0.0, 1e308, 3);
  CHECK_THROWS_AS(train(t.src, t.tgt, t.lexicon, diverge), DivergenceError);
}

TEST_CASE("candidate policy restricts the softmax to dictionary targets") {
  auto t = toy();
  auto cands = candidate_set(t.lexicon, CandidatePolicy::dictionary_targets);
  CHECK(cands.size() == 7);
  CHECK(candidate_set(t.lexicon, CandidatePolicy::full_vocabulary).empty());
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.candidates = CandidatePolicy::dictionary_targets;
  auto result = train(t.src, t.tgt, t.lexicon, cfg);
  CHECK(result.model.candidate_count() == 7);
  CHECK_FALSE(result.model.candidate_index("f7"));
}

TEST_CASE("synthetic recovery, early stopping and model selection") {
  auto task = testing::make_synthetic(200, 20, 0.01, 2024);
  auto lex = task.lexicon.split(0.7, 1);

  TrainConfig cfg;
  cfg.regularizer = Regularizer::trace;
  cfg.lambda = 0.01;
  cfg.eta0 = 5.0;
  cfg.epochs = 150;
  auto result = train(task.source, task.target, lex, cfg);
  CHECK(*result.report.best_dev_p1() >= 0.95);
  auto p1 = precision_at_k(result.model, lex.dev_pairs(), std::vector<std::size_t>{1}).precision_at_k.at(1);
  CHECK(p1 == *result.report.best_dev_p1());

  cfg.early_stop_patience = 5;
  cfg.epochs = 1000;
  auto early = train(task.source, task.target, lex, cfg);
  CHECK(early.report.epochs.size() < 1000);
  CHECK(early.report.epochs.size() - early.report.best_epoch == 5);

  TrainConfig collapse = cfg;
  collapse.early_stop_patience.reset();
  collapse.epochs = 50;
  collapse.lambda = 1e6;
  TrainConfig plain = collapse;
  plain.lambda = 0.0;
  std::vector<TrainConfig> grid{collapse, plain};
  auto sel = select_model(grid, task.source, task.target, lex);
  CHECK(sel.best_index == 1);
  CHECK(sel.cells[0].report->final_rank == 0);
  CHECK(*sel.cells[0].report->best_dev_p1() < 0.05);
  REQUIRE(sel.best_model);
  CHECK(sel.best_model->weights() != Eigen::MatrixXd::Zero(20, 20));
}

TEST_CASE("select_model edge cases") {
  auto t = toy();
  auto lex = t.lexicon.split(0.7, 2);
  TrainConfig one;
  one.epochs = 3;
  std::vector<TrainConfig> grid{one};
  auto sel = select_model(grid, t.src, t.tgt, lex);
  CHECK(sel.best_index == 0);
  CHECK(sel.cells.size() == 1);

  TrainConfig bad = one;
  bad.eta0 = 1e308;
  bad.schedule = StepSchedule::constant;
  std::vector<TrainConfig> mixed{bad, one};
  auto sel2 = select_model(mixed, t.src, t.tgt, lex);
  CHECK(sel2.best_index == 1);
  CHECK_FALSE(sel2.cells[0].error.empty());

  std::vector<TrainConfig> all_bad{bad, bad};
  CHECK_THROWS_AS(select_model(all_bad, t.src, t.tgt, lex), DivergenceError);
  CHECK_THROWS_AS(select_model(std::span<const TrainConfig>(), t.src, t.tgt, lex), Error);
}
