#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>

#include "bwe/cli.hpp"
#include "internal.hpp"

namespace bwe::cli {

namespace detail {

namespace {
std::shared_ptr<spdlog::logger> g_logger;
}

spdlog::logger& log() {
  if (!g_logger) install_logger(std::cerr, spdlog::level::info);
  return *g_logger;
}

void install_logger(std::ostream& err, spdlog::level::level_enum level) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_st>(err, true);
  g_logger = std::make_shared<spdlog::logger>("bwe", std::move(sink));
  g_logger->set_pattern("level=%l %v");
  g_logger->set_level(level);
}

}  // namespace detail

namespace {

const std::map<std::string, Regularizer> kRegularizers{{"frobenius", Regularizer::frobenius},
                                                       {"frobenius_squared", Regularizer::frobenius_squared},
                                                       {"trace", Regularizer::trace}};
const std::map<std::string, StepSchedule> kSchedules{{"constant", StepSchedule::constant},
                                                     {"inverse_sqrt", StepSchedule::inverse_sqrt}};
const std::map<std::string, InitKind> kInits{{"zeros", InitKind::zeros},
                                             {"scaled_gaussian", InitKind::scaled_gaussian}};
const std::map<std::string, CandidatePolicy> kCandidates{{"vocabulary", CandidatePolicy::full_vocabulary},
                                                         {"dictionary", CandidatePolicy::dictionary_targets}};
const std::map<std::string, MarkupMode> kPolicies{{"none", MarkupMode::none},
                                                  {"verbatim", MarkupMode::verbatim},
                                                  {"bwe_all", MarkupMode::bwe_all},
                                                  {"bwe_cw", MarkupMode::bwe_cw}};

void add_embedding_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--src", cfg.source_embeddings, "Source-language embeddings (text or binary cache)");
  sub->add_option("--tgt", cfg.target_embeddings, "Target-language embeddings (text or binary cache)");
  sub->add_option("--src-lang", cfg.source_lang, "Source language tag (default: file stem)");
  sub->add_option("--tgt-lang", cfg.target_lang, "Target language tag (default: file stem)");
  sub->add_option("--limit-vocab", cfg.limit_vocab, "Keep only the first N vectors of each file");
  sub->add_flag("--normalize", cfg.normalize, "Scale vectors to unit length on load");
}

void add_model_options(CLI::App* sub, RunConfig& cfg) {
  add_embedding_options(sub, cfg);
  sub->add_option("--model", cfg.model, "Model file written by train");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string log_level = "info";
  std::filesystem::path config_path;

  CLI::App app{"Log-bilinear translation model between two embedding spaces", "bwe"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto* train = app.add_subcommand("train", "Fit W on a seed dictionary and select over the lambda grid");
  add_embedding_options(train, cfg);
  train->add_option("--dict", cfg.dictionary, "Seed dictionary, one pair per line");
  train->add_option("--out-dir", cfg.output_dir, "Directory for model.bin and reports");
  train->add_option("--seed", cfg.train.rng_seed, "Seed for the train/dev split and initialization");
  train->add_option("--reg", cfg.train.regularizer, "Regularizer")
      ->transform(CLI::CheckedTransformer(kRegularizers, CLI::ignore_case));
  train->add_option("--lambda", cfg.lambdas, "Regularization strengths; several values form a grid");
  train->add_option("--eta0", cfg.train.eta0, "Initial step size");
  train->add_option("--schedule", cfg.train.schedule, "Step-size schedule")
      ->transform(CLI::CheckedTransformer(kSchedules, CLI::ignore_case));
  train->add_option("--epochs", cfg.train.epochs, "Number of full-batch epochs");
  train->add_option("--patience", cfg.train.early_stop_patience, "Stop after N epochs without dev improvement");
  train->add_option("--init", cfg.train.init, "Initial W")->transform(CLI::CheckedTransformer(kInits, CLI::ignore_case));
  train->add_option("--init-sigma", cfg.train.init_sigma, "Scale of the Gaussian initialization");
  train->add_option("--train-fraction", cfg.train_fraction, "Share of dictionary pairs used for training");
  train->add_option("--candidates", cfg.train.candidates, "Softmax candidate set")
      ->transform(CLI::CheckedTransformer(kCandidates, CLI::ignore_case));

  auto* translate = app.add_subcommand("translate", "Print the top-n translations of each word");
  add_model_options(translate, cfg);
  translate->add_option("words", cfg.words, "Source words");
  translate->add_option("--words-file", cfg.words_file, "Whitespace-separated source words");
  translate->add_option("-n,--top-n", cfg.top_n, "Translations per word");
  translate->add_option("--out", cfg.output_file, "Write the lists here instead of standard output");

  auto* eval = app.add_subcommand("eval", "Precision@k on a dictionary");
  add_model_options(eval, cfg);
  eval->add_option("--dict", cfg.dictionary, "Evaluation pairs, for example dev_pairs.tsv from train");
  eval->add_option("-k,--ks", cfg.ks, "Cutoffs");
  eval->add_option("--out", cfg.output_file, "Also write the table to this file");
  eval->add_option("--ranks", cfg.report_file, "Write per-word ranks to this file");

  auto* markup = app.add_subcommand("markup", "Mark up OOV tokens of a corpus with translation options");
  add_model_options(markup, cfg);
  markup->add_option("--corpus", cfg.corpus, "Tokenized corpus, one sentence per line");
  markup->add_option("--vocab", cfg.vocab, "Decoder vocabulary, whitespace separated");
  markup->add_option("--policy", cfg.markup.mode, "Which OOVs receive model options")
      ->transform(CLI::CheckedTransformer(kPolicies, CLI::ignore_case));
  markup->add_option("--top-n", cfg.markup.top_n, "Model options per OOV");
  markup->add_flag("--verbatim-option,!--no-verbatim-option", cfg.markup.add_verbatim_option,
                   "Add the untranslated token as an extra option");
  markup->add_option("--tag", cfg.tag, "Element name of the markup");
  markup->add_option("--out", cfg.output_file, "Marked-up corpus (default: standard output)");
  markup->add_option("--report", cfg.report_file, "OOV report table");

  auto* scan = app.add_subcommand("oov-scan", "Count OOV tokens of a corpus");
  scan->add_option("--corpus", cfg.corpus, "Tokenized corpus, one sentence per line");
  scan->add_option("--vocab", cfg.vocab, "Decoder vocabulary, whitespace separated");
  scan->add_option("--out", cfg.output_file, "Write the table here instead of standard output");

  auto* exp = app.add_subcommand("export-compressed", "Write rank-k aligned embeddings for both languages");
  add_model_options(exp, cfg);
  exp->add_option("--rank", cfg.rank_k, "Rank k (default: numerical rank of W)");
  exp->add_option("--out-dir", cfg.output_dir, "Directory for the two .vec files");

  for (auto* sub : {train, translate, eval, markup, scan, exp}) {
    sub->add_option("--config", config_path, "key=value file; flags override it");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << "\n";
    return 2;
  }

  detail::install_logger(err, spdlog::level::from_str(log_level));
  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!config_path.empty()) detail::apply_config_file(app, *sub, config_path);
    if (sub == train) {
      cmd_train(cfg);
    } else if (sub == translate) {
      cmd_translate(cfg, out);
    } else if (sub == eval) {
      cmd_eval(cfg, out);
    } else if (sub == markup) {
      cmd_markup(cfg, out);
    } else if (sub == scan) {
      cmd_oov_scan(cfg, out);
    } else {
      cmd_export_compressed(cfg);
    }
  } catch (const detail::UsageError& e) {
    err << "error: " << sub->get_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << sub->get_name() << ": " << e.what() << "\n";
    return 1;
  }
  out.flush();
  return 0;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bwe::cli
