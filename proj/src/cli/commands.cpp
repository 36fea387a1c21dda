#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bwe/binary_io.hpp"
#include "bwe/cli.hpp"
#include "bwe/embedding_store.hpp"
#include "bwe/errors.hpp"
#include "bwe/evaluation.hpp"
#include "bwe/lexicon.hpp"
#include "bwe/reports.hpp"
#include "internal.hpp"

namespace bwe::cli {

using detail::log;
using io::format_double;
namespace fs = std::filesystem;

namespace {

void require_input(const fs::path& path, const char* flag) {
  if (path.empty()) throw detail::UsageError(std::string(flag) + " is required");
  if (!fs::exists(path)) throw Error(std::string(flag) + ": no such file: " + path.string());
}

void require_output(const fs::path& path, const char* flag) {
  if (path.empty()) throw detail::UsageError(std::string(flag) + " is required");
}

BilinearModel::Store load_store(const fs::path& path, const RunConfig& cfg, const std::string& lang,
                                const char* side) {
  LoadOptions opts;
  opts.limit = cfg.limit_vocab;
  opts.normalize = cfg.normalize;
  opts.language_tag = lang;
  auto loaded = load_embeddings(path, opts);
  log().info("event=embeddings_loaded side={} path={} lang={} size={} dim={} duplicates_dropped={}", side,
             path.string(), loaded.store.language_tag(), loaded.store.size(), loaded.store.dimension(),
             loaded.duplicates_dropped);
  return std::make_shared<const EmbeddingStore>(std::move(loaded.store));
}

struct Stores {
  BilinearModel::Store source;
  BilinearModel::Store target;
};

Stores load_stores(const RunConfig& cfg) {
  require_input(cfg.source_embeddings, "--src");
  require_input(cfg.target_embeddings, "--tgt");
  return {load_store(cfg.source_embeddings, cfg, cfg.source_lang, "source"),
          load_store(cfg.target_embeddings, cfg, cfg.target_lang, "target")};
}

BilinearModel load_trained(const RunConfig& cfg) {
  require_input(cfg.model, "--model");
  auto stores = load_stores(cfg);
  auto model = load_model(cfg.model, stores.source, stores.target);
  log().info("event=model_loaded path={} candidates={}", cfg.model.string(), model.candidate_count());
  return model;
}

SeedLexicon load_dictionary(const RunConfig& cfg, const Stores& stores) {
  require_input(cfg.dictionary, "--dict");
  auto loaded = load_lexicon(cfg.dictionary, *stores.source, *stores.target);
  const auto& r = loaded.report;
  log().info("event=dictionary_loaded path={} lines={} kept={} dropped_uncovered={} duplicates={} multiword={}",
             cfg.dictionary.string(), r.lines, r.kept, r.dropped_uncovered, r.duplicates, r.multiword);
  return loaded.lexicon;
}

void emit(const std::string& text, const fs::path& file, std::ostream& out) {
  if (file.empty()) {
    out << text;
  } else {
    io::write_file_atomic(file, text);
  }
}

}  // namespace

void cmd_train(const RunConfig& cfg) {
  require_output(cfg.output_dir, "--out-dir");
  if (cfg.lambdas.empty()) throw detail::UsageError("--lambda needs at least one value");
  require_input(cfg.dictionary, "--dict");

  Stores stores = load_stores(cfg);
  SeedLexicon lexicon = load_dictionary(cfg, stores).split(cfg.train_fraction, cfg.train.rng_seed);
  log().info("event=split train={} dev={} seed={}", lexicon.train_indices().size(), lexicon.dev_indices().size(),
             cfg.train.rng_seed);

  std::vector<TrainConfig> grid;
  for (double lambda : cfg.lambdas) {
    TrainConfig c = cfg.train;
    c.lambda = lambda;
    c.validate();
    grid.push_back(c);
  }

  auto selection = select_model(grid, stores.source, stores.target, lexicon);
  for (std::size_t i = 0; i < selection.cells.size(); ++i) {
    const auto& cell = selection.cells[i];
    if (!cell.report) {
      log().warn("event=grid_cell index={} lambda={} error=\"{}\"", i, format_double(cell.config.lambda), cell.error);
      continue;
    }
    auto p1 = cell.report->best_dev_p1();
    log().info("event=grid_cell index={} lambda={} epochs_run={} best_dev_p1={} final_rank={}", i,
               format_double(cell.config.lambda), cell.report->epochs.size(), p1 ? format_double(*p1) : "-",
               cell.report->final_rank);
  }

  const auto& best = selection.cells.at(selection.best_index);
  const fs::path& dir = cfg.output_dir;
  save_model(*selection.best_model, dir / "model.bin");
  io::write_file_atomic(dir / "train_report.log", train_report_log(*best.report, best.config));
  io::write_file_atomic(dir / "grid.tsv", grid_table(selection));
  io::write_file_atomic(dir / "train_pairs.tsv", to_text(lexicon.train_pairs()));
  io::write_file_atomic(dir / "dev_pairs.tsv", to_text(lexicon.dev_pairs()));
  log().info("event=train_done out_dir={} selected={} lambda={}", dir.string(), selection.best_index,
             format_double(best.config.lambda));
}

void cmd_translate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.top_n == 0) throw detail::UsageError("--top-n must be positive");
  std::vector<std::string> words = cfg.words;
  if (!cfg.words_file.empty()) {
    require_input(cfg.words_file, "--words-file");
    std::istringstream in(io::read_file(cfg.words_file));
    std::string w;
    while (in >> w) words.push_back(w);
  }
  if (words.empty()) throw detail::UsageError("no words to translate");

  auto model = load_trained(cfg);
  std::ostringstream text;
  for (const auto& word : words) {
    text << "# " << word << '\n';
    if (!model.source_store().contains(word)) {
      log().warn("event=oov_in_embeddings word={}", word);
      text << "OOV-in-embeddings\n";
      continue;
    }
    auto dist = model.top_n(word, cfg.top_n);
    for (std::size_t i = 0; i < dist.entries.size(); ++i) {
      text << i + 1 << ' ' << dist.entries[i].target << ' ' << format_double(dist.entries[i].probability) << '\n';
    }
  }
  emit(text.str(), cfg.output_file, out);
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  if (cfg.ks.empty()) throw detail::UsageError("-k needs at least one value");
  auto model = load_trained(cfg);
  Stores stores{model.source_ptr(), model.target_ptr()};
  auto lexicon = load_dictionary(cfg, stores);

  auto result = precision_at_k(model, lexicon.pairs(), cfg.ks);
  for (auto k : result.k_values) {
    log().info("event=precision k={} value={} evaluated={}", k, format_double(result.precision_at_k.at(k)),
               result.evaluated);
  }
  const std::string table = precision_table(result);
  out << table;
  if (!cfg.output_file.empty()) io::write_file_atomic(cfg.output_file, table);
  if (!cfg.report_file.empty()) io::write_file_atomic(cfg.report_file, rank_dump(result));
}

void cmd_markup(const RunConfig& cfg, std::ostream& out) {
  require_input(cfg.corpus, "--corpus");
  require_input(cfg.vocab, "--vocab");
  if (cfg.markup.top_n == 0) throw detail::UsageError("--top-n must be positive");
  auto corpus = load_corpus(cfg.corpus);
  auto vocab = load_system_vocabulary(cfg.vocab);

  std::optional<BilinearModel> model;
  const bool needs_model = cfg.markup.mode == MarkupMode::bwe_all || cfg.markup.mode == MarkupMode::bwe_cw;
  if (needs_model) model.emplace(load_trained(cfg));

  auto result = markup_corpus(corpus, vocab, model ? &*model : nullptr, cfg.markup, cfg.tag);
  std::string text;
  for (const auto& line : result.lines) {
    text += line;
    text += '\n';
  }
  emit(text, cfg.output_file, out);

  const auto& r = result.scan.report;
  log().info("event=markup policy={} sentences={} tokens={} oov_all={} oov_cw={} marked={} embedding_fallbacks={}",
             to_string(cfg.markup.mode), r.sentences, r.tokens, r.oov_all, r.oov_cw, result.marked_tokens,
             result.embedding_fallbacks);
  if (!cfg.report_file.empty()) {
    io::write_file_atomic(cfg.report_file, oov_report_table(r, result.embedding_fallbacks));
  }
}

void cmd_oov_scan(const RunConfig& cfg, std::ostream& out) {
  require_input(cfg.corpus, "--corpus");
  require_input(cfg.vocab, "--vocab");
  auto scan = scan_oov(load_corpus(cfg.corpus), load_system_vocabulary(cfg.vocab));
  emit(oov_report_table(scan.report), cfg.output_file, out);
}

void cmd_export_compressed(const RunConfig& cfg) {
  require_output(cfg.output_dir, "--out-dir");
  auto model = load_trained(cfg);
  auto compressed = compress(model, cfg.rank_k);
  for (const auto* store : {&compressed.source, &compressed.target}) {
    const fs::path path = cfg.output_dir / (store->language_tag() + ".vec");
    save_text(*store, path);
    log().info("event=exported path={} size={} rank={}", path.string(), store->size(), compressed.rank_k);
  }
}

}  // namespace bwe::cli
