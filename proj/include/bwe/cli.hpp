#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bwe/fobos.hpp"
#include "bwe/smt_bridge.hpp"

namespace bwe::cli {

/// Everything a subcommand may read. Each subcommand binds only the fields it uses.
struct RunConfig {
  std::filesystem::path source_embeddings;
  std::filesystem::path target_embeddings;
  std::filesystem::path dictionary;
  std::filesystem::path corpus;
  std::filesystem::path vocab;
  std::filesystem::path model;
  std::filesystem::path output_dir;
  /// Single-file outputs; empty means standard output (or no file).
  std::filesystem::path output_file;
  std::filesystem::path report_file;

  std::string source_lang;  // default: file stem
  std::string target_lang;
  std::optional<std::size_t> limit_vocab;
  bool normalize = false;

  TrainConfig train;
  std::vector<double> lambdas{0.01};
  double train_fraction = 0.7;

  MarkupPolicy markup;
  std::string tag = "oov";

  std::vector<std::string> words;
  std::filesystem::path words_file;
  std::size_t top_n = 10;
  std::vector<std::size_t> ks{1, 5, 10};
  std::optional<std::size_t> rank_k;
};

/// Each command throws bwe::Error on failure. Data goes to `out` or files.
void cmd_train(const RunConfig& cfg);
void cmd_translate(const RunConfig& cfg, std::ostream& out);
void cmd_eval(const RunConfig& cfg, std::ostream& out);
void cmd_markup(const RunConfig& cfg, std::ostream& out);
void cmd_oov_scan(const RunConfig& cfg, std::ostream& out);
void cmd_export_compressed(const RunConfig& cfg);

/// Full command line without the program name. Returns the exit status:
/// 0 on success, 1 on a runtime error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace bwe::cli
