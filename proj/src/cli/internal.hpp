#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <CLI11.hpp>
#include <spdlog/logger.h>

#include "bwe/errors.hpp"

namespace bwe::cli::detail {

/// Bad or missing arguments; run() maps it to exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Logger writing "level=... key=value" lines to the stream given to run().
spdlog::logger& log();
void install_logger(std::ostream& err, spdlog::level::level_enum level);

/// Fills options of `sub` that were not given on the command line from a
/// key=value file. Keys are long option names without dashes; a `[name]`
/// section limits keys to one subcommand. Keys that belong to another
/// subcommand are ignored, unknown keys are an error.
void apply_config_file(CLI::App& root, CLI::App& sub, const std::filesystem::path& file);

}  // namespace bwe::cli::detail
