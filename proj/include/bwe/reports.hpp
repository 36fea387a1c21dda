#pragma once

#include <span>
#include <string>

#include "bwe/fobos.hpp"

namespace bwe {

/// Line-delimited training log: one "epoch=.. objective=.. dev_p1=.. rank=.."
/// line per epoch followed by a "summary" line.
std::string train_report_log(const TrainReport& report, const TrainConfig& cfg);

/// Tab-separated grid table, one row per config.
std::string grid_table(const SelectionResult& selection);

/// Single-line key=value rendering of a config.
std::string describe(const TrainConfig& cfg);

}  // namespace bwe
