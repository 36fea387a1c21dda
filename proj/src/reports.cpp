#include "bwe/reports.hpp"

#include "bwe/binary_io.hpp"

namespace bwe {

using io::format_double;

std::string describe(const TrainConfig& cfg) {
  std::string out = "reg=" + to_string(cfg.regularizer) + " lambda=" + format_double(cfg.lambda) +
                    " eta0=" + format_double(cfg.eta0) + " schedule=" + to_string(cfg.schedule) +
                    " epochs=" + std::to_string(cfg.epochs) + " init=" + to_string(cfg.init);
  if (cfg.init == InitKind::scaled_gaussian) out += " init_sigma=" + format_double(cfg.init_sigma);
  out += " seed=" + std::to_string(cfg.rng_seed);
  if (cfg.early_stop_patience) out += " patience=" + std::to_string(*cfg.early_stop_patience);
  out += " candidates=" + to_string(cfg.candidates);
  return out;
}

std::string train_report_log(const TrainReport& report, const TrainConfig& cfg) {
  std::string out = "config " + describe(cfg) + "\n";
  out += "epoch=0 objective=" + format_double(report.initial_objective) + "\n";
  for (const auto& e : report.epochs) {
    out += "epoch=" + std::to_string(e.epoch) + " objective=" + format_double(e.objective) +
           " dev_p1=" + (e.dev_p1 ? format_double(*e.dev_p1) : std::string("-")) + " rank=" + std::to_string(e.rank) +
           "\n";
  }
  auto best = report.best_dev_p1();
  out += "summary epochs_run=" + std::to_string(report.epochs.size()) + " best_epoch=" +
         std::to_string(report.best_epoch) + " best_dev_p1=" + (best ? format_double(*best) : std::string("-")) +
         " final_rank=" + std::to_string(report.final_rank) + "\n";
  return out;
}

std::string grid_table(const SelectionResult& selection) {
  std::string out = "index\treg\tlambda\teta0\tschedule\tepochs\tbest_epoch\tbest_dev_p1\tfinal_rank\tselected\terror\n";
  for (std::size_t i = 0; i < selection.cells.size(); ++i) {
    const auto& cell = selection.cells[i];
    const auto& c = cell.config;
    out += std::to_string(i) + "\t" + to_string(c.regularizer) + "\t" + format_double(c.lambda) + "\t" +
           format_double(c.eta0) + "\t" + to_string(c.schedule) + "\t" + std::to_string(c.epochs) + "\t";
    if (cell.report) {
      auto best = cell.report->best_dev_p1();
      out += std::to_string(cell.report->best_epoch) + "\t" + (best ? format_double(*best) : std::string("-")) +
             "\t" + std::to_string(cell.report->final_rank);
    } else {
      out += "-\t-\t-";
    }
    out += std::string("\t") + (cell.report && i == selection.best_index ? "yes" : "no") + "\t";
    out += cell.error.empty() ? "-" : cell.error;
    out += "\n";
  }
  return out;
}

}  // namespace bwe
