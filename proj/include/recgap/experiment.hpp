#ifndef RECGAP_EXPERIMENT_HPP_
#define RECGAP_EXPERIMENT_HPP_

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "recgap/offline_metrics.hpp"
#include "recgap/online_metrics.hpp"
#include "recgap/simulator.hpp"

namespace recgap {

struct ExperimentGrid {
  std::vector<int> k_values;
  std::vector<double> beta_values;
  std::vector<Validation> val_values{Validation::Loo, Validation::Lloo};
  ColdStart cold_start = ColdStart::IncludeWithFallback;

  /// k in {1..10, 15, 20, 25, 50}; beta in {0.00, 0.05, ..., 1.00}.
  static ExperimentGrid standard();
  void validate() const;
};

/// Everything one dataset contributes: the evaluation log, its L trained
/// models, and the served recommendations with the clicks that followed.
struct DatasetInput {
  std::string tag;
  std::vector<std::string> model_tags;
  std::shared_ptr<const InteractionLog> eval_log;
  std::vector<std::shared_ptr<const RecModel>> models;
  std::vector<RecommendationEvent> recommendations;  // event.model indexes models
  std::shared_ptr<const InteractionLog> clicks;
  Timestamp ctr_window = kDefaultCtrWindow;
};

/// A simulated dataset: world, candidates and live protocol.
struct SimulatedDataset {
  std::string tag;
  WorldConfig world;
  std::vector<Candidate> candidates;
  LiveConfig live;
  Timestamp ctr_window = kDefaultCtrWindow;
};

struct DatasetResult {
  std::string tag;
  std::vector<std::string> model_tags;
  /// recall[v][b][q][m] for grid.val_values[v], beta_values[b], k_values[q],
  /// model m: the offline vectors E.
  std::vector<std::vector<std::vector<std::vector<double>>>> recall;
  /// Online vector S.
  std::vector<double> ictr;
  std::vector<std::size_t> events;
  std::vector<std::size_t> hits;
};

struct GridResults {
  ExperimentGrid grid;
  std::vector<DatasetResult> datasets;

  std::size_t num_models() const;
};

DatasetResult evaluate_dataset(const ExperimentGrid& grid, const DatasetInput& input,
                               unsigned threads = 1);

/// Simulates the history and live phase for a dataset, then evaluates it.
DatasetInput simulate_dataset(const SimulatedDataset& dataset, unsigned threads = 1);

GridResults run_grid(const ExperimentGrid& grid, std::span<const DatasetInput> datasets,
                     unsigned threads = 1);
GridResults run_grid(const ExperimentGrid& grid, std::span<const SimulatedDataset> datasets,
                     unsigned threads = 1);

struct CellRecord {
  std::size_t dataset;
  int k;
  std::size_t offline_best;
  std::size_t online_best;
  bool offline_tie;
  bool online_tie;
  bool match;
};

struct MsrEntry {
  Validation val;
  double beta;
  std::size_t n_cells = 0;
  std::size_t n_matches = 0;
  double msr = 0.0;
  std::vector<CellRecord> cells;
};

struct MsrReport {
  std::vector<MsrEntry> entries;  // val-major, then beta in grid order

  nlohmann::json to_json(const GridResults& results) const;
};

/**
 * Model Selection Recall for one (val, beta): over every (dataset, k) cell,
 * the fraction where the lowest-index offline argmax equals the lowest-index
 * online argmax. Ties are recorded per cell. Throws MissingCell.
 */
MsrEntry compute_msr(const GridResults& results, Validation val, double beta);

MsrReport build_report(const GridResults& results);

struct BestConfig {
  Validation val;
  double beta;
  double msr;
  bool tie;  // another entry had the same msr
};

/// argmax msr; ties go to the smaller beta, then LOO before LLOO.
BestConfig best_config(const MsrReport& report);

/// dataset,val,beta,k,model,recall,ictr
void write_results_csv(std::ostream& out, const GridResults& results);
GridResults read_results_csv(std::istream& in);

/// beta,msr_loo,msr_lloo
void write_plot_csv(std::ostream& out, const MsrReport& report);

}  // namespace recgap

#endif  // RECGAP_EXPERIMENT_HPP_
