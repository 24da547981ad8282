#include "recgap/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "recgap/io.hpp"
#include "recgap/parallel.hpp"

namespace recgap {

using nlohmann::json;

ExperimentGrid ExperimentGrid::standard() {
  ExperimentGrid g;
  g.k_values = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25, 50};
  for (int j = 0; j <= 20; ++j) g.beta_values.push_back(0.05 * j);
  return g;
}

void ExperimentGrid::validate() const {
  if (k_values.empty() || beta_values.empty() || val_values.empty()) {
    throw ConfigError("experiment grid has an empty axis");
  }
  for (int k : k_values) {
    if (k < 1) throw ConfigError("k values must be >= 1");
  }
  for (double b : beta_values) {
    if (!(b >= 0.0)) throw ConfigError("beta values must be >= 0");
  }
}

std::size_t GridResults::num_models() const {
  return datasets.empty() ? 0 : datasets.front().model_tags.size();
}

DatasetResult evaluate_dataset(const ExperimentGrid& grid, const DatasetInput& input,
                               unsigned threads) {
  grid.validate();
  const std::size_t n_models = input.models.size();
  if (n_models == 0) throw PreconditionError("dataset " + input.tag + " has no models");
  if (!input.eval_log || !input.clicks) throw PreconditionError("dataset without logs");

  DatasetResult result;
  result.tag = input.tag;
  result.model_tags = input.model_tags;
  result.model_tags.resize(n_models);
  const PopularityTable pop = compute_popularity(*input.eval_log);
  const std::size_t max_k =
      static_cast<std::size_t>(*std::max_element(grid.k_values.begin(), grid.k_values.end()));

  // One task per (val, model); each fills its own slot.
  const std::size_t n_vals = grid.val_values.size();
  std::vector<std::vector<std::vector<double>>> slots(n_vals * n_models);
  parallel_for(n_vals * n_models, threads, [&](std::size_t task) {
    const std::size_t v = task / n_models;
    const std::size_t m = task % n_models;
    const auto ranks =
        compute_held_out_ranks(*input.eval_log, *input.models[m], grid.val_values[v], max_k);
    slots[task] =
        aggregate_recall_grid(ranks, pop, grid.beta_values, grid.k_values, grid.cold_start);
  });

  result.recall.assign(
      n_vals, std::vector<std::vector<std::vector<double>>>(
                  grid.beta_values.size(),
                  std::vector<std::vector<double>>(grid.k_values.size(),
                                                   std::vector<double>(n_models, 0.0))));
  for (std::size_t v = 0; v < n_vals; ++v) {
    for (std::size_t m = 0; m < n_models; ++m) {
      const auto& s = slots[v * n_models + m];
      for (std::size_t b = 0; b < grid.beta_values.size(); ++b) {
        for (std::size_t q = 0; q < grid.k_values.size(); ++q) {
          result.recall[v][b][q][m] = s[b][q];
        }
      }
    }
  }

  std::vector<std::vector<RecommendationEvent>> per_model(n_models);
  for (const auto& ev : input.recommendations) {
    if (ev.model < 0 || static_cast<std::size_t>(ev.model) >= n_models) {
      throw PreconditionError("recommendation event tagged with unknown model " +
                              std::to_string(ev.model));
    }
    per_model[static_cast<std::size_t>(ev.model)].push_back(ev);
  }
  result.ictr.assign(n_models, 0.0);
  result.events.assign(n_models, 0);
  result.hits.assign(n_models, 0);
  for (std::size_t m = 0; m < n_models; ++m) {
    if (per_model[m].empty()) continue;
    const auto ctr = ictr(per_model[m], *input.clicks, input.ctr_window, threads);
    result.ictr[m] = ctr.value;
    result.events[m] = ctr.n_events;
    result.hits[m] = ctr.n_hits;
  }
  return result;
}

DatasetInput simulate_dataset(const SimulatedDataset& dataset, unsigned threads) {
  auto history = std::make_shared<const InteractionLog>(generate_history(dataset.world, threads));

  DatasetInput input;
  input.tag = dataset.tag;
  input.ctr_window = dataset.ctr_window;
  input.eval_log = history;
  const std::size_t n = dataset.candidates.size();
  input.models.resize(n);
  for (const auto& c : dataset.candidates) {
    if (c.ground_truth_oracle) {
      throw PreconditionError("the ground-truth oracle cannot be evaluated offline");
    }
    input.model_tags.push_back(c.tag());
  }
  parallel_for(n, threads, [&](std::size_t m) {
    input.models[m] = train_model(dataset.candidates[m].spec, *history);
  });

  LiveConfig live = dataset.live;
  live.threads = threads;
  auto run = run_live_phase(*history, dataset.candidates, dataset.world, live, input.models);
  input.recommendations = std::move(run.events);
  input.clicks = std::make_shared<const InteractionLog>(std::move(run.interactions));
  return input;
}

GridResults run_grid(const ExperimentGrid& grid, std::span<const DatasetInput> datasets,
                     unsigned threads) {
  grid.validate();
  GridResults results;
  results.grid = grid;
  for (const auto& d : datasets) {
    results.datasets.push_back(evaluate_dataset(grid, d, threads));
    if (results.datasets.back().model_tags.size() != results.num_models()) {
      throw PreconditionError("every dataset must deploy the same number of models");
    }
  }
  return results;
}

GridResults run_grid(const ExperimentGrid& grid, std::span<const SimulatedDataset> datasets,
                     unsigned threads) {
  grid.validate();
  GridResults results;
  results.grid = grid;
  results.datasets.resize(datasets.size());
  // Datasets run one after another; parallelism is spent inside each.
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const auto input = simulate_dataset(datasets[d], threads);
    results.datasets[d] = evaluate_dataset(grid, input, threads);
    if (results.datasets[d].model_tags.size() != results.datasets[0].model_tags.size()) {
      throw PreconditionError("every dataset must deploy the same number of models");
    }
  }
  return results;
}

// --- MSR --------------------------------------------------------------------------

namespace {

struct Argmax {
  std::size_t index;
  bool tie;
};

Argmax lowest_argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < values.size(); ++m) {
    if (values[m] > values[best]) best = m;
  }
  bool tie = false;
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (m != best && values[m] == values[best]) tie = true;
  }
  return {best, tie};
}

std::size_t find_beta(const ExperimentGrid& grid, double beta) {
  for (std::size_t b = 0; b < grid.beta_values.size(); ++b) {
    if (std::abs(grid.beta_values[b] - beta) <= 1e-12) return b;
  }
  throw MissingCell("beta " + format_real(beta) + " is not in the grid");
}

std::size_t find_val(const ExperimentGrid& grid, Validation val) {
  for (std::size_t v = 0; v < grid.val_values.size(); ++v) {
    if (grid.val_values[v] == val) return v;
  }
  throw MissingCell("validation scheme " + to_string(val) + " is not in the grid");
}

}  // namespace

MsrEntry compute_msr(const GridResults& results, Validation val, double beta) {
  const auto& grid = results.grid;
  const std::size_t v = find_val(grid, val);
  const std::size_t b = find_beta(grid, beta);
  MsrEntry entry;
  entry.val = val;
  entry.beta = grid.beta_values[b];
  if (results.datasets.empty()) throw MissingCell("no datasets");
  for (std::size_t d = 0; d < results.datasets.size(); ++d) {
    const auto& ds = results.datasets[d];
    const std::size_t n_models = ds.ictr.size();
    if (n_models == 0 || ds.recall.size() <= v || ds.recall[v].size() <= b ||
        ds.recall[v][b].size() != grid.k_values.size()) {
      throw MissingCell("dataset " + ds.tag + " lacks cells for " + to_string(val) +
                        ", beta " + format_real(beta));
    }
    const Argmax online = lowest_argmax(ds.ictr);
    for (std::size_t q = 0; q < grid.k_values.size(); ++q) {
      const auto& e = ds.recall[v][b][q];
      if (e.size() != n_models) {
        throw MissingCell("dataset " + ds.tag + ", k " + std::to_string(grid.k_values[q]) +
                          ": offline vector length differs from online vector");
      }
      const Argmax offline = lowest_argmax(e);
      CellRecord cell{d,           grid.k_values[q], offline.index, online.index,
                      offline.tie, online.tie,       offline.index == online.index};
      entry.cells.push_back(cell);
      ++entry.n_cells;
      if (cell.match) ++entry.n_matches;
    }
  }
  entry.msr = static_cast<double>(entry.n_matches) / static_cast<double>(entry.n_cells);
  return entry;
}

MsrReport build_report(const GridResults& results) {
  MsrReport report;
  for (Validation val : results.grid.val_values) {
    for (double beta : results.grid.beta_values) {
      report.entries.push_back(compute_msr(results, val, beta));
    }
  }
  return report;
}

BestConfig best_config(const MsrReport& report) {
  if (report.entries.empty()) throw PreconditionError("empty MSR report");
  auto better = [](const MsrEntry& a, const MsrEntry& b) {
    if (a.msr != b.msr) return a.msr > b.msr;
    if (a.beta != b.beta) return a.beta < b.beta;
    return a.val == Validation::Loo && b.val == Validation::Lloo;
  };
  const MsrEntry* best = &report.entries.front();
  for (const auto& e : report.entries) {
    if (better(e, *best)) best = &e;
  }
  bool tie = false;
  for (const auto& e : report.entries) {
    if (&e != best && e.msr == best->msr) tie = true;
  }
  return {best->val, best->beta, best->msr, tie};
}

json MsrReport::to_json(const GridResults& results) const {
  json j;
  j["format"] = "recgap-msr-report";
  j["aggregation"] =
      "reconstructed unit: one cell per (dataset, k) at fixed (val, beta); msr = matches / cells";
  j["tie_rule"] = "lowest model index among maxima; ties recorded per cell";
  j["k_values"] = results.grid.k_values;
  j["beta_values"] = results.grid.beta_values;
  json entries = json::array();
  for (const auto& e : this->entries) {
    json cells = json::array();
    for (const auto& c : e.cells) {
      cells.push_back({{"dataset", results.datasets[c.dataset].tag},
                       {"k", c.k},
                       {"offline_best", c.offline_best},
                       {"online_best", c.online_best},
                       {"offline_tie", c.offline_tie},
                       {"online_tie", c.online_tie},
                       {"match", c.match}});
    }
    entries.push_back({{"val", to_string(e.val)},
                       {"beta", e.beta},
                       {"msr", e.msr},
                       {"n_cells", e.n_cells},
                       {"n_matches", e.n_matches},
                       {"cells", std::move(cells)}});
  }
  j["entries"] = std::move(entries);
  const auto best = best_config(*this);
  j["best"] = {{"val", to_string(best.val)}, {"beta", best.beta}, {"msr", best.msr},
               {"tie", best.tie}};
  json datasets = json::array();
  for (const auto& ds : results.datasets) {
    json offline;
    for (std::size_t v = 0; v < results.grid.val_values.size(); ++v) {
      offline[to_string(results.grid.val_values[v])] = ds.recall[v];
    }
    datasets.push_back({{"tag", ds.tag},
                        {"models", ds.model_tags},
                        {"online", ds.ictr},
                        {"events", ds.events},
                        {"hits", ds.hits},
                        {"offline", std::move(offline)}});
  }
  j["datasets"] = std::move(datasets);
  return j;
}

// --- CSV ----------------------------------------------------------------------------

void write_results_csv(std::ostream& out, const GridResults& results) {
  const auto& grid = results.grid;
  out << "dataset,val,beta,k,model,recall,ictr\n";
  for (const auto& ds : results.datasets) {
    for (std::size_t v = 0; v < grid.val_values.size(); ++v) {
      for (std::size_t b = 0; b < grid.beta_values.size(); ++b) {
        for (std::size_t q = 0; q < grid.k_values.size(); ++q) {
          for (std::size_t m = 0; m < ds.ictr.size(); ++m) {
            out << ds.tag << ',' << to_string(grid.val_values[v]) << ','
                << format_real(grid.beta_values[b]) << ',' << grid.k_values[q] << ',' << m
                << ',' << format_real(ds.recall[v][b][q][m]) << ','
                << format_real(ds.ictr[m]) << '\n';
          }
        }
      }
    }
  }
}

GridResults read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "dataset,val,beta,k,model,recall,ictr") {
    throw MalformedRow(1, "expected header 'dataset,val,beta,k,model,recall,ictr'");
  }
  struct Row {
    std::size_t d, v, b, q, m;
    double recall, ictr;
  };
  GridResults results;
  auto& grid = results.grid;
  grid.val_values.clear();
  std::vector<std::string> tags;
  std::vector<std::size_t> models_per_dataset;
  std::vector<Row> rows;
  auto index_of = [](auto& list, const auto& value) {
    auto it = std::find(list.begin(), list.end(), value);
    if (it != list.end()) return static_cast<std::size_t>(it - list.begin());
    list.push_back(value);
    return list.size() - 1;
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split(trim(line), ',');
    if (f.size() != 7) throw MalformedRow(line_no, "expected 7 fields");
    try {
      Row r{};
      r.d = index_of(tags, std::string(f[0]));
      r.v = index_of(grid.val_values, parse_validation(f[1]));
      r.b = index_of(grid.beta_values, parse_double(f[2], "beta"));
      r.q = index_of(grid.k_values, static_cast<int>(parse_int(f[3], "k")));
      r.m = static_cast<std::size_t>(parse_int(f[4], "model"));
      r.recall = parse_double(f[5], "recall");
      r.ictr = parse_double(f[6], "ictr");
      if (models_per_dataset.size() <= r.d) models_per_dataset.resize(r.d + 1, 0);
      models_per_dataset[r.d] = std::max(models_per_dataset[r.d], r.m + 1);
      rows.push_back(r);
    } catch (const ConfigError& e) {
      throw MalformedRow(line_no, e.what());
    }
  }
  results.datasets.resize(tags.size());
  const double nan = std::nan("");
  for (std::size_t d = 0; d < tags.size(); ++d) {
    auto& ds = results.datasets[d];
    ds.tag = tags[d];
    const std::size_t n = models_per_dataset[d];
    for (std::size_t m = 0; m < n; ++m) ds.model_tags.push_back(std::to_string(m));
    ds.ictr.assign(n, nan);
    ds.recall.assign(grid.val_values.size(),
                     std::vector<std::vector<std::vector<double>>>(
                         grid.beta_values.size(),
                         std::vector<std::vector<double>>(grid.k_values.size(),
                                                          std::vector<double>(n, nan))));
  }
  for (const auto& r : rows) {
    auto& ds = results.datasets[r.d];
    ds.recall[r.v][r.b][r.q][r.m] = r.recall;
    ds.ictr[r.m] = r.ictr;
  }
  for (const auto& ds : results.datasets) {
    for (const auto& per_val : ds.recall) {
      for (const auto& per_beta : per_val) {
        for (const auto& per_k : per_beta) {
          for (double x : per_k) {
            if (std::isnan(x)) throw MissingCell("results table is missing cells of " + ds.tag);
          }
        }
      }
    }
  }
  return results;
}

void write_plot_csv(std::ostream& out, const MsrReport& report) {
  std::map<double, std::pair<double, double>> rows;
  const double nan = std::nan("");
  for (const auto& e : report.entries) {
    auto [it, inserted] = rows.try_emplace(e.beta, nan, nan);
    (e.val == Validation::Loo ? it->second.first : it->second.second) = e.msr;
  }
  out << "beta,msr_loo,msr_lloo\n";
  for (const auto& [beta, msr] : rows) {
    out << format_real(beta) << ',' << (std::isnan(msr.first) ? "" : format_real(msr.first))
        << ',' << (std::isnan(msr.second) ? "" : format_real(msr.second)) << '\n';
  }
}

}  // namespace recgap
