#include "recgap/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "recgap/data.hpp"
#include "recgap/experiment.hpp"
#include "recgap/io.hpp"
#include "recgap/models.hpp"
#include "recgap/offline_metrics.hpp"
#include "recgap/online_metrics.hpp"
#include "recgap/parallel.hpp"
#include "recgap/random.hpp"
#include "recgap/simulator.hpp"

namespace recgap {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    }
    entries.emplace_back(std::string(key), std::string(value));
  }
  return entries;
}

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kDatasetWorldStream = 101;

/// String-valued options of one subcommand, kept in declaration order so the
/// resolved manifest is stable.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  void add(const std::string& key, std::string fallback, const std::string& help,
           bool in_manifest = true) {
    auto [it, inserted] = values_.emplace(key, std::move(fallback));
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    app_->add_option(flag, it->second, help)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)
        ->capture_default_str();
    if (in_manifest) order_.push_back(key);
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }
  bool has(const std::string& key) const { return !trim(values_.at(key)).empty(); }
  long long integer(const std::string& key) const { return parse_int(str(key), key); }
  double real(const std::string& key) const { return parse_double(str(key), key); }
  std::uint64_t seed(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ConfigError(key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  }
  std::size_t count(const std::string& key, long long min) const {
    const long long v = integer(key);
    if (v < min) throw ConfigError(key + " must be >= " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key) const {
    const auto v = trim(str(key));
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw ConfigError(key + " must be 0 or 1");
  }
  std::string require(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required option --" + key);
    return std::string(trim(str(key)));
  }

  std::string manifest(const std::string& subcommand) const {
    std::string text = "# resolved configuration of `recgap " + subcommand + "`\n";
    for (const auto& key : order_) text += key + " = " + values_.at(key) + "\n";
    return text;
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

std::vector<std::string> list_of(const std::string& text) {
  std::vector<std::string> out;
  for (auto part : split(text, ',')) {
    part = trim(part);
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::vector<double> reals_of(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& s : list_of(text)) out.push_back(parse_double(s, what));
  return out;
}

std::vector<int> ints_of(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& s : list_of(text)) out.push_back(static_cast<int>(parse_int(s, what)));
  return out;
}

std::vector<Validation> vals_of(const std::string& text) {
  std::vector<Validation> out;
  for (const auto& s : list_of(text)) out.push_back(parse_validation(s));
  return out;
}

Timestamp days_to_seconds(double days, const std::string& what) {
  if (!(days >= 0.0)) throw ConfigError(what + " must be >= 0");
  return static_cast<Timestamp>(std::llround(days * static_cast<double>(kDay)));
}

void write_output(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_file_atomic(path, content);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string join_path(const std::string& dir, const std::string& file) {
  return (fs::path(dir) / file).string();
}

// --- world and live options ----------------------------------------------------------

void add_world_options(Options& o) {
  o.add("users", "2000", "simulated users");
  o.add("items", "200", "simulated items");
  o.add("latent_dim", "8", "dimension of the hidden taste space");
  o.add("zipf", "1.0", "exposure bias exponent");
  o.add("sharpness", "3.0", "click logistic slope");
  o.add("threshold", "1.0", "click logistic offset");
  o.add("position_decay", "0.85", "attention ratio between adjacent slots");
  o.add("session_rate", "1.0", "sessions per user per simulated day");
  o.add("history_days", "18", "length of the logged history in simulated days");
  o.add("exposures", "8", "exposures per history session");
  o.add("organic", "2", "organic exposures per live session");
  o.add("drift", "0.0", "taste rotation in radians per simulated day");
  o.add("live_days", "18", "length of the live phase in simulated days");
  o.add("retrain_every", "21600", "seconds between retrains");
  o.add("k", "10", "recommendation list length served live");
  o.add("session_length", "300", "seconds a live session lasts");
  o.add("d", "600", "iCTR window in seconds");
}

/// Value i of a per-dataset list; a single value applies to every dataset.
std::string pick(const Options& o, const std::string& key, std::size_t i) {
  const auto values = list_of(o.str(key));
  if (values.empty()) throw ConfigError("empty value for " + key);
  if (values.size() == 1) return values.front();
  if (i >= values.size()) {
    throw ConfigError(key + " lists " + std::to_string(values.size()) +
                      " values but more datasets are configured");
  }
  return values[i];
}

WorldConfig world_from(const Options& o, std::size_t i, std::uint64_t seed) {
  auto integer = [&](const std::string& key) { return parse_int(pick(o, key, i), key); };
  auto real = [&](const std::string& key) { return parse_double(pick(o, key, i), key); };
  WorldConfig w;
  if (integer("users") < 1 || integer("items") < 1) {
    throw ConfigError("users and items must be >= 1");
  }
  w.n_users = static_cast<std::size_t>(integer("users"));
  w.n_items = static_cast<std::size_t>(integer("items"));
  w.latent_dim = static_cast<int>(integer("latent_dim"));
  w.zipf_exponent = real("zipf");
  w.click_sharpness = real("sharpness");
  w.click_threshold = real("threshold");
  w.position_decay = real("position_decay");
  w.session_rate = real("session_rate");
  w.horizon = days_to_seconds(real("history_days"), "history_days");
  w.exposures_per_session = static_cast<int>(integer("exposures"));
  w.organic_exposures = static_cast<int>(integer("organic"));
  w.drift_rate = real("drift");
  w.seed = seed;
  w.validate();
  return w;
}

LiveConfig live_from(const Options& o, std::size_t i, std::uint64_t assignment_seed,
                     unsigned threads) {
  LiveConfig live;
  live.horizon = days_to_seconds(parse_double(pick(o, "live_days", i), "live_days"), "live_days");
  live.retrain_every = parse_int(pick(o, "retrain_every", i), "retrain_every");
  const long long k = parse_int(pick(o, "k", i), "k");
  if (k < 1) throw ConfigError("k must be >= 1");
  live.k = static_cast<std::size_t>(k);
  live.session_length = parse_int(pick(o, "session_length", i), "session_length");
  if (live.retrain_every <= 0) throw ConfigError("retrain_every must be > 0");
  const long long used = k + parse_int(pick(o, "organic", i), "organic");
  if (live.session_length < used) {
    throw ConfigError("session_length must cover k + organic click slots");
  }
  live.assignment_seed = assignment_seed;
  live.threads = threads;
  return live;
}

std::vector<Candidate> candidates_from(const std::string& text) {
  std::vector<Candidate> out;
  for (const auto& s : list_of(text)) out.push_back(Candidate::parse(s));
  if (out.empty()) throw ConfigError("no models configured");
  return out;
}

// --- subcommands --------------------------------------------------------------------

struct Context {
  std::ostream& out;
  unsigned threads;
};

int run_ingest(const Options& o, Context& ctx) {
  const auto log = ingest_log_file(o.require("input"));
  Timestamp lo = log.interactions().front().timestamp, hi = lo;
  for (const auto& f : log.interactions()) {
    lo = std::min(lo, f.timestamp);
    hi = std::max(hi, f.timestamp);
  }
  const json summary = {{"interactions", log.size()},
                        {"users", log.catalog().num_users()},
                        {"items", log.catalog().num_items()},
                        {"first_timestamp", lo},
                        {"last_timestamp", hi}};
  if (o.has("output")) {
    std::ostringstream csv;
    write_interactions_csv(csv, log);
    write_output(o.str("output"), csv.str());
    write_output(o.str("output") + ".manifest.cfg", o.manifest("ingest"));
  }
  if (o.has("popularity")) {
    const auto pop = compute_popularity(log);
    std::string csv = "item_id,popularity\n";
    for (std::size_t i = 0; i < pop.values().size(); ++i) {
      csv += log.catalog().item_name(static_cast<ItemId>(i)) + "," +
             format_real(pop.values()[i]) + "\n";
    }
    write_output(o.str("popularity"), csv);
  }
  ctx.out << summary.dump() << "\n";
  return 0;
}

ModelSpec spec_from(const Options& o) {
  auto spec = ModelSpec::parse(o.require("model"));
  if (o.has("seed")) spec.seed = o.seed("seed");
  return spec;
}

int run_train(const Options& o, Context& ctx) {
  const auto log = ingest_log_file(o.require("log"));
  const auto spec = spec_from(o);
  const auto output = o.require("output");
  const auto model = train_model(spec, log);
  save_model(*model, output);
  write_output(output + ".manifest.cfg", o.manifest("train"));
  ctx.out << json{{"model", spec.to_string()}, {"output", output}}.dump() << "\n";
  return 0;
}

std::unique_ptr<RecModel> model_for(const Options& o, const InteractionLog& log) {
  if (o.has("model_file") == o.has("model")) {
    throw ConfigError("give exactly one of --model-file and --model");
  }
  if (o.has("model_file")) return load_model(o.str("model_file"), log.catalog_ptr());
  return train_model(spec_from(o), log);
}

int run_eval_offline(const Options& o, Context& ctx) {
  const auto log = ingest_log_file(o.require("log"));
  const auto model = model_for(o, log);
  MetricConfig config;
  config.val = parse_validation(o.str("val"));
  config.beta = o.real("beta");
  config.k = static_cast<int>(o.integer("k"));
  config.cold_start = parse_cold_start(o.str("cold_start"));
  const auto pop = compute_popularity(log);
  const auto result = evaluate_recall(log, *model, config, pop, ctx.threads);
  const std::string text = dump(result.to_json(log.catalog(), o.flag("per_user")));
  if (o.has("output")) {
    write_output(o.str("output"), text);
    write_output(o.str("output") + ".manifest.cfg", o.manifest("eval-offline"));
  } else {
    ctx.out << text;
  }
  return 0;
}

int run_eval_online(const Options& o, Context& ctx) {
  const auto log = ingest_log_file(o.require("log"));
  std::ifstream in(o.require("recs"), std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + o.str("recs"));
  auto events = read_recommendation_log(in, log.catalog());
  const Timestamp d = o.integer("d");
  const long long only = o.integer("model_index");
  if (only >= 0) {
    std::erase_if(events, [only](const RecommendationEvent& e) { return e.model != only; });
  }
  json j = ictr(events, log, d, ctx.threads).to_json();
  int max_model = -1;
  for (const auto& e : events) max_model = std::max(max_model, e.model);
  if (only < 0 && max_model >= 0) {
    json per_model = json::array();
    for (int m = 0; m <= max_model; ++m) {
      std::vector<RecommendationEvent> mine;
      for (const auto& e : events) {
        if (e.model == m) mine.push_back(e);
      }
      per_model.push_back(mine.empty() ? json(nullptr) : ictr(mine, log, d, ctx.threads).to_json());
    }
    j["per_model"] = std::move(per_model);
  }
  const std::string text = dump(j);
  if (o.has("output")) {
    write_output(o.str("output"), text);
    write_output(o.str("output") + ".manifest.cfg", o.manifest("eval-online"));
  } else {
    ctx.out << text;
  }
  return 0;
}

int run_simulate(const Options& o, Context& ctx) {
  const auto dir = o.require("output_dir");
  const std::uint64_t seed = o.seed("seed");
  const auto world = world_from(o, 0, seed);
  const auto live = live_from(o, 0, seed, ctx.threads);
  const auto candidates = candidates_from(o.str("models"));

  const auto history = generate_history(world, ctx.threads);
  const auto run = run_live_phase(history, candidates, world, live);

  std::ostringstream hist_csv, live_csv, recs_csv;
  write_interactions_csv(hist_csv, history);
  write_interactions_csv(live_csv, run.interactions);
  write_recommendation_log(recs_csv, run.events, history.catalog(), true);
  json tags = json::array();
  for (const auto& c : candidates) tags.push_back(c.tag());
  const json manifest = {{"format", "recgap-simulation"},
                         {"seed", seed},
                         {"world", world.to_json()},
                         {"live", live.to_json()},
                         {"models", tags},
                         {"live_start", run.start},
                         {"retrain_instants", run.retrain_instants},
                         {"traffic", run.traffic},
                         {"history_interactions", history.size()},
                         {"live_interactions", run.interactions.size()},
                         {"recommendations", run.events.size()}};
  fs::create_directories(dir);
  write_output(join_path(dir, "history.csv"), hist_csv.str());
  write_output(join_path(dir, "live.csv"), live_csv.str());
  write_output(join_path(dir, "recommendations.csv"), recs_csv.str());
  write_output(join_path(dir, "run.json"), dump(manifest));
  write_output(join_path(dir, "manifest.cfg"), o.manifest("simulate"));
  ctx.out << json{{"history_interactions", history.size()},
                  {"live_interactions", run.interactions.size()},
                  {"recommendations", run.events.size()}}
                 .dump()
          << "\n";
  return 0;
}

ExperimentGrid grid_from(const Options& o) {
  ExperimentGrid grid;
  grid.k_values = ints_of(o.str("k_values"), "k_values");
  grid.beta_values = reals_of(o.str("beta_values"), "beta_values");
  grid.val_values = vals_of(o.str("vals"));
  grid.cold_start = parse_cold_start(o.str("cold_start"));
  grid.validate();
  return grid;
}

json summary_of(const MsrReport& report) {
  const auto best = best_config(report);
  double loo0 = std::nan(""), lloo_best = -1.0, lloo_beta = 0.0;
  for (const auto& e : report.entries) {
    if (e.val == Validation::Loo && e.beta == 0.0) loo0 = e.msr;
    if (e.val == Validation::Lloo && e.beta > 0.0 && e.msr > lloo_best) {
      lloo_best = e.msr;
      lloo_beta = e.beta;
    }
  }
  json j = {{"best", {{"val", to_string(best.val)}, {"beta", best.beta}, {"msr", best.msr}}}};
  if (!std::isnan(loo0)) j["msr_loo_beta0"] = loo0;
  if (lloo_best >= 0.0) {
    j["max_msr_lloo_beta_positive"] = lloo_best;
    j["argmax_lloo_beta"] = lloo_beta;
  }
  return j;
}

void write_report(const std::string& dir, const GridResults& results) {
  const auto report = build_report(results);
  std::ostringstream plot;
  write_plot_csv(plot, report);
  write_output(join_path(dir, "msr_report.json"), dump(report.to_json(results)));
  write_output(join_path(dir, "plot.csv"), plot.str());
}

int run_experiment(const Options& o, Context& ctx) {
  const auto dir = o.require("output_dir");
  const std::uint64_t seed = o.seed("seed");
  const auto grid = grid_from(o);
  const auto candidates = candidates_from(o.str("models"));
  const std::size_t n = o.count("datasets", 1);

  std::vector<SimulatedDataset> datasets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t world_seed = derive_seed(seed, kDatasetWorldStream, i);
    auto& ds = datasets[i];
    ds.tag = "world" + std::to_string(i);
    ds.world = world_from(o, i, world_seed);
    ds.candidates = candidates;
    for (auto& c : ds.candidates) {
      if (!c.ground_truth_oracle) c.spec.seed = derive_seed(c.spec.seed, world_seed);
    }
    ds.live = live_from(o, i, world_seed, ctx.threads);
    ds.ctr_window = parse_int(pick(o, "d", i), "d");
  }
  const auto results = run_grid(grid, std::span<const SimulatedDataset>(datasets), ctx.threads);

  std::ostringstream csv;
  write_results_csv(csv, results);
  fs::create_directories(dir);
  write_output(join_path(dir, "results.csv"), csv.str());
  write_report(dir, results);
  write_output(join_path(dir, "manifest.cfg"), o.manifest("experiment"));
  const auto report = build_report(results);
  ctx.out << summary_of(report).dump() << "\n";
  return 0;
}

int run_report(const Options& o, Context& ctx) {
  std::ifstream in(o.require("results"), std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + o.str("results"));
  const auto results = read_results_csv(in);
  const auto dir = o.require("output_dir");
  fs::create_directories(dir);
  write_report(dir, results);
  write_output(join_path(dir, "manifest.cfg"), o.manifest("report"));
  ctx.out << summary_of(build_report(results)).dump() << "\n";
  return 0;
}

std::string default_betas() {
  std::string s;
  for (int j = 0; j <= 20; ++j) s += (j ? "," : "") + format_real(0.05 * j);
  return s;
}

// --- argument plumbing ------------------------------------------------------------

/// Returns the value of --config if present among the subcommand arguments.
std::optional<std::string> config_path(const std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  return path;
}

struct Command {
  CLI::App* app;
  std::unique_ptr<Options> options;
  std::function<int(const Options&, Context&)> run;
};

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"recgap: offline and online recommender evaluation", "recgap"};
  app.require_subcommand(1);
  std::string config_file;
  std::string threads_text;
  std::map<std::string, Command> commands;

  auto add = [&](const std::string& name, const std::string& help,
                 std::function<int(const Options&, Context&)> run,
                 const std::function<void(Options&)>& declare) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto options = std::make_unique<Options>(sub);
    sub->add_option("--config", config_file, "key = value file; flags override it");
    sub->add_option("--threads", threads_text, "worker threads (default RECGAP_THREADS or 1)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    declare(*options);
    commands[name] = Command{sub, std::move(options), std::move(run)};
  };

  add("ingest", "validate an interaction log and summarize it", run_ingest, [](Options& o) {
    o.add("input", "", "interaction CSV");
    o.add("output", "", "normalized copy of the log");
    o.add("popularity", "", "item popularity CSV");
  });
  add("train", "train a model on a log and save it", run_train, [](Options& o) {
    o.add("log", "", "interaction CSV");
    o.add("model", "", "model spec, e.g. mf_knn:f=16:lambda=0.1:alpha=10:iters=8:m=100");
    o.add("seed", "", "overrides the spec seed");
    o.add("output", "", "model JSON");
  });
  add("eval-offline", "offline recall of one model", run_eval_offline, [](Options& o) {
    o.add("log", "", "interaction CSV");
    o.add("model_file", "", "saved model JSON");
    o.add("model", "", "model spec trained on the log");
    o.add("seed", "", "overrides the spec seed");
    o.add("val", "loo", "loo or lloo");
    o.add("beta", "0", "popularity penalization");
    o.add("k", "10", "list length");
    o.add("cold_start", "include_with_fallback", "include_with_fallback or skip");
    o.add("per_user", "0", "include per-user contributions");
    o.add("output", "", "JSON output (stdout when empty)");
  });
  add("eval-online", "implicit CTR of a recommendation log", run_eval_online, [](Options& o) {
    o.add("log", "", "interaction CSV with the clicks");
    o.add("recs", "", "recommendation-log CSV");
    o.add("d", "600", "window in seconds");
    o.add("model_index", "-1", "restrict to one model tag (-1 = all)");
    o.add("output", "", "JSON output (stdout when empty)");
  });
  add("simulate", "simulate history and an A/B live phase", run_simulate, [](Options& o) {
    add_world_options(o);
    o.add("models", "mf_knn,popularity,random,oracle", "comma-separated candidates");
    o.add("seed", "1", "world seed");
    o.add("output_dir", "", "output directory");
  });
  add("experiment", "run the full grid and compute MSR", run_experiment, [](Options& o) {
    add_world_options(o);
    o.add("datasets", "5", "number of simulated worlds");
    o.add("models", "mf_knn", "comma-separated candidates");
    o.add("k_values", "1,2,3,4,5,6,7,8,9,10,15,20,25,50", "offline list lengths");
    o.add("beta_values", default_betas(), "popularity penalization values");
    o.add("vals", "loo,lloo", "validation schemes");
    o.add("cold_start", "include_with_fallback", "include_with_fallback or skip");
    o.add("seed", "1", "experiment seed");
    o.add("output_dir", "", "output directory");
  });
  add("report", "recompute the MSR report from a results CSV", run_report, [](Options& o) {
    o.add("results", "", "results CSV");
    o.add("output_dir", "", "output directory");
  });

  // Config entries become flags placed before the command-line ones, so
  // explicit flags win.
  std::vector<std::string> expanded;
  try {
    if (!args.empty()) {
      expanded.push_back(args.front());
      if (const auto path = config_path(args)) {
        for (const auto& [key, value] : parse_config_text(read_file(*path))) {
          std::string flag = "--" + key;
          std::replace(flag.begin(), flag.end(), '_', '-');
          expanded.push_back(flag);
          expanded.push_back(value);
        }
      }
      expanded.insert(expanded.end(), args.begin() + 1, args.end());
    }
  } catch (const Error& e) {
    err << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
    return kExitFailure;
  }

  try {
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  const auto& command = commands.at(app.get_subcommands().front()->get_name());
  try {
    const long long requested = threads_text.empty() ? 0 : parse_int(threads_text, "threads");
    if (requested < 0) throw ConfigError("threads must be >= 0");
    Context ctx{out, resolve_threads(static_cast<int>(requested))};
    return command.run(*command.options, ctx);
  } catch (const MalformedRow& e) {
    err << json{{"error", e.kind()}, {"line", e.line()}, {"message", e.what()}}.dump() << "\n";
  } catch (const Error& e) {
    err << json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
  } catch (const std::exception& e) {
    err << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
  }
  return kExitFailure;
}

}  // namespace recgap
