#include "recgap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "recgap/io.hpp"
#include "recgap/parallel.hpp"
#include "recgap/random.hpp"

namespace recgap {

using nlohmann::json;

namespace {

// Substream identifiers; one generator per (purpose, user[, session]).
enum Stream : std::uint64_t {
  kTruthUser = 1,
  kTruthItems = 2,
  kTruthRank = 3,
  kHistorySessions = 4,
  kLiveSessions = 5,
  kLiveClicks = 6,
};

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

void WorldConfig::validate() const {
  if (n_users < 1 || n_items < 1) throw ConfigError("n_users and n_items must be >= 1");
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (horizon <= 0) throw ConfigError("horizon must be > 0");
  if (!(session_rate > 0.0)) throw ConfigError("session_rate must be > 0");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be >= 0");
  if (!(position_decay > 0.0 && position_decay <= 1.0)) {
    throw ConfigError("position_decay must be in (0, 1]");
  }
  if (exposures_per_session < 1) throw ConfigError("exposures_per_session must be >= 1");
  if (organic_exposures < 0) throw ConfigError("organic_exposures must be >= 0");
}

json WorldConfig::to_json() const {
  return {{"n_users", n_users},
          {"n_items", n_items},
          {"latent_dim", latent_dim},
          {"zipf_exponent", zipf_exponent},
          {"click_sharpness", click_sharpness},
          {"click_threshold", click_threshold},
          {"position_decay", position_decay},
          {"session_rate", session_rate},
          {"horizon", horizon},
          {"exposures_per_session", exposures_per_session},
          {"organic_exposures", organic_exposures},
          {"drift_rate", drift_rate},
          {"seed", seed}};
}

json LiveConfig::to_json() const {
  return {{"horizon", horizon},
          {"retrain_every", retrain_every},
          {"k", k},
          {"session_length", session_length},
          {"assignment_seed", assignment_seed}};
}

// --- ground truth ---------------------------------------------------------------

GroundTruth::GroundTruth(const WorldConfig& cfg)
    : n_users_(cfg.n_users),
      n_items_(cfg.n_items),
      dim_(cfg.latent_dim),
      sharpness_(cfg.click_sharpness),
      threshold_(cfg.click_threshold),
      drift_rate_(cfg.drift_rate) {
  cfg.validate();
  const auto d = static_cast<std::size_t>(dim_);
  base_.resize(n_users_ * d);
  drift_.resize(n_users_ * d);
  for (std::size_t u = 0; u < n_users_; ++u) {
    Rng rng(derive_seed(cfg.seed, kTruthUser, u));
    for (std::size_t c = 0; c < d; ++c) base_[u * d + c] = rng.normal();
    for (std::size_t c = 0; c < d; ++c) drift_[u * d + c] = rng.normal();
  }
  Rng item_rng(derive_seed(cfg.seed, kTruthItems));
  items_.resize(n_items_ * d);
  for (std::size_t i = 0; i < n_items_; ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      items_[i * d + c] = item_rng.normal();
      sq += items_[i * d + c] * items_[i * d + c];
    }
    const double norm = std::sqrt(sq);
    for (std::size_t c = 0; c < d; ++c) items_[i * d + c] /= norm;
  }

  by_rank_.resize(n_items_);
  std::iota(by_rank_.begin(), by_rank_.end(), 0);
  Rng rank_rng(derive_seed(cfg.seed, kTruthRank));
  for (std::size_t j = n_items_; j > 1; --j) {
    std::swap(by_rank_[j - 1], by_rank_[rank_rng.below(j)]);
  }
  rank_.resize(n_items_);
  for (std::size_t r = 0; r < n_items_; ++r) rank_[by_rank_[r]] = r;

  exposure_cdf_.resize(n_items_);
  double total = 0.0;
  for (std::size_t r = 0; r < n_items_; ++r) {
    total += std::pow(static_cast<double>(r + 1), -cfg.zipf_exponent);
    exposure_cdf_[r] = total;
  }
  for (double& c : exposure_cdf_) c /= total;
}

void GroundTruth::taste(UserId u, Timestamp t, std::vector<double>& out) const {
  const auto d = static_cast<std::size_t>(dim_);
  out.resize(d);
  const double phi = drift_rate_ * static_cast<double>(t) / static_cast<double>(kDay);
  const double c = std::cos(phi), s = std::sin(phi);
  for (std::size_t k = 0; k < d; ++k) {
    out[k] = c * base_[u * d + k] + s * drift_[u * d + k];
  }
}

double GroundTruth::preference(UserId u, ItemId i, Timestamp t) const {
  thread_local std::vector<double> x;
  taste(u, t, x);
  const auto d = static_cast<std::size_t>(dim_);
  double dot = 0.0;
  for (std::size_t k = 0; k < d; ++k) dot += x[k] * items_[i * d + k];
  return dot;
}

double GroundTruth::click_probability(UserId u, ItemId i, Timestamp t) const {
  return logistic(sharpness_ * (preference(u, i, t) - threshold_));
}

ItemId GroundTruth::sample_exposure(double x) const {
  auto it = std::upper_bound(exposure_cdf_.begin(), exposure_cdf_.end(), x);
  const auto r = std::min<std::size_t>(
      static_cast<std::size_t>(it - exposure_cdf_.begin()), n_items_ - 1);
  return by_rank_[r];
}

std::vector<ItemId> GroundTruth::top_k(UserId u, Timestamp t,
                                       std::span<const ItemId> profile,
                                       std::size_t k) const {
  std::vector<double> x;
  taste(u, t, x);
  const auto d = static_cast<std::size_t>(dim_);
  std::vector<std::pair<double, ItemId>> scored;
  scored.reserve(n_items_);
  for (std::size_t i = 0; i < n_items_; ++i) {
    if (std::binary_search(profile.begin(), profile.end(), static_cast<ItemId>(i))) continue;
    double dot = 0.0;
    for (std::size_t c = 0; c < d; ++c) dot += x[c] * items_[i * d + c];
    scored.emplace_back(dot, static_cast<ItemId>(i));
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<ItemId> out;
  for (std::size_t j = 0; j < take; ++j) out.push_back(scored[j].second);
  return out;
}

// --- history ----------------------------------------------------------------------

CatalogPtr make_world_catalog(const WorldConfig& cfg) {
  std::vector<std::string> users, items;
  char buf[32];
  users.reserve(cfg.n_users);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    std::snprintf(buf, sizeof(buf), "u%06zu", u);
    users.emplace_back(buf);
  }
  items.reserve(cfg.n_items);
  for (std::size_t i = 0; i < cfg.n_items; ++i) {
    std::snprintf(buf, sizeof(buf), "i%05zu", i);
    items.emplace_back(buf);
  }
  return Catalog::create(std::move(users), std::move(items));
}

namespace {

struct RawEvent {
  Timestamp time;
  UserId user;
  std::uint32_t seq;
  ItemId item;
};

// Poisson arrival times in [start, end) for one user.
void session_times(Rng& rng, double rate_per_day, Timestamp start, Timestamp end,
                   std::vector<Timestamp>& out) {
  out.clear();
  const double rate = rate_per_day / static_cast<double>(kDay);
  double t = static_cast<double>(start);
  for (;;) {
    t += rng.exponential(rate);
    if (t >= static_cast<double>(end)) return;
    out.push_back(static_cast<Timestamp>(t));
  }
}

}  // namespace

InteractionLog generate_history(const WorldConfig& cfg, unsigned threads) {
  cfg.validate();
  const GroundTruth truth(cfg);
  auto catalog = make_world_catalog(cfg);

  std::vector<std::vector<RawEvent>> per_user(cfg.n_users);
  parallel_for(cfg.n_users, threads, [&](std::size_t u) {
    Rng rng(derive_seed(cfg.seed, kHistorySessions, u));
    std::vector<Timestamp> starts;
    session_times(rng, cfg.session_rate, 0, cfg.horizon, starts);
    std::uint32_t seq = 0;
    for (Timestamp t0 : starts) {
      for (int e = 0; e < cfg.exposures_per_session; ++e) {
        const ItemId item = truth.sample_exposure(rng.uniform());
        const Timestamp t = t0 + 10 * e;
        if (rng.uniform() < truth.click_probability(static_cast<UserId>(u), item, t)) {
          per_user[u].push_back({t, static_cast<UserId>(u), seq++, item});
        }
      }
    }
  });

  std::vector<RawEvent> all;
  for (auto& v : per_user) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end(), [](const RawEvent& a, const RawEvent& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.user != b.user) return a.user < b.user;
    return a.seq < b.seq;
  });

  std::vector<Interaction> interactions;
  interactions.reserve(all.size());
  Timestamp last = -1;
  for (const auto& e : all) {
    last = std::max(e.time, last + 1);
    interactions.push_back({e.user, e.item, last});
  }
  return InteractionLog(std::move(catalog), std::move(interactions));
}

std::size_t assign_model(std::string_view user, std::size_t models, std::uint64_t seed) {
  if (models < 1) throw PreconditionError("need at least one model");
  return static_cast<std::size_t>(splitmix64(fnv1a(user) ^ splitmix64(seed)) % models);
}

Candidate Candidate::parse(std::string_view text) {
  Candidate c;
  if (trim(text) == "oracle") {
    c.ground_truth_oracle = true;
  } else {
    c.spec = ModelSpec::parse(text);
  }
  return c;
}

std::string Candidate::tag() const {
  return ground_truth_oracle ? "oracle" : spec.to_string();
}

InteractionLog merge_logs(const InteractionLog& a, const InteractionLog& b) {
  if (a.catalog_ptr() != b.catalog_ptr() &&
      (a.catalog().user_names() != b.catalog().user_names() ||
       a.catalog().item_names() != b.catalog().item_names())) {
    throw PreconditionError("logs do not share a catalog");
  }
  std::vector<Interaction> all(a.interactions().begin(), a.interactions().end());
  all.insert(all.end(), b.interactions().begin(), b.interactions().end());
  return InteractionLog(a.catalog_ptr(), std::move(all));
}

// --- live phase ---------------------------------------------------------------------

namespace {

struct Session {
  Timestamp time;
  UserId user;
  std::uint32_t index;  // per-user session counter
};

struct SessionOutput {
  RecommendationEvent event;
  std::vector<Interaction> clicks;
};

void insert_sorted(std::vector<ItemId>& set, ItemId item) {
  auto pos = std::lower_bound(set.begin(), set.end(), item);
  if (pos == set.end() || *pos != item) set.insert(pos, item);
}

}  // namespace

LiveRun run_live_phase(const InteractionLog& history, std::span<const Candidate> candidates,
                       const WorldConfig& cfg, const LiveConfig& live,
                       std::vector<std::shared_ptr<const RecModel>> initial) {
  cfg.validate();
  if (candidates.empty()) throw PreconditionError("no candidate models");
  if (live.retrain_every <= 0) throw PreconditionError("retrain_every must be > 0");
  if (live.k < 1) throw PreconditionError("k must be >= 1");
  if (live.horizon < 0) throw PreconditionError("live horizon must be >= 0");
  if (history.catalog().num_users() != cfg.n_users ||
      history.catalog().num_items() != cfg.n_items) {
    throw PreconditionError("history catalog does not match the world config");
  }
  if (!initial.empty() && initial.size() != candidates.size()) {
    throw PreconditionError("one initial model per candidate expected");
  }

  const GroundTruth truth(cfg);
  const auto& catalog = history.catalog();
  const std::size_t n_models = candidates.size();
  const unsigned threads = std::max(1u, live.threads);

  LiveRun run{0, {}, InteractionLog(history.catalog_ptr(), {}), {},
              std::vector<std::size_t>(n_models, 0)};
  Timestamp start = cfg.horizon;
  for (const auto& f : history.interactions()) start = std::max(start, f.timestamp + 1);
  run.start = start;
  if (live.horizon == 0) return run;
  const Timestamp end = start + live.horizon;

  auto train_all = [&](const InteractionLog& log) {
    std::vector<std::shared_ptr<const RecModel>> models(n_models);
    parallel_for(n_models, threads, [&](std::size_t m) {
      if (candidates[m].ground_truth_oracle) return;
      try {
        models[m] = train_model(candidates[m].spec, log);
      } catch (const std::exception& e) {
        throw ModelFailure("model " + std::to_string(m) + " (" + candidates[m].tag() +
                           "): " + e.what());
      }
    });
    return models;
  };
  std::vector<std::shared_ptr<const RecModel>> models =
      initial.empty() ? train_all(history) : std::move(initial);

  // Sessions of every user, in global (time, user) order.
  std::vector<Session> sessions;
  {
    std::vector<std::vector<Timestamp>> times(cfg.n_users);
    parallel_for(cfg.n_users, threads, [&](std::size_t u) {
      Rng rng(derive_seed(cfg.seed, kLiveSessions, u));
      session_times(rng, cfg.session_rate, start, end, times[u]);
    });
    for (std::size_t u = 0; u < cfg.n_users; ++u) {
      for (std::size_t s = 0; s < times[u].size(); ++s) {
        sessions.push_back({times[u][s], static_cast<UserId>(u), static_cast<std::uint32_t>(s)});
      }
    }
    std::sort(sessions.begin(), sessions.end(), [](const Session& a, const Session& b) {
      if (a.time != b.time) return a.time < b.time;
      return a.user < b.user;
    });
  }

  std::vector<std::size_t> bucket(cfg.n_users);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    bucket[u] = assign_model(catalog.user_name(static_cast<UserId>(u)), n_models,
                             live.assignment_seed);
  }
  std::vector<std::vector<ItemId>> profile(cfg.n_users);
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    for (const auto& e : history.history(static_cast<UserId>(u))) insert_sorted(profile[u], e.item);
  }

  std::vector<Interaction> live_clicks;
  std::size_t next = 0;
  Timestamp instant = start + live.retrain_every;
  while (next < sessions.size()) {
    const Timestamp boundary = std::min(instant, end);
    std::size_t stop = next;
    while (stop < sessions.size() && sessions[stop].time < boundary) ++stop;

    // Within one retrain interval users do not interact with each other, so
    // each user's sessions run independently; outputs are assembled in
    // session order afterwards.
    std::vector<std::vector<std::size_t>> by_user(cfg.n_users);
    std::vector<UserId> active;
    for (std::size_t s = next; s < stop; ++s) {
      if (by_user[sessions[s].user].empty()) active.push_back(sessions[s].user);
      by_user[sessions[s].user].push_back(s);
    }
    std::vector<SessionOutput> outputs(stop - next);
    parallel_for(active.size(), threads, [&](std::size_t a) {
      const UserId u = active[a];
      const std::size_t m = bucket[u];
      for (std::size_t s : by_user[u]) {
        const Session& sess = sessions[s];
        SessionOutput& out = outputs[s - next];
        out.event.timestamp = sess.time;
        out.event.user = u;
        out.event.model = static_cast<int>(m);
        if (candidates[m].ground_truth_oracle) {
          out.event.items = truth.top_k(u, sess.time, profile[u], live.k);
        } else {
          try {
            out.event.items = models[m]->recommend(profile[u], live.k);
          } catch (const std::exception& e) {
            throw ModelFailure("model " + std::to_string(m) + " (" + candidates[m].tag() +
                               "): " + e.what());
          }
        }
        Rng rng(derive_seed(cfg.seed, kLiveClicks, u, sess.index));
        double attention = 1.0;
        Timestamp offset = 1;
        for (ItemId item : out.event.items) {
          const Timestamp t = sess.time + offset++;
          if (rng.uniform() < attention * truth.click_probability(u, item, t)) {
            out.clicks.push_back({u, item, t});
          }
          attention *= cfg.position_decay;
        }
        for (int o = 0; o < cfg.organic_exposures; ++o) {
          const ItemId item = truth.sample_exposure(rng.uniform());
          const Timestamp t = sess.time + offset++;
          if (rng.uniform() < truth.click_probability(u, item, t)) {
            out.clicks.push_back({u, item, t});
          }
        }
        for (const auto& c : out.clicks) insert_sorted(profile[u], c.item);
      }
    });
    for (auto& out : outputs) {
      ++run.traffic[static_cast<std::size_t>(out.event.model)];
      live_clicks.insert(live_clicks.end(), out.clicks.begin(), out.clicks.end());
      run.events.push_back(std::move(out.event));
    }
    next = stop;

    if (instant < end && next < sessions.size()) {
      std::vector<Interaction> snapshot(history.interactions().begin(),
                                        history.interactions().end());
      for (const auto& c : live_clicks) {
        if (c.timestamp < instant) snapshot.push_back(c);
      }
      models = train_all(InteractionLog(history.catalog_ptr(), std::move(snapshot)));
      run.retrain_instants.push_back(instant);
    }
    instant += live.retrain_every;
  }

  run.interactions = InteractionLog(history.catalog_ptr(), std::move(live_clicks));
  return run;
}

}  // namespace recgap
