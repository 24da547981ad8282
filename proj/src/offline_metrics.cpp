#include "recgap/offline_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "recgap/parallel.hpp"

namespace recgap {

using nlohmann::json;

std::string to_string(Validation val) { return val == Validation::Loo ? "loo" : "lloo"; }

Validation parse_validation(std::string_view text) {
  if (text == "loo" || text == "LOO") return Validation::Loo;
  if (text == "lloo" || text == "LLOO") return Validation::Lloo;
  throw ConfigError("unknown validation scheme '" + std::string(text) + "'");
}

std::string to_string(ColdStart policy) {
  return policy == ColdStart::IncludeWithFallback ? "include_with_fallback" : "skip";
}

ColdStart parse_cold_start(std::string_view text) {
  if (text == "include_with_fallback" || text == "include") return ColdStart::IncludeWithFallback;
  if (text == "skip") return ColdStart::Skip;
  throw ConfigError("unknown cold-start policy '" + std::string(text) + "'");
}

json RecallResult::to_json(const Catalog& catalog, bool include_per_user) const {
  json j;
  j["metric"] = metric;
  j["val"] = to_string(config.val);
  j["beta"] = config.beta;
  j["k"] = config.k;
  j["value"] = value;
  j["n_users"] = n_users();
  j["cold_start"] = to_string(config.cold_start);
  j["filter_seen"] = filter_seen;
  if (include_per_user) {
    json rows = json::array();
    for (const auto& c : per_user) {
      rows.push_back({{"user", catalog.user_name(c.user)},
                      {"numerator", c.numerator},
                      {"denominator", c.denominator}});
    }
    j["per_user"] = std::move(rows);
  }
  return j;
}

namespace {

std::uint32_t checked_rank(const RecModel& model, std::span<const ItemId> profile,
                           ItemId target, std::size_t max_k, const Catalog& catalog,
                           UserId user) {
  try {
    return static_cast<std::uint32_t>(model.rank_of(profile, target, max_k));
  } catch (const ModelFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelFailure("user " + catalog.user_name(user) + ": " + e.what());
  }
}

void loo_trials(const InteractionLog& log, const RecModel& model, UserId user,
                std::size_t max_k, std::vector<Trial>& out) {
  std::vector<ItemId> relevant;
  for (const auto& e : log.history(user)) relevant.push_back(e.item);
  std::sort(relevant.begin(), relevant.end());
  relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());

  std::vector<ItemId> profile;
  profile.reserve(relevant.size());
  for (std::size_t h = 0; h < relevant.size(); ++h) {
    profile.clear();
    for (std::size_t j = 0; j < relevant.size(); ++j) {
      if (j != h) profile.push_back(relevant[j]);
    }
    out.push_back({relevant[h],
                   checked_rank(model, profile, relevant[h], max_k, log.catalog(), user),
                   profile.empty()});
  }
}

// Walks F_u in time order. Each group of equal timestamps sees only items from
// strictly earlier groups; only the first occurrence of an item is a trial.
void lloo_trials(const InteractionLog& log, const RecModel& model, UserId user,
                 std::size_t max_k, std::vector<Trial>& out) {
  const auto hist = log.history(user);
  std::vector<ItemId> profile;  // sorted, distinct, timestamps < current group
  std::vector<ItemId> seen;     // sorted, distinct, including current group
  std::size_t g = 0;
  while (g < hist.size()) {
    std::size_t end = g;
    while (end < hist.size() && hist[end].timestamp == hist[g].timestamp) ++end;
    for (std::size_t e = g; e < end; ++e) {
      const ItemId item = hist[e].item;
      auto pos = std::lower_bound(seen.begin(), seen.end(), item);
      if (pos != seen.end() && *pos == item) continue;
      seen.insert(pos, item);
      out.push_back({item, checked_rank(model, profile, item, max_k, log.catalog(), user),
                     profile.empty()});
    }
    for (std::size_t e = g; e < end; ++e) {
      auto pos = std::lower_bound(profile.begin(), profile.end(), hist[e].item);
      if (pos == profile.end() || *pos != hist[e].item) profile.insert(pos, hist[e].item);
    }
    g = end;
  }
}

std::string metric_name(Validation val, bool weighted) {
  std::string name = val == Validation::Loo ? "recall_loo" : "recall_lloo";
  return weighted ? name + "_beta" : name;
}

}  // namespace

HeldOutRanks compute_held_out_ranks(const InteractionLog& log, const RecModel& model,
                                    Validation val, std::size_t max_k, unsigned threads) {
  if (log.empty()) throw EmptyLog();
  if (max_k < 1) throw PreconditionError("k must be >= 1");
  HeldOutRanks ranks;
  ranks.val = val;
  ranks.max_k = max_k;
  ranks.filter_seen = model.info().spec.filter_seen;
  ranks.users.assign(log.users().begin(), log.users().end());
  ranks.trials.resize(ranks.users.size());
  parallel_for(ranks.users.size(), threads, [&](std::size_t r) {
    if (val == Validation::Loo) {
      loo_trials(log, model, ranks.users[r], max_k, ranks.trials[r]);
    } else {
      lloo_trials(log, model, ranks.users[r], max_k, ranks.trials[r]);
    }
  });
  return ranks;
}

RecallResult aggregate_recall(const HeldOutRanks& ranks, const PopularityTable* pop,
                              double beta, int k, ColdStart cold_start) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  if (static_cast<std::size_t>(k) > ranks.max_k) {
    throw PreconditionError("k exceeds the depth the ranks were computed at");
  }
  if (!(beta >= 0.0)) throw PreconditionError("beta must be >= 0");
  if (!pop && beta != 0.0) throw PreconditionError("beta > 0 needs a popularity table");

  RecallResult result;
  result.metric = metric_name(ranks.val, pop != nullptr);
  result.config = MetricConfig{ranks.val, beta, k, cold_start};
  result.filter_seen = ranks.filter_seen;

  double numerator = 0.0;
  double denominator = 0.0;
  for (std::size_t r = 0; r < ranks.users.size(); ++r) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& t : ranks.trials[r]) {
      if (t.empty_profile && cold_start == ColdStart::Skip) continue;
      const double w = pop ? std::pow(pop->at(t.item), -beta) : 1.0;
      den += w;
      if (t.rank < static_cast<std::uint32_t>(k)) num += w;
    }
    if (den > 0.0) {
      result.per_user.push_back({ranks.users[r], num, den});
      numerator += num;
      denominator += den;
    }
  }
  result.value = denominator > 0.0 ? numerator / denominator : 0.0;
  return result;
}

std::vector<std::vector<double>> aggregate_recall_grid(const HeldOutRanks& ranks,
                                                       const PopularityTable& pop,
                                                       std::span<const double> betas,
                                                       std::span<const int> ks,
                                                       ColdStart cold_start) {
  for (int k : ks) {
    if (k < 1 || static_cast<std::size_t>(k) > ranks.max_k) {
      throw PreconditionError("k outside [1, max_k]");
    }
  }
  const std::size_t n_items = pop.values().size();
  std::vector<std::vector<double>> out(betas.size(), std::vector<double>(ks.size(), 0.0));
  std::vector<double> weight(n_items, 0.0);
  std::vector<double> num(ks.size()), total_num(ks.size());
  for (std::size_t b = 0; b < betas.size(); ++b) {
    const double beta = betas[b];
    if (!(beta >= 0.0)) throw PreconditionError("beta must be >= 0");
    for (std::size_t i = 0; i < n_items; ++i) {
      weight[i] = pop.contains(static_cast<ItemId>(i))
                      ? std::pow(pop.values()[i], -beta)
                      : 0.0;
    }
    std::fill(total_num.begin(), total_num.end(), 0.0);
    double total_den = 0.0;
    for (std::size_t r = 0; r < ranks.users.size(); ++r) {
      std::fill(num.begin(), num.end(), 0.0);
      double den = 0.0;
      for (const auto& t : ranks.trials[r]) {
        if (t.empty_profile && cold_start == ColdStart::Skip) continue;
        if (t.item >= n_items || weight[t.item] == 0.0) {
          pop.at(t.item);  // throws UnknownItem
        }
        const double w = weight[t.item];
        den += w;
        for (std::size_t q = 0; q < ks.size(); ++q) {
          if (t.rank < static_cast<std::uint32_t>(ks[q])) num[q] += w;
        }
      }
      if (den > 0.0) {
        for (std::size_t q = 0; q < ks.size(); ++q) total_num[q] += num[q];
        total_den += den;
      }
    }
    for (std::size_t q = 0; q < ks.size(); ++q) {
      out[b][q] = total_den > 0.0 ? total_num[q] / total_den : 0.0;
    }
  }
  return out;
}

RecallResult recall_loo(const InteractionLog& log, const RecModel& model, int k,
                        ColdStart cold_start, unsigned threads) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  const auto ranks = compute_held_out_ranks(log, model, Validation::Loo,
                                            static_cast<std::size_t>(k), threads);
  return aggregate_recall(ranks, nullptr, 0.0, k, cold_start);
}

RecallResult recall_lloo(const InteractionLog& log, const RecModel& model, int k,
                         ColdStart cold_start, unsigned threads) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  const auto ranks = compute_held_out_ranks(log, model, Validation::Lloo,
                                            static_cast<std::size_t>(k), threads);
  return aggregate_recall(ranks, nullptr, 0.0, k, cold_start);
}

RecallResult recall_loo_beta(const InteractionLog& log, const RecModel& model, int k,
                             double beta, const PopularityTable& pop, ColdStart cold_start,
                             unsigned threads) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  const auto ranks = compute_held_out_ranks(log, model, Validation::Loo,
                                            static_cast<std::size_t>(k), threads);
  return aggregate_recall(ranks, &pop, beta, k, cold_start);
}

RecallResult recall_lloo_beta(const InteractionLog& log, const RecModel& model, int k,
                              double beta, const PopularityTable& pop, ColdStart cold_start,
                              unsigned threads) {
  if (k < 1) throw PreconditionError("k must be >= 1");
  const auto ranks = compute_held_out_ranks(log, model, Validation::Lloo,
                                            static_cast<std::size_t>(k), threads);
  return aggregate_recall(ranks, &pop, beta, k, cold_start);
}

RecallResult evaluate_recall(const InteractionLog& log, const RecModel& model,
                             const MetricConfig& config, const PopularityTable& pop,
                             unsigned threads) {
  return config.val == Validation::Loo
             ? recall_loo_beta(log, model, config.k, config.beta, pop, config.cold_start,
                               threads)
             : recall_lloo_beta(log, model, config.k, config.beta, pop, config.cold_start,
                                threads);
}

double user_weight(UserId user, const RelevantItems& relevant, const PopularityTable& pop,
                   double beta) {
  const auto users = relevant.users();
  if (!std::binary_search(users.begin(), users.end(), user)) {
    throw UnknownUser(user < pop.catalog().num_users() ? pop.catalog().user_name(user)
                                                       : "#" + std::to_string(user));
  }
  double mine = 0.0;
  double total = 0.0;
  for (UserId v : users) {
    double s = 0.0;
    for (ItemId i : relevant.of(v)) s += std::pow(pop.at(i), -beta);
    if (v == user) mine = s;
    total += s;
  }
  return mine / total;
}

}  // namespace recgap
