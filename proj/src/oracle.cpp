#include "recgap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace recgap {

double oracle_recall(const InteractionLog& log, const RecModel& model,
                     const MetricConfig& config, const PopularityTable& pop) {
  if (log.empty()) throw EmptyLog();
  std::set<UserId> all_users;
  std::set<ItemId> all_items;
  for (const auto& f : log.interactions()) {
    all_users.insert(f.user);
    all_items.insert(f.item);
  }
  if (all_users.size() > 16 || all_items.size() > 16 || log.size() > 64) {
    throw InstanceTooLarge("oracle is limited to 16 users, 16 items, 64 interactions");
  }

  // F_u rebuilt from the raw list: stable sort by timestamp keeps input order.
  std::map<UserId, std::vector<std::pair<ItemId, Timestamp>>> f_u;
  for (const auto& f : log.interactions()) f_u[f.user].emplace_back(f.item, f.timestamp);
  for (auto& [u, list] : f_u) {
    std::stable_sort(list.begin(), list.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
  }

  struct Term {
    ItemId item;
    bool hit;
  };
  std::map<UserId, std::vector<Term>> included;

  for (const auto& [u, list] : f_u) {
    std::set<ItemId> n_u;
    for (const auto& [i, t] : list) n_u.insert(i);

    if (config.val == Validation::Loo) {
      for (ItemId i : n_u) {
        std::set<ItemId> m = n_u;
        m.erase(i);
        if (m.empty() && config.cold_start == ColdStart::Skip) continue;
        const std::vector<ItemId> profile(m.begin(), m.end());
        const auto top = model.recommend(profile, static_cast<std::size_t>(config.k));
        const bool hit = std::find(top.begin(), top.end(), i) != top.end();
        included[u].push_back({i, hit});
      }
    } else {
      std::set<ItemId> done;
      for (const auto& [i1, t1] : list) {
        if (done.count(i1)) continue;
        done.insert(i1);
        std::set<ItemId> q;
        for (const auto& [i2, t2] : list) {
          if (t2 < t1) q.insert(i2);
        }
        if (q.empty() && config.cold_start == ColdStart::Skip) continue;
        const std::vector<ItemId> profile(q.begin(), q.end());
        const auto top = model.recommend(profile, static_cast<std::size_t>(config.k));
        const bool hit = std::find(top.begin(), top.end(), i1) != top.end();
        included[u].push_back({i1, hit});
      }
    }
  }

  // Weight w(u) = (sum over u's included items of p^-beta) / (same summed over
  // all users), then sum_u w(u) * hits_u / mass_u.
  std::map<UserId, double> mass;
  double total_mass = 0.0;
  for (const auto& [u, terms] : included) {
    for (const auto& term : terms) {
      const double w = std::pow(pop.at(term.item), -config.beta);
      mass[u] += w;
      total_mass += w;
    }
  }
  if (total_mass == 0.0) return 0.0;
  double value = 0.0;
  for (const auto& [u, terms] : included) {
    if (mass[u] == 0.0) continue;
    double hits = 0.0;
    for (const auto& term : terms) {
      if (term.hit) hits += std::pow(pop.at(term.item), -config.beta);
    }
    const double weight = mass[u] / total_mass;
    value += weight * (hits / mass[u]);
  }
  return value;
}

}  // namespace recgap
