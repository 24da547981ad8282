#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "recgap/offline_metrics.hpp"
#include "recgap/oracle.hpp"
#include "support.hpp"

using namespace recgap;
using recgap::testing::FixedOrderModel;
using recgap::testing::item;
using recgap::testing::make_log;
using recgap::testing::user;

namespace {

// N_u1 = {a, b}, N_u2 = {b, c}, N_u3 = {c}.
InteractionLog toy_log() {
  return make_log({{"u1", "a", 1}, {"u1", "b", 2}, {"u2", "b", 3}, {"u2", "c", 4},
                   {"u3", "c", 5}});
}

// u1: a@1 b@3 c@5 a@6; u2: b@2 c@3 d@3 e@7.
InteractionLog interleaved_log() {
  return make_log({{"u1", "a", 1}, {"u2", "b", 2}, {"u1", "b", 3}, {"u2", "c", 3},
                   {"u2", "d", 3}, {"u1", "c", 5}, {"u1", "a", 6}, {"u2", "e", 7}});
}

FixedOrderModel alphabetical(const InteractionLog& log) {
  std::vector<ItemId> order(log.catalog().num_items());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<ItemId>(i);
  return FixedOrderModel(order, order.size());
}

class ThrowingModel final : public RecModel {
 public:
  std::vector<ItemId> recommend(std::span<const ItemId>, std::size_t) const override {
    throw std::runtime_error("cannot score");
  }
  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return 0; }
  nlohmann::json to_json() const override { return {}; }

 private:
  ModelInfo info_;
};

}  // namespace

TEST_CASE("LOO: a model that always returns the held-out item scores 1") {
  // With k equal to the catalog size every unseen item is returned.
  const auto log = toy_log();
  const auto pop = compute_popularity(log);
  const FixedOrderModel all = alphabetical(log);
  CHECK(recall_loo(log, all, 3).value == 1.0);
  for (double beta : {0.0, 0.3, 1.0}) {
    CHECK(recall_loo_beta(log, all, 3, beta, pop).value == 1.0);
    CHECK(recall_lloo_beta(log, all, 3, beta, pop).value == 1.0);
  }
  // With distinct trial profiles a lookup table answers exactly at k = 1.
  const auto unique = make_log({{"u1", "a", 1}, {"u1", "b", 2}, {"u2", "c", 3},
                                {"u2", "d", 4}, {"u2", "e", 5}});
  std::map<std::vector<ItemId>, std::vector<ItemId>> exact;
  const auto urel = relevant_items(unique);
  for (UserId u : unique.users()) {
    const auto nu = urel.of(u);
    for (ItemId i : nu) {
      std::vector<ItemId> profile;
      for (ItemId j : nu) {
        if (j != i) profile.push_back(j);
      }
      exact[profile] = {i};
    }
  }
  const recgap::testing::LookupModel lookup(exact, {}, unique.catalog().num_items());
  CHECK(recall_loo(unique, lookup, 1).value == 1.0);
  CHECK(recall_loo_beta(unique, lookup, 1, 0.7, compute_popularity(unique)).value == 1.0);
}

TEST_CASE("LOO and LLOO: a model that never returns a relevant item scores 0") {
  const auto log = make_log({{"u1", "a", 1}, {"u1", "b", 2}, {"u2", "b", 3}}, {"junk1", "junk2"});
  const FixedOrderModel junk({item(log, "junk1"), item(log, "junk2")}, log.catalog().num_items());
  const auto pop = compute_popularity(log);
  for (double beta : {0.0, 0.5, 1.0}) {
    CHECK(recall_loo_beta(log, junk, 2, beta, pop).value == 0.0);
    CHECK(recall_lloo_beta(log, junk, 2, beta, pop).value == 0.0);
  }
}

TEST_CASE("LOO: three-user toy log with a fixed popularity order") {
  const auto log = toy_log();
  // Counts a:1, b:2, c:2; popularity order b, c, a.
  const FixedOrderModel order({item(log, "b"), item(log, "c"), item(log, "a")}, 3);
  // Trials at k=1: u1 -a {b}->[c] miss, u1 -b {a}->[b] hit, u2 -b {c}->[b] hit,
  // u2 -c {b}->[c] hit, u3 -c {}->[b] miss.
  const auto r = recall_loo(log, order, 1);
  CHECK(r.value == doctest::Approx(3.0 / 5.0).epsilon(1e-15));
  CHECK(r.n_users() == 3);
  // The trained popularity model breaks the b/c tie by id and agrees.
  ModelSpec spec;
  spec.kind = ModelKind::Popularity;
  CHECK(recall_loo(log, *train_model(spec, log), 1).value == doctest::Approx(0.6).epsilon(1e-15));
  // Skipping the cold-start trial of u3 drops one miss.
  CHECK(recall_loo(log, order, 1, ColdStart::Skip).value == doctest::Approx(3.0 / 4.0).epsilon(1e-15));
}

TEST_CASE("LOO beta: toy log at beta = 1 with hand-set popularity") {
  const auto log = toy_log();
  const PopularityTable pop(log.catalog_ptr(), {0.5, 0.3, 0.2});
  const FixedOrderModel order({item(log, "b"), item(log, "c"), item(log, "a")}, 3);
  // Hits (b for u1; b and c for u2) carry 1/0.3 + 1/0.3 + 1/0.2; all terms sum
  // to 2 + 2/0.3 + 2/0.2.
  const double hits = 1 / 0.3 + 1 / 0.3 + 1 / 0.2;
  const double all = 1 / 0.5 + 2 / 0.3 + 2 / 0.2;
  const auto r = recall_loo_beta(log, order, 1, 1.0, pop);
  CHECK(r.value == doctest::Approx(hits / all).epsilon(1e-12));
  CHECK(r.value == doctest::Approx(0.625).epsilon(1e-12));
  const MetricConfig config{Validation::Loo, 1.0, 1, ColdStart::IncludeWithFallback};
  CHECK(oracle_recall(log, order, config, pop) == doctest::Approx(r.value).epsilon(1e-12));
}

TEST_CASE("LLOO: interleaved two-user log at k = 2") {
  const auto log = interleaved_log();
  const auto model = alphabetical(log);
  // u1: a{}[a,b] hit, b{a}[b,c] hit, c{a,b}[c,d] hit; repeat of a skipped.
  // u2: b{}[a,b] hit, c{b}[a,c] hit, d{b}[a,c] miss (c shares d's second),
  //     e{b,c,d}[a,e] hit.
  CHECK(recall_lloo(log, model, 2).value == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
  CHECK(recall_lloo(log, model, 2, ColdStart::Skip).value ==
        doctest::Approx(4.0 / 5.0).epsilon(1e-15));
  const auto pop = compute_popularity(log);
  for (auto cold : {ColdStart::IncludeWithFallback, ColdStart::Skip}) {
    for (double beta : {0.0, 0.3}) {
      const MetricConfig config{Validation::Lloo, beta, 2, cold};
      CHECK(recall_lloo_beta(log, model, 2, beta, pop, cold).value ==
            doctest::Approx(oracle_recall(log, model, config, pop)).epsilon(1e-12));
    }
  }
}

TEST_CASE("LLOO: a lone interaction with cold_start = skip is excluded") {
  const auto log = make_log({{"solo", "a", 1}, {"u", "a", 2}, {"u", "b", 3}});
  const auto model = alphabetical(log);
  const auto r = recall_lloo(log, model, 1, ColdStart::Skip);
  REQUIRE(r.per_user.size() == 1);
  CHECK(r.per_user[0].user == user(log, "u"));
  // u: a at 2 is skipped (empty Q), b given {a} -> [b] hit.
  CHECK(r.value == 1.0);
  CHECK(recall_lloo(log, model, 1).n_users() == 2);
}

TEST_CASE("user weights") {
  SUBCASE("single user") {
    const auto log = make_log({{"u", "a", 1}, {"u", "b", 2}});
    const auto pop = compute_popularity(log);
    for (double beta : {0.0, 0.5, 1.0}) {
      CHECK(user_weight(0, relevant_items(log), pop, beta) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("uniform popularity gives 2/3 and 1/3") {
    const auto log = make_log({{"u1", "a", 1}, {"u1", "b", 2}, {"u2", "c", 3}});
    const PopularityTable pop(log.catalog_ptr(), {0.2, 0.2, 0.2});
    const auto rel = relevant_items(log);
    for (double beta : {0.0, 0.4, 1.0}) {
      CHECK(user_weight(user(log, "u1"), rel, pop, beta) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
      CHECK(user_weight(user(log, "u2"), rel, pop, beta) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    }
  }
  SUBCASE("skewed log at beta = 0.5 matches a two-loop sum") {
    const auto log = recgap::testing::random_log(5, 30, 40, 400);
    const auto pop = compute_popularity(log);
    const auto rel = relevant_items(log);
    std::map<UserId, std::set<ItemId>> sets;
    for (const auto& f : log.interactions()) sets[f.user].insert(f.item);
    double total = 0.0;
    for (const auto& [u, items] : sets) {
      for (ItemId i : items) total += std::pow(pop.at(i), -0.5);
    }
    double sum = 0.0;
    for (const auto& [u, items] : sets) {
      double mine = 0.0;
      for (ItemId i : items) mine += std::pow(pop.at(i), -0.5);
      const double w = user_weight(u, rel, pop, 0.5);
      CHECK(w == doctest::Approx(mine / total).epsilon(1e-12));
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  SUBCASE("errors") {
    const auto log = make_log({{"u", "a", 1}, {"v", "b", 2}}, {"c"});
    const auto rel = relevant_items(log);
    CHECK_THROWS_AS(user_weight(99, rel, compute_popularity(log), 0.5), UnknownUser);
    const PopularityTable partial(log.catalog_ptr(), {1.0, 0.0, 0.0});
    CHECK_THROWS_AS(user_weight(user(log, "u"), rel, partial, 0.5), UnknownItem);
  }
}

TEST_CASE("beta = 0 reduces the penalized variants to plain recall") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto log = recgap::testing::random_log(seed, 20, 15, 120);
    const auto pop = compute_popularity(log);
    for (const auto& model : recgap::testing::three_models(log, seed)) {
      for (int k : {1, 3, 10}) {
        CHECK(std::abs(recall_loo_beta(log, *model, k, 0.0, pop).value -
                       recall_loo(log, *model, k).value) <= 1e-12);
        CHECK(std::abs(recall_lloo_beta(log, *model, k, 0.0, pop).value -
                       recall_lloo(log, *model, k).value) <= 1e-12);
      }
    }
  }
}

TEST_CASE("popularity rescaling leaves penalized recall unchanged") {
  const auto log = recgap::testing::random_log(9, 25, 20, 200);
  const auto pop = compute_popularity(log);
  const auto models = recgap::testing::three_models(log, 9);
  for (double beta : {0.25, 0.5, 1.0}) {
    for (const auto& model : models) {
      const double base = recall_loo_beta(log, *model, 5, beta, pop).value;
      const double lbase = recall_lloo_beta(log, *model, 5, beta, pop).value;
      for (double c : {1e-3, 1e3}) {
        CHECK(std::abs(recall_loo_beta(log, *model, 5, beta, pop.scaled(c)).value - base) < 1e-10);
        CHECK(std::abs(recall_lloo_beta(log, *model, 5, beta, pop.scaled(c)).value - lbase) < 1e-10);
      }
    }
  }
}

TEST_CASE("recall is non-decreasing in k and lies in [0, 1]") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto log = recgap::testing::random_log(seed, 15, 25, 150);
    const auto pop = compute_popularity(log);
    for (const auto& model : recgap::testing::three_models(log, seed)) {
      for (auto val : {Validation::Loo, Validation::Lloo}) {
        double previous = 0.0;
        for (int k = 1; k <= 25; ++k) {
          const MetricConfig config{val, 0.5, k, ColdStart::IncludeWithFallback};
          const double v = evaluate_recall(log, *model, config, pop).value;
          CHECK(v >= previous);
          CHECK(v <= 1.0);
          previous = v;
        }
      }
    }
  }
}

TEST_CASE("LLOO: a new user's interactions leave existing contributions unchanged") {
  const auto base = interleaved_log();
  std::vector<recgap::testing::Row> rows = {
      {"u1", "a", 1}, {"u2", "b", 2}, {"u1", "b", 3}, {"u2", "c", 3}, {"u2", "d", 3},
      {"u1", "c", 5}, {"u1", "a", 6}, {"u2", "e", 7}, {"u9", "e", 0}, {"u9", "a", 4}};
  const auto extended = make_log(rows);
  const auto model = alphabetical(base);
  const PopularityTable pop_base(base.catalog_ptr(), {0.1, 0.2, 0.3, 0.15, 0.25});
  const PopularityTable pop_ext(extended.catalog_ptr(), {0.1, 0.2, 0.3, 0.15, 0.25});
  const auto a = recall_lloo_beta(base, model, 2, 0.4, pop_base);
  const auto b = recall_lloo_beta(extended, model, 2, 0.4, pop_ext);
  for (const auto& c : a.per_user) {
    const auto& name = base.catalog().user_name(c.user);
    const auto it = std::find_if(b.per_user.begin(), b.per_user.end(), [&](const auto& x) {
      return extended.catalog().user_name(x.user) == name;
    });
    REQUIRE(it != b.per_user.end());
    CHECK(it->numerator == c.numerator);
    CHECK(it->denominator == c.denominator);
  }
}

TEST_CASE("optimized recall agrees with the direct oracle") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto log = recgap::testing::random_log(seed, 6, 8, 30, 8);
    const auto pop = compute_popularity(log);
    for (const auto& model : recgap::testing::three_models(log, seed)) {
      for (auto val : {Validation::Loo, Validation::Lloo}) {
        for (auto cold : {ColdStart::IncludeWithFallback, ColdStart::Skip}) {
          for (double beta : {0.0, 0.3, 1.0}) {
            const MetricConfig config{val, beta, 3, cold};
            const double fast = evaluate_recall(log, *model, config, pop).value;
            CHECK(std::abs(fast - oracle_recall(log, *model, config, pop)) <= 1e-9);
            ++checked;
          }
        }
      }
    }
  }
  CHECK(checked == 30 * 3 * 2 * 2 * 3);
}

TEST_CASE("oracle refuses instances beyond its size guard") {
  const auto log = recgap::testing::random_log(1, 20, 10, 40);
  const auto model = alphabetical(log);
  CHECK_THROWS_AS(oracle_recall(log, model, MetricConfig{}, compute_popularity(log)),
                  InstanceTooLarge);
}

TEST_CASE("grid aggregation is bit-identical to per-cell aggregation") {
  const auto log = recgap::testing::random_log(4, 40, 30, 500, 100);
  const auto pop = compute_popularity(log);
  const std::vector<double> betas = {0.0, 0.05, 0.3, 1.0};
  const std::vector<int> ks = {1, 2, 5, 10, 20};
  for (const auto& model : recgap::testing::three_models(log, 4)) {
    for (auto val : {Validation::Loo, Validation::Lloo}) {
      for (auto cold : {ColdStart::IncludeWithFallback, ColdStart::Skip}) {
        const auto ranks = compute_held_out_ranks(log, *model, val, 20);
        const auto grid = aggregate_recall_grid(ranks, pop, betas, ks, cold);
        for (std::size_t b = 0; b < betas.size(); ++b) {
          for (std::size_t q = 0; q < ks.size(); ++q) {
            CHECK(grid[b][q] == aggregate_recall(ranks, &pop, betas[b], ks[q], cold).value);
          }
        }
      }
    }
  }
}

TEST_CASE("per-user contributions aggregate to the value; threads do not matter") {
  const auto log = recgap::testing::random_log(8, 30, 20, 300, 50);
  const auto pop = compute_popularity(log);
  for (const auto& model : recgap::testing::three_models(log, 8)) {
    const MetricConfig config{Validation::Lloo, 0.3, 5, ColdStart::IncludeWithFallback};
    const auto r = evaluate_recall(log, *model, config, pop, 1);
    double num = 0.0, den = 0.0;
    for (const auto& c : r.per_user) {
      num += c.numerator;
      den += c.denominator;
    }
    CHECK(std::abs(num / den - r.value) <= 1e-12);
    CHECK(evaluate_recall(log, *model, config, pop, 4).value == r.value);
  }
}

TEST_CASE("model failures and bad arguments") {
  const auto log = toy_log();
  const ThrowingModel bad;
  CHECK_THROWS_AS(recall_loo(log, bad, 1), ModelFailure);
  const auto model = alphabetical(log);
  CHECK_THROWS_AS(recall_loo(log, model, 0), PreconditionError);
  CHECK_THROWS_AS(recall_loo_beta(log, model, 1, -0.5, compute_popularity(log)), PreconditionError);
}

TEST_CASE("recall result JSON carries the documented fields") {
  const auto log = toy_log();
  const auto model = alphabetical(log);
  const auto r = recall_lloo_beta(log, model, 2, 0.3, compute_popularity(log));
  const auto j = r.to_json(log.catalog(), true);
  for (const char* key : {"metric", "val", "beta", "k", "value", "n_users", "per_user"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["val"] == "lloo");
  CHECK(j["per_user"].size() == r.n_users());
  CHECK(parse_validation("LLOO") == Validation::Lloo);
  CHECK_THROWS_AS(parse_validation("kfold"), ConfigError);
}
