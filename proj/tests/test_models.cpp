#include <cmath>
#include <set>

#include "doctest.h"
#include "recgap/models.hpp"
#include "recgap/offline_metrics.hpp"
#include "support.hpp"

using namespace recgap;
using recgap::testing::item;
using recgap::testing::make_log;

namespace {

ItemEmbeddings embeddings(int f, std::vector<double> values) {
  ItemEmbeddings e;
  e.factors = f;
  e.regularization = 0.1;
  e.alpha = 1.0;
  e.iterations = 1;
  e.values = std::move(values);
  return e;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    dot += a[c] * b[c];
    na += a[c] * a[c];
    nb += b[c] * b[c];
  }
  return dot / std::sqrt(na * nb);
}

ModelSpec spec_of(const std::string& text) { return ModelSpec::parse(text); }

void check_contract(const RecModel& model, std::span<const ItemId> profile, std::size_t k) {
  const auto out = model.recommend(profile, k);
  std::set<ItemId> distinct(out.begin(), out.end());
  CHECK(distinct.size() == out.size());
  std::size_t available = model.num_items();
  for (ItemId p : profile) {
    CHECK(distinct.count(p) == 0);
    if (p < model.num_items()) --available;
  }
  CHECK(out.size() == std::min(k, available));
  CHECK(model.recommend(profile, k) == out);
  const auto longer = model.recommend(profile, k + 1);
  CHECK(std::equal(out.begin(), out.end(), longer.begin()));
  for (std::size_t r = 0; r < out.size(); ++r) CHECK(model.rank_of(profile, out[r], k) == r);
}

}  // namespace

TEST_CASE("ALS: loss never increases across half-steps") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto log = recgap::testing::random_log(seed, 40, 30, 400, 100);
    AlsTrace trace;
    train_implicit_mf(log, 6, 0.1, 5.0, 8, seed, &trace);
    REQUIRE(trace.loss.size() == 1 + 2 * 8);
    for (std::size_t s = 1; s < trace.loss.size(); ++s) {
      CHECK(trace.loss[s] <= trace.loss[s - 1] * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("ALS: two disjoint blocks separate in embedding space") {
  std::vector<recgap::testing::Row> rows;
  Timestamp t = 0;
  for (int u = 0; u < 10; ++u) {
    const int block = u % 2;
    for (int i = 0; i < 5; ++i) {
      rows.push_back({"user" + std::to_string(u), "item" + std::to_string(block * 5 + i), t++});
    }
  }
  const auto log = make_log(rows);
  const auto emb = train_implicit_mf(log, 2, 0.1, 10.0, 15, 3);
  auto block_of = [&](ItemId i) { return std::stoi(log.catalog().item_name(i).substr(4)) / 5; };
  double min_within = 2.0, max_cross = -2.0;
  for (ItemId a = 0; a < 10; ++a) {
    for (ItemId b = a + 1; b < 10; ++b) {
      const double c = cosine(emb.row(a), emb.row(b));
      if (block_of(a) == block_of(b)) {
        min_within = std::min(min_within, c);
      } else {
        max_cross = std::max(max_cross, c);
      }
    }
  }
  CHECK(min_within > max_cross);
}

TEST_CASE("ALS: preconditions and determinism") {
  const auto log = recgap::testing::random_log(2, 20, 15, 100);
  CHECK_THROWS_AS(train_implicit_mf(log, 4, 0.1, 1.0, 0, 1), PreconditionError);
  CHECK_THROWS_AS(train_implicit_mf(log, 0, 0.1, 1.0, 3, 1), PreconditionError);
  CHECK_THROWS_AS(train_implicit_mf(log, 4, 0.0, 1.0, 3, 1), PreconditionError);
  const InteractionLog empty(log.catalog_ptr(), {});
  CHECK_THROWS_AS(train_implicit_mf(empty, 4, 0.1, 1.0, 3, 1), EmptyLog);
  const auto a = train_implicit_mf(log, 4, 0.1, 1.0, 3, 42);
  const auto b = train_implicit_mf(log, 4, 0.1, 1.0, 3, 42);
  CHECK(a.values == b.values);
  for (double v : a.values) CHECK(std::isfinite(v));
  CHECK(a.num_items() == log.catalog().num_items());
  CHECK_THROWS_AS(train_model(spec_of("mf_knn:iters=0"), log), PreconditionError);
}

TEST_CASE("similarity index: duplicates, orthogonal vectors and zero norms") {
  // item 0 and 1 identical, 2 orthogonal to them, 3 zero.
  const auto emb = embeddings(2, {1, 0, 1, 0, 0, 1, 0, 0});
  const auto index = build_similarity_index(emb, 3);
  REQUIRE(index.neighbors(0).size() == 2);
  CHECK(index.neighbors(0)[0] == Neighbor{1, 1.0});
  CHECK(index.neighbors(1)[0] == Neighbor{0, 1.0});
  CHECK(index.neighbors(0)[1] == Neighbor{2, 0.0});
  CHECK(index.neighbors(3).empty());
  CHECK(index.zero_norm(3));
  CHECK(index.zero_norm_count() == 1);
  for (ItemId i = 0; i < 3; ++i) {
    for (const auto& n : index.neighbors(i)) {
      CHECK(n.item != i);
      CHECK(n.item != 3);
    }
  }
  CHECK_THROWS_AS(build_similarity_index(emb, 0), PreconditionError);
}

TEST_CASE("similarity index equals an all-pairs recomputation") {
  Rng rng(17);
  const int f = 5;
  const std::size_t n = 50, m = 7;
  std::vector<double> values(n * f);
  for (auto& v : values) v = rng.normal();
  const auto emb = embeddings(f, values);
  const auto index = build_similarity_index(emb, m);
  for (ItemId i = 0; i < n; ++i) {
    std::vector<Neighbor> all;
    for (ItemId j = 0; j < n; ++j) {
      if (j != i) all.push_back({j, std::clamp(cosine(emb.row(i), emb.row(j)), -1.0, 1.0)});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.item < b.item;
    });
    all.resize(m);
    const auto got = index.neighbors(i);
    REQUIRE(got.size() == m);
    for (std::size_t r = 0; r < m; ++r) {
      CHECK(got[r].item == all[r].item);
      CHECK(got[r].similarity == doctest::Approx(all[r].similarity).epsilon(1e-12));
      CHECK(got[r].similarity <= 1.0);
      CHECK(got[r].similarity >= -1.0);
    }
  }
}

TEST_CASE("kNN: single-source score then popularity fill, empty profile") {
  // Items a..e; a's only neighbor is b. Popularity order: e, d, c, b, a.
  const auto log = make_log({{"u", "a", 1}, {"u", "b", 2}, {"v", "b", 3}, {"u", "c", 4},
                             {"v", "c", 5}, {"w", "c", 6}, {"u", "d", 7}, {"v", "d", 8},
                             {"w", "d", 9}, {"x", "d", 10}, {"u", "e", 11}, {"v", "e", 12},
                             {"w", "e", 13}, {"x", "e", 14}, {"y", "e", 15}});
  const auto pop = compute_popularity(log);
  const SimilarityIndex index({{{item(log, "b"), 0.5}}, {}, {}, {}, {}},
                              {false, false, false, false, false}, 1);
  const std::vector<ItemId> profile = {item(log, "a")};
  CHECK(knn_recommend(index, pop, profile, 3) ==
        std::vector<ItemId>{item(log, "b"), item(log, "e"), item(log, "d")});
  CHECK(knn_recommend(index, pop, {}, 2) == std::vector<ItemId>{item(log, "e"), item(log, "d")});
  CHECK(knn_recommend(index, pop, {}, 2) == popularity_recommend(pop, {}, 2));
}

TEST_CASE("kNN: ten-item index with hand-set similarities") {
  std::vector<recgap::testing::Row> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({"u", "item" + std::to_string(i), i});
  const auto log = make_log(rows);  // uniform popularity, so ties go to ids
  const auto pop = compute_popularity(log);
  std::vector<std::vector<Neighbor>> nb(10);
  nb[0] = {{5, 0.9}, {6, 0.4}, {7, 0.1}};
  nb[1] = {{6, 0.8}, {7, 0.3}, {2, 0.2}};
  nb[2] = {{7, 0.5}, {5, 0.25}, {9, -0.5}};
  const SimilarityIndex index(nb, std::vector<bool>(10, false), 3);
  // Profile {0, 1, 2}: 5 -> 1.15, 6 -> 1.2, 7 -> 0.9, 9 -> -0.5, others 0.
  const std::vector<ItemId> profile = {0, 1, 2};
  CHECK(knn_recommend(index, pop, profile, 7) == std::vector<ItemId>{6, 5, 7, 3, 4, 8, 9});
}

TEST_CASE("popularity and random baselines") {
  const auto log = make_log({{"u", "a", 1}, {"v", "a", 2}, {"w", "a", 3}, {"u", "b", 4},
                             {"v", "b", 5}, {"u", "c", 6}});
  const auto pop = compute_popularity(log);
  const auto a = item(log, "a"), b = item(log, "b"), c = item(log, "c");
  CHECK(popularity_recommend(pop, {}, 2) == std::vector<ItemId>{a, b});
  const std::vector<ItemId> seen = {a};
  CHECK(popularity_recommend(pop, seen, 2) == std::vector<ItemId>{b, c});

  const auto r1 = random_recommend(50, 9, seen, 10);
  CHECK(r1 == random_recommend(50, 9, seen, 10));
  CHECK(r1 != random_recommend(50, 10, seen, 10));
  CHECK(std::set<ItemId>(r1.begin(), r1.end()).size() == 10);
  CHECK(std::find(r1.begin(), r1.end(), a) == r1.end());
  CHECK(random_recommend(3, 1, seen, 10).size() == 2);
}

TEST_CASE("every model kind honours the recommendation contract") {
  const auto log = recgap::testing::random_log(6, 30, 25, 300, 100);
  for (const char* text : {"mf_knn:f=4:iters=3:m=5", "mf_knn:f=4:iters=3:m=50", "mf:f=4:iters=3",
                           "popularity", "random:seed=4"}) {
    const auto model = train_model(spec_of(text), log);
    CHECK(model->num_items() == 25);
    check_contract(*model, {}, 5);
    const std::vector<ItemId> profile = {0, 3, 7, 11};
    check_contract(*model, profile, 5);
    check_contract(*model, profile, 30);
    const std::vector<ItemId> all_but_one = [] {
      std::vector<ItemId> v;
      for (ItemId i = 1; i < 25; ++i) v.push_back(i);
      return v;
    }();
    CHECK(model->recommend(all_but_one, 5) == std::vector<ItemId>{0});
    // rank_of reports limit for an item outside the list.
    const auto top = model->recommend(profile, 3);
    for (ItemId i = 0; i < 25; ++i) {
      if (std::find(top.begin(), top.end(), i) == top.end()) CHECK(model->rank_of(profile, i, 3) == 3);
    }
  }
}

TEST_CASE("seen-item filtering can be switched off") {
  const auto log = recgap::testing::random_log(6, 30, 25, 300, 100);
  const auto model = train_model(spec_of("popularity:filter=0"), log);
  const auto pop = compute_popularity(log);
  const auto top = pop.ranking().front();
  const std::vector<ItemId> profile = {top};
  CHECK(model->recommend(profile, 1) == std::vector<ItemId>{top});
  CHECK_FALSE(model->info().spec.filter_seen);
}

TEST_CASE("model spec text round trip and errors") {
  for (const char* text : {"mf_knn:f=16:lambda=0.1:alpha=10:iters=8:m=100:seed=3",
                           "mf:f=2:lambda=0.5:alpha=0:iters=1:seed=0", "popularity:seed=0",
                           "random:seed=12:filter=0"}) {
    const auto spec = spec_of(text);
    CHECK(spec.to_string() == text);
    CHECK(ModelSpec::parse(spec.to_string()) == spec);
  }
  CHECK_THROWS_AS(spec_of("svd"), ConfigError);
  CHECK_THROWS_AS(spec_of("mf_knn:f"), ConfigError);
  CHECK_THROWS_AS(spec_of("mf_knn:q=3"), ConfigError);
  CHECK_THROWS_AS(spec_of("mf_knn:f=abc"), ConfigError);
}

TEST_CASE("saved models reload bit-exactly") {
  recgap::testing::TempDir dir("models");
  const auto log = recgap::testing::random_log(12, 40, 30, 400, 100);
  for (const char* text : {"mf_knn:f=5:iters=4:m=10:seed=2", "mf:f=3:iters=2:seed=5", "popularity",
                           "random:seed=8"}) {
    const auto model = train_model(spec_of(text), log);
    const auto path = dir.file("model.json");
    save_model(*model, path);
    const auto back = load_model(path, log.catalog_ptr());
    CHECK(back->to_json().dump() == model->to_json().dump());
    CHECK(back->info().spec == model->info().spec);
    CHECK(back->info().trained_at == model->info().trained_at);
    for (UserId u : log.users()) {
      std::vector<ItemId> profile;
      for (const auto& e : log.history(u)) profile.push_back(e.item);
      std::sort(profile.begin(), profile.end());
      profile.erase(std::unique(profile.begin(), profile.end()), profile.end());
      CHECK(back->recommend(profile, 10) == model->recommend(profile, 10));
    }
  }
  CHECK_THROWS_AS(load_model(dir.file("missing.json"), log.catalog_ptr()), Error);
}

TEST_CASE("MF-kNN beats the random baseline on low-rank data") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto log = recgap::testing::low_rank_log(seed);
    auto knn = spec_of("mf_knn:f=8:lambda=0.1:alpha=10:iters=10:m=30");
    knn.seed = seed;
    auto rnd = spec_of("random");
    rnd.seed = seed;
    const double knn_recall = recall_loo(log, *train_model(knn, log), 10).value;
    const double rnd_recall = recall_loo(log, *train_model(rnd, log), 10).value;
    CHECK(knn_recall > rnd_recall);
  }
}
