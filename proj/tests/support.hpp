#ifndef RECGAP_TESTS_SUPPORT_HPP_
#define RECGAP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <unistd.h>

#include "recgap/data.hpp"
#include "recgap/models.hpp"
#include "recgap/random.hpp"

namespace recgap::testing {

struct Row {
  std::string user;
  std::string item;
  Timestamp timestamp;
};

/// Log over exactly the named users and items, in row order.
inline InteractionLog make_log(const std::vector<Row>& rows,
                               std::vector<std::string> extra_items = {}) {
  std::vector<std::string> users, items = std::move(extra_items);
  for (const auto& r : rows) {
    users.push_back(r.user);
    items.push_back(r.item);
  }
  auto catalog = Catalog::create(users, items);
  std::vector<Interaction> list;
  for (const auto& r : rows) {
    list.push_back({*catalog->find_user(r.user), *catalog->find_item(r.item), r.timestamp});
  }
  return InteractionLog(catalog, std::move(list));
}

inline ItemId item(const InteractionLog& log, const std::string& name) {
  return *log.catalog().find_item(name);
}

inline UserId user(const InteractionLog& log, const std::string& name) {
  return *log.catalog().find_user(name);
}

/// Seeded random log; timestamps are drawn from a narrow range so that
/// same-timestamp rows and repeated (user, item) pairs occur.
inline InteractionLog random_log(std::uint64_t seed, std::size_t n_users, std::size_t n_items,
                                 std::size_t n_rows, Timestamp max_ts = 20) {
  Rng rng(seed);
  std::vector<std::string> users, items;
  char buf[32];
  for (std::size_t u = 0; u < n_users; ++u) {
    std::snprintf(buf, sizeof(buf), "u%03zu", u);
    users.emplace_back(buf);
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    std::snprintf(buf, sizeof(buf), "i%03zu", i);
    items.emplace_back(buf);
  }
  auto catalog = Catalog::create(users, items);
  std::vector<Interaction> list;
  for (std::size_t r = 0; r < n_rows; ++r) {
    // Skewed item choice so popularity varies.
    const double x = rng.uniform();
    const auto i = static_cast<ItemId>(std::min<double>(n_items - 1, x * x * n_items));
    list.push_back({static_cast<UserId>(rng.below(n_users)), i,
                    static_cast<Timestamp>(rng.below(static_cast<std::uint64_t>(max_ts) + 1))});
  }
  return InteractionLog(catalog, std::move(list));
}

/// Users and items split into `groups` taste clusters; each interaction hits
/// the user's own cluster with probability 0.9. The implied preference
/// matrix has rank `groups`.
inline InteractionLog low_rank_log(std::uint64_t seed, std::size_t n_users = 200,
                                   std::size_t n_items = 60, std::size_t groups = 4,
                                   std::size_t per_user = 8) {
  Rng rng(seed);
  std::vector<std::string> users, items;
  for (std::size_t u = 0; u < n_users; ++u) users.push_back("u" + std::to_string(1000 + u));
  for (std::size_t i = 0; i < n_items; ++i) items.push_back("i" + std::to_string(1000 + i));
  auto catalog = Catalog::create(users, items);
  const std::size_t block = n_items / groups;
  std::vector<Interaction> list;
  Timestamp t = 0;
  for (std::size_t u = 0; u < n_users; ++u) {
    const std::size_t g = u % groups;
    for (std::size_t r = 0; r < per_user; ++r) {
      const std::size_t i = rng.uniform() < 0.9 ? g * block + rng.below(block)
                                                 : rng.below(n_items);
      list.push_back({static_cast<UserId>(u), static_cast<ItemId>(i), t++});
    }
  }
  return InteractionLog(catalog, std::move(list));
}

/// Recommends a fixed item order, skipping profile items.
class FixedOrderModel final : public RecModel {
 public:
  FixedOrderModel(std::vector<ItemId> order, std::size_t n_items)
      : order_(std::move(order)), n_items_(n_items) {}

  std::vector<ItemId> recommend(std::span<const ItemId> profile, std::size_t k) const override {
    std::vector<ItemId> out;
    for (ItemId i : order_) {
      if (out.size() == k) break;
      if (std::find(profile.begin(), profile.end(), i) == profile.end()) out.push_back(i);
    }
    return out;
  }
  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return n_items_; }
  nlohmann::json to_json() const override { return {}; }

 private:
  std::vector<ItemId> order_;
  std::size_t n_items_;
  ModelInfo info_;
};

/// Looks the answer up from a table keyed by the (sorted) profile; unknown
/// profiles get fallback.
class LookupModel final : public RecModel {
 public:
  LookupModel(std::map<std::vector<ItemId>, std::vector<ItemId>> table,
              std::vector<ItemId> fallback, std::size_t n_items)
      : table_(std::move(table)), fallback_(std::move(fallback)), n_items_(n_items) {}

  std::vector<ItemId> recommend(std::span<const ItemId> profile, std::size_t k) const override {
    std::vector<ItemId> key(profile.begin(), profile.end());
    std::sort(key.begin(), key.end());
    auto it = table_.find(key);
    std::vector<ItemId> out = it == table_.end() ? fallback_ : it->second;
    if (out.size() > k) out.resize(k);
    return out;
  }
  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return n_items_; }
  nlohmann::json to_json() const override { return {}; }

 private:
  std::map<std::vector<ItemId>, std::vector<ItemId>> table_;
  std::vector<ItemId> fallback_;
  std::size_t n_items_;
  ModelInfo info_;
};

/// Three model kinds trained on log: MF-kNN, popularity and random.
inline std::vector<std::unique_ptr<RecModel>> three_models(const InteractionLog& log,
                                                           std::uint64_t seed) {
  std::vector<std::unique_ptr<RecModel>> models;
  ModelSpec knn;
  knn.kind = ModelKind::MfKnn;
  knn.factors = 3;
  knn.iterations = 3;
  knn.neighbors = 5;
  knn.seed = seed;
  models.push_back(train_model(knn, log));
  ModelSpec pop;
  pop.kind = ModelKind::Popularity;
  models.push_back(train_model(pop, log));
  ModelSpec rnd;
  rnd.kind = ModelKind::Random;
  rnd.seed = seed;
  models.push_back(train_model(rnd, log));
  return models;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() /
            ("recgap_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace recgap::testing

#endif  // RECGAP_TESTS_SUPPORT_HPP_
