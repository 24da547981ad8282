#ifndef RECGAP_DATA_HPP_
#define RECGAP_DATA_HPP_

#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recgap/types.hpp"

namespace recgap {

/**
 * Interned user and item identifiers. Names are kept sorted so that the dense
 * id order agrees with the lexicographic order of the identifiers.
 */
class Catalog {
 public:
  /// Sorts and deduplicates both name lists. Empty names are rejected.
  static std::shared_ptr<const Catalog> create(std::vector<std::string> users,
                                               std::vector<std::string> items);

  std::size_t num_users() const { return users_.size(); }
  std::size_t num_items() const { return items_.size(); }

  const std::string& user_name(UserId u) const { return users_.at(u); }
  const std::string& item_name(ItemId i) const { return items_.at(i); }

  std::optional<UserId> find_user(std::string_view name) const;
  std::optional<ItemId> find_item(std::string_view name) const;

  const std::vector<std::string>& user_names() const { return users_; }
  const std::vector<std::string>& item_names() const { return items_; }

 private:
  Catalog() = default;

  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::unordered_map<std::string_view, UserId> user_lookup_;
  std::unordered_map<std::string_view, ItemId> item_lookup_;
};

using CatalogPtr = std::shared_ptr<const Catalog>;

struct Interaction {
  UserId user;
  ItemId item;
  Timestamp timestamp;

  bool operator==(const Interaction&) const = default;
};

struct TimedItem {
  ItemId item;
  Timestamp timestamp;

  bool operator==(const TimedItem&) const = default;
};

/**
 * Immutable, indexed set of timestamped interactions (the set F).
 *
 * Per-user histories are sorted by timestamp; rows sharing a timestamp keep
 * their input order. Only users with at least one interaction are listed in
 * users(). An empty log can be constructed (the simulator needs it) but every
 * metric entry point rejects it with EmptyLog.
 */
class InteractionLog {
 public:
  InteractionLog(CatalogPtr catalog, std::vector<Interaction> interactions);

  const Catalog& catalog() const { return *catalog_; }
  const CatalogPtr& catalog_ptr() const { return catalog_; }

  std::span<const Interaction> interactions() const { return interactions_; }
  std::size_t size() const { return interactions_.size(); }
  bool empty() const { return interactions_.empty(); }

  /// Users with at least one interaction, ascending.
  std::span<const UserId> users() const { return users_; }
  bool has_user(UserId u) const {
    return u < catalog_->num_users() && offsets_[u + 1] > offsets_[u];
  }

  /// F_u in time order. Empty span for users without interactions.
  std::span<const TimedItem> history(UserId u) const;

  /// Interaction count per catalog item (zero for items absent from the log).
  std::span<const std::uint64_t> item_counts() const { return item_counts_; }

  bool operator==(const InteractionLog& other) const;

 private:
  CatalogPtr catalog_;
  std::vector<Interaction> interactions_;
  std::vector<UserId> users_;
  std::vector<std::size_t> offsets_;
  std::vector<TimedItem> by_user_;
  std::vector<std::uint64_t> item_counts_;
};

/// The relevant-item sets N_u: distinct items of each user, sorted by id.
class RelevantItems {
 public:
  explicit RelevantItems(const InteractionLog& log);

  std::span<const UserId> users() const { return users_; }
  std::span<const ItemId> of(UserId u) const;
  /// Sum over users of |N_u|.
  std::size_t total() const { return items_.size(); }

 private:
  std::vector<UserId> users_;
  std::vector<std::size_t> offsets_;
  std::vector<ItemId> items_;
};

/**
 * Relative popularity p(i) per catalog item. Items absent from the table hold
 * zero internally and are reported as UnknownItem by at().
 */
class PopularityTable {
 public:
  PopularityTable(CatalogPtr catalog, std::vector<double> values);

  bool contains(ItemId i) const { return i < values_.size() && values_[i] > 0.0; }
  double at(ItemId i) const;
  std::span<const double> values() const { return values_; }
  const Catalog& catalog() const { return *catalog_; }

  /// Every present value multiplied by factor (> 0).
  PopularityTable scaled(double factor) const;

  /// Present items by descending popularity, ties by ascending id.
  std::vector<ItemId> ranking() const;

 private:
  CatalogPtr catalog_;
  std::vector<double> values_;
};

/// Parses `user_id,item_id,timestamp` CSV. Throws MalformedRow or EmptyLog.
InteractionLog ingest_log(std::istream& source);
InteractionLog ingest_log_file(const std::string& path);

void write_interactions_csv(std::ostream& out, const InteractionLog& log);

/// p(i) = count(i) / |F|. Throws EmptyLog.
PopularityTable compute_popularity(const InteractionLog& log);

/// Throws EmptyLog.
RelevantItems relevant_items(const InteractionLog& log);

}  // namespace recgap

#endif  // RECGAP_DATA_HPP_
