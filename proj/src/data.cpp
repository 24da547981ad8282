#include "recgap/data.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <iterator>
#include <numeric>
#include <ostream>
#include <sstream>

namespace recgap {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

}  // namespace

std::shared_ptr<const Catalog> Catalog::create(std::vector<std::string> users,
                                               std::vector<std::string> items) {
  std::shared_ptr<Catalog> c(new Catalog());
  c->users_ = sorted_unique(std::move(users));
  c->items_ = sorted_unique(std::move(items));
  if ((!c->users_.empty() && c->users_.front().empty()) ||
      (!c->items_.empty() && c->items_.front().empty())) {
    throw PreconditionError("catalog identifiers must be non-empty");
  }
  c->user_lookup_.reserve(c->users_.size());
  for (std::size_t u = 0; u < c->users_.size(); ++u) {
    c->user_lookup_.emplace(c->users_[u], static_cast<UserId>(u));
  }
  c->item_lookup_.reserve(c->items_.size());
  for (std::size_t i = 0; i < c->items_.size(); ++i) {
    c->item_lookup_.emplace(c->items_[i], static_cast<ItemId>(i));
  }
  return c;
}

std::optional<UserId> Catalog::find_user(std::string_view name) const {
  auto it = user_lookup_.find(name);
  if (it == user_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<ItemId> Catalog::find_item(std::string_view name) const {
  auto it = item_lookup_.find(name);
  if (it == item_lookup_.end()) return std::nullopt;
  return it->second;
}

InteractionLog::InteractionLog(CatalogPtr catalog,
                               std::vector<Interaction> interactions)
    : catalog_(std::move(catalog)), interactions_(std::move(interactions)) {
  if (!catalog_) throw PreconditionError("null catalog");
  const std::size_t n_users = catalog_->num_users();
  const std::size_t n_items = catalog_->num_items();

  item_counts_.assign(n_items, 0);
  offsets_.assign(n_users + 1, 0);
  for (const auto& f : interactions_) {
    if (f.user >= n_users || f.item >= n_items) {
      throw PreconditionError("interaction references an id outside the catalog");
    }
    if (f.timestamp < 0) throw PreconditionError("negative timestamp");
    ++offsets_[f.user + 1];
    ++item_counts_[f.item];
  }
  for (std::size_t u = 0; u < n_users; ++u) {
    if (offsets_[u + 1] > 0) users_.push_back(static_cast<UserId>(u));
    offsets_[u + 1] += offsets_[u];
  }

  // Counting sort by user keeps input order within a user, then a stable sort
  // by timestamp per user.
  by_user_.resize(interactions_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (const auto& f : interactions_) {
    by_user_[cursor[f.user]++] = TimedItem{f.item, f.timestamp};
  }
  for (UserId u : users_) {
    auto first = by_user_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]);
    auto last = by_user_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]);
    std::stable_sort(first, last, [](const TimedItem& a, const TimedItem& b) {
      return a.timestamp < b.timestamp;
    });
  }
}

std::span<const TimedItem> InteractionLog::history(UserId u) const {
  if (u >= catalog_->num_users()) return {};
  return std::span<const TimedItem>(by_user_).subspan(
      offsets_[u], offsets_[u + 1] - offsets_[u]);
}

bool InteractionLog::operator==(const InteractionLog& other) const {
  return catalog_->user_names() == other.catalog_->user_names() &&
         catalog_->item_names() == other.catalog_->item_names() &&
         interactions_ == other.interactions_ && users_ == other.users_ &&
         offsets_ == other.offsets_ && by_user_ == other.by_user_ &&
         item_counts_ == other.item_counts_;
}

RelevantItems::RelevantItems(const InteractionLog& log)
    : users_(log.users().begin(), log.users().end()) {
  offsets_.assign(log.catalog().num_users() + 1, 0);
  std::vector<ItemId> scratch;
  for (std::size_t u = 0; u < log.catalog().num_users(); ++u) {
    auto hist = log.history(static_cast<UserId>(u));
    scratch.clear();
    for (const auto& e : hist) scratch.push_back(e.item);
    std::sort(scratch.begin(), scratch.end());
    scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    items_.insert(items_.end(), scratch.begin(), scratch.end());
    offsets_[u + 1] = items_.size();
  }
}

std::span<const ItemId> RelevantItems::of(UserId u) const {
  if (u + 1 >= offsets_.size()) return {};
  return std::span<const ItemId>(items_).subspan(offsets_[u],
                                                 offsets_[u + 1] - offsets_[u]);
}

PopularityTable::PopularityTable(CatalogPtr catalog, std::vector<double> values)
    : catalog_(std::move(catalog)), values_(std::move(values)) {
  if (!catalog_ || values_.size() != catalog_->num_items()) {
    throw PreconditionError("popularity table must cover the catalog");
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw PreconditionError("popularity values must be finite and >= 0");
    }
  }
}

double PopularityTable::at(ItemId i) const {
  if (!contains(i)) {
    throw UnknownItem(i < catalog_->num_items() ? catalog_->item_name(i)
                                                : "#" + std::to_string(i));
  }
  return values_[i];
}

PopularityTable PopularityTable::scaled(double factor) const {
  if (!(factor > 0.0)) throw PreconditionError("scale factor must be > 0");
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return PopularityTable(catalog_, std::move(v));
}

std::vector<ItemId> PopularityTable::ranking() const {
  std::vector<ItemId> order;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 0.0) order.push_back(static_cast<ItemId>(i));
  }
  std::stable_sort(order.begin(), order.end(), [this](ItemId a, ItemId b) {
    return values_[a] > values_[b];
  });
  return order;
}

namespace {

struct RawRow {
  std::string_view user;
  std::string_view item;
  Timestamp timestamp;
};

}  // namespace

InteractionLog ingest_log(std::istream& source) {
  const std::string buffer{std::istreambuf_iterator<char>(source),
                           std::istreambuf_iterator<char>()};
  std::string_view rest(buffer);

  auto next_line = [&rest]() {
    const auto pos = rest.find('\n');
    std::string_view line = rest.substr(0, pos);
    rest = pos == std::string_view::npos ? std::string_view{} : rest.substr(pos + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  if (rest.empty()) throw EmptyLog("empty input");
  std::string_view header = next_line();
  if (header.size() >= 3 && header.substr(0, 3) == "\xEF\xBB\xBF") {
    header.remove_prefix(3);
  }
  if (header != "user_id,item_id,timestamp") {
    throw MalformedRow(1, "expected header 'user_id,item_id,timestamp'");
  }

  std::vector<RawRow> rows;
  std::unordered_map<std::string_view, std::uint32_t> users, items;
  std::size_t line_no = 1;
  while (!rest.empty()) {
    std::string_view line = next_line();
    ++line_no;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string_view::npos || line.find(',', c2 + 1) != std::string_view::npos) {
      throw MalformedRow(line_no, "expected exactly 3 fields");
    }
    RawRow row{line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1), 0};
    const std::string_view ts = line.substr(c2 + 1);
    if (row.user.empty()) throw MalformedRow(line_no, "empty user_id");
    if (row.item.empty()) throw MalformedRow(line_no, "empty item_id");
    const auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), row.timestamp);
    if (ts.empty() || ec != std::errc() || ptr != ts.data() + ts.size()) {
      throw MalformedRow(line_no, "timestamp is not an integer");
    }
    if (row.timestamp < 0) throw MalformedRow(line_no, "negative timestamp");
    users.emplace(row.user, 0);
    items.emplace(row.item, 0);
    rows.push_back(row);
  }
  if (rows.empty()) throw EmptyLog("no interaction rows");

  std::vector<std::string> user_names, item_names;
  user_names.reserve(users.size());
  item_names.reserve(items.size());
  for (const auto& [k, v] : users) user_names.emplace_back(k);
  for (const auto& [k, v] : items) item_names.emplace_back(k);
  auto catalog = Catalog::create(std::move(user_names), std::move(item_names));
  for (auto& [k, v] : users) v = *catalog->find_user(k);
  for (auto& [k, v] : items) v = *catalog->find_item(k);

  std::vector<Interaction> interactions;
  interactions.reserve(rows.size());
  for (const auto& r : rows) {
    interactions.push_back({users.at(r.user), items.at(r.item), r.timestamp});
  }
  return InteractionLog(std::move(catalog), std::move(interactions));
}

InteractionLog ingest_log_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + path);
  return ingest_log(in);
}

void write_interactions_csv(std::ostream& out, const InteractionLog& log) {
  out << "user_id,item_id,timestamp\n";
  const auto& c = log.catalog();
  for (const auto& f : log.interactions()) {
    out << c.user_name(f.user) << ',' << c.item_name(f.item) << ',' << f.timestamp
        << '\n';
  }
}

PopularityTable compute_popularity(const InteractionLog& log) {
  if (log.empty()) throw EmptyLog();
  const double total = static_cast<double>(log.size());
  std::vector<double> p(log.item_counts().size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = static_cast<double>(log.item_counts()[i]) / total;
  }
  return PopularityTable(log.catalog_ptr(), std::move(p));
}

RelevantItems relevant_items(const InteractionLog& log) {
  if (log.empty()) throw EmptyLog();
  return RelevantItems(log);
}

}  // namespace recgap
