#include "recgap/online_metrics.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>

#include "recgap/io.hpp"
#include "recgap/parallel.hpp"

namespace recgap {

nlohmann::json CtrResult::to_json() const {
  return {{"value", value}, {"d", d}, {"n_events", n_events}, {"n_hits", n_hits}};
}

CtrResult ictr(std::span<const RecommendationEvent> recs, const InteractionLog& log,
               Timestamp d, unsigned threads) {
  if (recs.empty()) throw EmptyRecommendationLog();
  if (d < 0) throw PreconditionError("window d must be >= 0");
  for (const auto& ev : recs) {
    if (ev.items.empty()) throw PreconditionError("recommendation event without items");
    std::vector<ItemId> sorted(ev.items);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 1; j < sorted.size(); ++j) {
      if (sorted[j] == sorted[j - 1] && sorted[j] != kUnknownId) {
        throw PreconditionError("recommendation event with duplicate items");
      }
    }
  }

  std::vector<char> hit(recs.size(), 0);
  parallel_for(recs.size(), threads, [&](std::size_t e) {
    const auto& ev = recs[e];
    if (ev.user == kUnknownId) return;
    const auto hist = log.history(ev.user);
    auto it = std::lower_bound(hist.begin(), hist.end(), ev.timestamp,
                               [](const TimedItem& x, Timestamp t) { return x.timestamp < t; });
    // t + d without overflow: compare t_j - t <= d.
    for (; it != hist.end() && it->timestamp - ev.timestamp <= d; ++it) {
      if (std::find(ev.items.begin(), ev.items.end(), it->item) != ev.items.end()) {
        hit[e] = 1;
        return;
      }
    }
  });

  CtrResult r;
  r.d = d;
  r.n_events = recs.size();
  r.n_hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  r.value = static_cast<double>(r.n_hits) / static_cast<double>(r.n_events);
  return r;
}

std::vector<RecommendationEvent> read_recommendation_log(std::istream& in,
                                                         const Catalog& catalog) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw MalformedRow(1, "missing header");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_model = false;
  if (line == "timestamp,user_id,item_ids,model") {
    with_model = true;
  } else if (line != "timestamp,user_id,item_ids") {
    throw MalformedRow(1, "expected header 'timestamp,user_id,item_ids'");
  }

  std::vector<RecommendationEvent> events;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split(line, ',');
    if (fields.size() != (with_model ? 4u : 3u)) {
      throw MalformedRow(line_no, "wrong number of fields");
    }
    RecommendationEvent ev;
    const auto ts = fields[0];
    auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), ev.timestamp);
    if (ts.empty() || ec != std::errc() || ptr != ts.data() + ts.size() || ev.timestamp < 0) {
      throw MalformedRow(line_no, "timestamp is not a non-negative integer");
    }
    if (fields[1].empty()) throw MalformedRow(line_no, "empty user_id");
    ev.user = catalog.find_user(fields[1]).value_or(kUnknownId);
    std::unordered_set<std::string_view> names;
    for (auto name : split(fields[2], '|')) {
      if (name.empty()) throw MalformedRow(line_no, "empty item id");
      if (!names.insert(name).second) throw MalformedRow(line_no, "duplicate item id");
      ev.items.push_back(catalog.find_item(name).value_or(kUnknownId));
    }
    if (with_model) {
      const auto m = fields[3];
      auto [p2, e2] = std::from_chars(m.data(), m.data() + m.size(), ev.model);
      if (m.empty() || e2 != std::errc() || p2 != m.data() + m.size()) {
        throw MalformedRow(line_no, "model is not an integer");
      }
    }
    events.push_back(std::move(ev));
  }
  return events;
}

void write_recommendation_log(std::ostream& out,
                              std::span<const RecommendationEvent> events,
                              const Catalog& catalog, bool with_model) {
  out << (with_model ? "timestamp,user_id,item_ids,model\n" : "timestamp,user_id,item_ids\n");
  for (const auto& ev : events) {
    out << ev.timestamp << ',' << catalog.user_name(ev.user) << ',';
    for (std::size_t j = 0; j < ev.items.size(); ++j) {
      if (j) out << '|';
      out << catalog.item_name(ev.items[j]);
    }
    if (with_model) out << ',' << ev.model;
    out << '\n';
  }
}

}  // namespace recgap
