#ifndef RECGAP_ONLINE_METRICS_HPP_
#define RECGAP_ONLINE_METRICS_HPP_

#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "json.hpp"
#include "recgap/data.hpp"

namespace recgap {

/// Id used for users or items of a recommendation log that the interaction
/// log's catalog does not know. They can never be matched by a click.
inline constexpr std::uint32_t kUnknownId = std::numeric_limits<std::uint32_t>::max();

/// One served recommendation (t, u, I') and, for simulated logs, the index of
/// the model that produced it (-1 when untagged).
struct RecommendationEvent {
  Timestamp timestamp = 0;
  UserId user = 0;
  std::vector<ItemId> items;
  int model = -1;

  bool operator==(const RecommendationEvent&) const = default;
};

struct CtrResult {
  double value = 0.0;
  Timestamp d = 0;
  std::size_t n_events = 0;
  std::size_t n_hits = 0;

  nlohmann::json to_json() const;
};

inline constexpr Timestamp kDefaultCtrWindow = 600;

/**
 * Implicit CTR: the fraction of events whose user interacted with at least
 * one recommended item at some t_j with t <= t_j <= t + d. Each event is
 * judged independently; one click may satisfy several overlapping events.
 * Throws EmptyRecommendationLog, PreconditionError for d < 0 or an event with
 * no items or duplicate items.
 */
CtrResult ictr(std::span<const RecommendationEvent> recs, const InteractionLog& log,
               Timestamp d = kDefaultCtrWindow, unsigned threads = 1);

/**
 * Reads `timestamp,user_id,item_ids[,model]` where item_ids is `|`-separated.
 * Identifiers are resolved against catalog; unknown ones map to kUnknownId.
 * Throws MalformedRow.
 */
std::vector<RecommendationEvent> read_recommendation_log(std::istream& in,
                                                         const Catalog& catalog);

/// Writes the model column only when with_model is set.
void write_recommendation_log(std::ostream& out,
                              std::span<const RecommendationEvent> events,
                              const Catalog& catalog, bool with_model);

}  // namespace recgap

#endif  // RECGAP_ONLINE_METRICS_HPP_
