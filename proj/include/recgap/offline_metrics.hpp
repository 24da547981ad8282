#ifndef RECGAP_OFFLINE_METRICS_HPP_
#define RECGAP_OFFLINE_METRICS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "recgap/data.hpp"
#include "recgap/models.hpp"

namespace recgap {

/// Cross-validation scheme: leave-one-out or leave-last-one-out.
enum class Validation { Loo, Lloo };

/**
 * What to do with a held-out trial whose profile is empty (a user with a
 * single relevant item under LOO, or a user's earliest interactions under
 * LLOO). IncludeWithFallback asks the model for Top_K of the empty set, which
 * every RecModel answers with its global fallback ranking. Skip drops the
 * trial from numerator and denominator.
 */
enum class ColdStart { IncludeWithFallback, Skip };

std::string to_string(Validation val);
Validation parse_validation(std::string_view text);
std::string to_string(ColdStart policy);
ColdStart parse_cold_start(std::string_view text);

struct MetricConfig {
  Validation val = Validation::Loo;
  double beta = 0.0;
  int k = 10;
  ColdStart cold_start = ColdStart::IncludeWithFallback;
};

struct UserContribution {
  UserId user;
  double numerator;
  double denominator;
};

struct RecallResult {
  std::string metric;
  double value = 0.0;
  /// Ascending user id; only users with a positive denominator.
  std::vector<UserContribution> per_user;
  MetricConfig config;
  bool filter_seen = true;

  std::size_t n_users() const { return per_user.size(); }
  nlohmann::json to_json(const Catalog& catalog, bool include_per_user = false) const;
};

/// One held-out (user, item) trial: where the model ranked the item given the
/// trial's profile.
struct Trial {
  ItemId item;
  std::uint32_t rank;  // max_k when the item is outside the model's top max_k
  bool empty_profile;
};

/**
 * Ranks of every held-out item for one (log, model, scheme), computed once at
 * the largest k of interest. Any recall variant at any k <= max_k and any beta
 * is then an aggregation over these trials.
 */
struct HeldOutRanks {
  Validation val = Validation::Loo;
  std::size_t max_k = 0;
  bool filter_seen = true;
  std::vector<UserId> users;
  std::vector<std::vector<Trial>> trials;  // parallel to users
};

HeldOutRanks compute_held_out_ranks(const InteractionLog& log, const RecModel& model,
                                    Validation val, std::size_t max_k,
                                    unsigned threads = 1);

/// pop == nullptr selects the unweighted variants (plain hit counts).
RecallResult aggregate_recall(const HeldOutRanks& ranks, const PopularityTable* pop,
                              double beta, int k, ColdStart cold_start);

/**
 * Values of aggregate_recall for every (beta, k) pair at once, indexed
 * [beta][k]. Bit-identical to calling aggregate_recall per pair; the
 * summation order is the same.
 */
std::vector<std::vector<double>> aggregate_recall_grid(const HeldOutRanks& ranks,
                                                       const PopularityTable& pop,
                                                       std::span<const double> betas,
                                                       std::span<const int> ks,
                                                       ColdStart cold_start);

RecallResult recall_loo(const InteractionLog& log, const RecModel& model, int k,
                        ColdStart cold_start = ColdStart::IncludeWithFallback,
                        unsigned threads = 1);

RecallResult recall_lloo(const InteractionLog& log, const RecModel& model, int k,
                         ColdStart cold_start = ColdStart::IncludeWithFallback,
                         unsigned threads = 1);

RecallResult recall_loo_beta(const InteractionLog& log, const RecModel& model, int k,
                             double beta, const PopularityTable& pop,
                             ColdStart cold_start = ColdStart::IncludeWithFallback,
                             unsigned threads = 1);

RecallResult recall_lloo_beta(const InteractionLog& log, const RecModel& model, int k,
                              double beta, const PopularityTable& pop,
                              ColdStart cold_start = ColdStart::IncludeWithFallback,
                              unsigned threads = 1);

/// Popularity-penalized recall for config.val at config.beta.
RecallResult evaluate_recall(const InteractionLog& log, const RecModel& model,
                             const MetricConfig& config, const PopularityTable& pop,
                             unsigned threads = 1);

/**
 * w(u) = sum_{i in N_u} p(i)^-beta / sum_v sum_{i in N_v} p(i)^-beta.
 * Weights over all users sum to one. Throws UnknownUser, UnknownItem.
 */
double user_weight(UserId user, const RelevantItems& relevant, const PopularityTable& pop,
                   double beta);

}  // namespace recgap

#endif  // RECGAP_OFFLINE_METRICS_HPP_
