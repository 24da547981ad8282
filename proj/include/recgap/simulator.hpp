#ifndef RECGAP_SIMULATOR_HPP_
#define RECGAP_SIMULATOR_HPP_

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "recgap/data.hpp"
#include "recgap/models.hpp"
#include "recgap/online_metrics.hpp"

namespace recgap {

inline constexpr Timestamp kDay = 86400;

/**
 * Parameters of a simulated recommender world.
 *
 * Users have latent taste vectors that rotate slowly (drift_rate radians per
 * simulated day); items have unit latent vectors. A session exposes items
 * with Zipf probabilities over a hidden attractiveness ranking that is
 * independent of taste, and each exposure becomes an interaction with
 * probability logistic(click_sharpness * (taste . item - click_threshold)).
 */
struct WorldConfig {
  std::size_t n_users = 2000;
  std::size_t n_items = 200;
  int latent_dim = 8;
  double zipf_exponent = 1.0;
  double click_sharpness = 3.0;
  double click_threshold = 1.0;
  double position_decay = 0.85;
  double session_rate = 1.0;  // sessions per user per simulated day
  Timestamp horizon = 18 * kDay;
  int exposures_per_session = 8;
  int organic_exposures = 2;  // exposures outside the recommendation slots, live phase
  double drift_rate = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
};

/// The hidden preference model. Never visible to recommenders.
class GroundTruth {
 public:
  explicit GroundTruth(const WorldConfig& cfg);

  std::size_t num_users() const { return n_users_; }
  std::size_t num_items() const { return n_items_; }

  double preference(UserId u, ItemId i, Timestamp t) const;
  double click_probability(UserId u, ItemId i, Timestamp t) const;
  /// Item exposed by the popularity-biased browsing process for uniform draw x.
  ItemId sample_exposure(double x) const;
  /// Position of item i in the attractiveness ranking (0 = most exposed).
  std::size_t attractiveness_rank(ItemId i) const { return rank_[i]; }
  /// True top-k by current preference, excluding profile (sorted, distinct).
  std::vector<ItemId> top_k(UserId u, Timestamp t, std::span<const ItemId> profile,
                            std::size_t k) const;

 private:
  void taste(UserId u, Timestamp t, std::vector<double>& out) const;

  std::size_t n_users_, n_items_;
  int dim_;
  double sharpness_, threshold_, drift_rate_;
  std::vector<double> base_, drift_, items_;
  std::vector<std::size_t> rank_;
  std::vector<double> exposure_cdf_;
  std::vector<ItemId> by_rank_;
};

/// Catalog with users u000000.. and items i00000.., zero padded so that id
/// order and name order agree.
CatalogPtr make_world_catalog(const WorldConfig& cfg);

/// Seeded logged data with strictly increasing global timestamps in
/// [0, horizon + n_interactions).
InteractionLog generate_history(const WorldConfig& cfg, unsigned threads = 1);

/// Sticky, hash-based A/B bucket in [0, models).
std::size_t assign_model(std::string_view user, std::size_t models, std::uint64_t seed);

/// A model taking part in the live phase: a trainable spec, or the
/// ground-truth oracle that serves each user's true top-k.
struct Candidate {
  bool ground_truth_oracle = false;
  ModelSpec spec;

  static Candidate parse(std::string_view text);
  std::string tag() const;
};

struct LiveConfig {
  Timestamp horizon = 18 * kDay;
  Timestamp retrain_every = 6 * 3600;
  std::size_t k = 10;
  Timestamp session_length = 300;
  std::uint64_t assignment_seed = 0;
  unsigned threads = 1;

  nlohmann::json to_json() const;
};

struct LiveRun {
  Timestamp start = 0;
  std::vector<RecommendationEvent> events;  // tagged with candidate index
  InteractionLog interactions;               // live interactions only
  std::vector<Timestamp> retrain_instants;
  /// Events per candidate.
  std::vector<std::size_t> traffic;
};

/**
 * Serves the candidates to users in simulated time. Users are bound to a
 * candidate by assign_model; each session gets one top-k list from the user's
 * current profile, then clicks are drawn from the ground truth with
 * geometric position decay, followed by organic exposures. Every
 * retrain_every seconds each trainable candidate is refit on the history plus
 * live interactions timestamped strictly before the retrain instant.
 *
 * initial, when non-empty, supplies the models already trained on history
 * (nullptr for the oracle); otherwise they are trained here.
 */
LiveRun run_live_phase(const InteractionLog& history, std::span<const Candidate> candidates,
                       const WorldConfig& cfg, const LiveConfig& live,
                       std::vector<std::shared_ptr<const RecModel>> initial = {});

/// Both logs on the same catalog, concatenated.
InteractionLog merge_logs(const InteractionLog& a, const InteractionLog& b);

}  // namespace recgap

#endif  // RECGAP_SIMULATOR_HPP_
