#ifndef RECGAP_MODELS_HPP_
#define RECGAP_MODELS_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "recgap/data.hpp"

namespace recgap {

enum class ModelKind { MfKnn, Mf, Popularity, Random };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/**
 * Hyperparameters of one candidate model.
 *
 * Textual form: `kind[:key=value]...`, e.g.
 * `mf_knn:f=16:lambda=0.1:alpha=10:iters=8:m=100:seed=3`.
 */
struct ModelSpec {
  ModelKind kind = ModelKind::MfKnn;
  int factors = 16;
  double regularization = 0.1;
  double alpha = 10.0;
  int iterations = 10;
  int neighbors = 100;
  std::uint64_t seed = 0;
  bool filter_seen = true;

  static ModelSpec parse(std::string_view text);
  /// Canonical textual form; parse(to_string()) reproduces the spec.
  std::string to_string() const;

  bool operator==(const ModelSpec&) const = default;
};

struct ModelInfo {
  ModelSpec spec;
  Timestamp trained_at = 0;  // latest timestamp seen in training
  std::size_t zero_norm_items = 0;
  bool truncated_neighbors = false;
};

/**
 * Profile-conditioned Top-K recommender.
 *
 * Contract for every implementation:
 *  - output has no duplicates and is deterministic for a fixed model and
 *    profile;
 *  - with seen-item filtering on, no profile item is returned;
 *  - an empty profile yields the global fallback ranking, never an error;
 *  - |output| = min(k, catalog items not filtered);
 *  - recommend(M, k) is a prefix of recommend(M, k + 1).
 */
class RecModel {
 public:
  virtual ~RecModel() = default;

  virtual std::vector<ItemId> recommend(std::span<const ItemId> profile,
                                        std::size_t k) const = 0;

  /// Position of target within recommend(profile, limit), or limit if absent.
  virtual std::size_t rank_of(std::span<const ItemId> profile, ItemId target,
                              std::size_t limit) const;

  virtual const ModelInfo& info() const = 0;
  virtual std::size_t num_items() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

// --- implicit matrix factorization -----------------------------------------

struct ItemEmbeddings {
  int factors = 0;
  double regularization = 0.0;
  double alpha = 0.0;
  int iterations = 0;
  /// num_items x factors, row-major.
  std::vector<double> values;

  std::size_t num_items() const {
    return factors > 0 ? values.size() / static_cast<std::size_t>(factors) : 0;
  }
  std::span<const double> row(ItemId i) const {
    return std::span<const double>(values).subspan(
        static_cast<std::size_t>(i) * factors, static_cast<std::size_t>(factors));
  }
};

/// Loss after initialization and after every half-step (user, then item).
struct AlsTrace {
  std::vector<double> loss;
};

/**
 * Implicit-feedback ALS with confidence 1 + alpha * count(u, i) on the
 * binarized interaction matrix. Each half-step solves its weighted
 * least-squares subproblem exactly, so the loss never increases.
 */
ItemEmbeddings train_implicit_mf(const InteractionLog& log, int factors,
                                 double regularization, double alpha,
                                 int iterations, std::uint64_t seed,
                                 AlsTrace* trace = nullptr);

struct Neighbor {
  ItemId item;
  double similarity;

  bool operator==(const Neighbor&) const = default;
};

class SimilarityIndex {
 public:
  SimilarityIndex() = default;
  SimilarityIndex(std::vector<std::vector<Neighbor>> neighbors,
                  std::vector<bool> zero_norm, std::size_t max_neighbors);

  std::size_t num_items() const { return neighbors_.size(); }
  std::span<const Neighbor> neighbors(ItemId i) const { return neighbors_.at(i); }
  bool zero_norm(ItemId i) const { return zero_norm_.at(i); }
  std::size_t zero_norm_count() const;
  std::size_t max_neighbors() const { return max_neighbors_; }

  bool operator==(const SimilarityIndex&) const = default;

 private:
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<bool> zero_norm_;
  std::size_t max_neighbors_ = 0;
};

/// Exact top-m cosine neighbors per item, sorted by similarity descending and
/// ascending id on ties. Zero-norm items get empty lists and are nobody's
/// neighbor.
SimilarityIndex build_similarity_index(const ItemEmbeddings& emb, std::size_t m);

/// Item-kNN ranking: score(j) = sum over profile items i of cos(i, j) taken
/// from i's neighbor list. Ordered by score, then popularity, then id.
std::vector<ItemId> knn_recommend(const SimilarityIndex& index,
                                  const PopularityTable& pop,
                                  std::span<const ItemId> profile, std::size_t k);

std::vector<ItemId> popularity_recommend(const PopularityTable& pop,
                                         std::span<const ItemId> profile,
                                         std::size_t k);

/// Uniform sample without replacement from the catalog minus the profile.
/// Deterministic in (seed, profile as a set).
std::vector<ItemId> random_recommend(std::size_t catalog_size, std::uint64_t seed,
                                     std::span<const ItemId> profile, std::size_t k);

// --- model objects ----------------------------------------------------------

/// Trains the model described by spec on log. Throws EmptyLog,
/// PreconditionError for invalid hyperparameters.
std::unique_ptr<RecModel> train_model(const ModelSpec& spec, const InteractionLog& log);

/// Serialized container: {"format": "recgap-model", "version": 1, ...}.
void save_model(const RecModel& model, const std::string& path);
/// Items are matched by name against catalog; unknown items are dropped.
std::unique_ptr<RecModel> model_from_json(const nlohmann::json& j,
                                          const CatalogPtr& catalog);
std::unique_ptr<RecModel> load_model(const std::string& path, const CatalogPtr& catalog);

}  // namespace recgap

#endif  // RECGAP_MODELS_HPP_
