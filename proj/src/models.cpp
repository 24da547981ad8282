#include "recgap/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "recgap/io.hpp"
#include "recgap/random.hpp"

namespace recgap {

using nlohmann::json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MfKnn: return "mf_knn";
    case ModelKind::Mf: return "mf";
    case ModelKind::Popularity: return "popularity";
    case ModelKind::Random: return "random";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "mf_knn") return ModelKind::MfKnn;
  if (name == "mf") return ModelKind::Mf;
  if (name == "popularity") return ModelKind::Popularity;
  if (name == "random") return ModelKind::Random;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

ModelSpec ModelSpec::parse(std::string_view text) {
  const auto parts = split(trim(text), ':');
  ModelSpec spec;
  spec.kind = parse_model_kind(trim(parts.front()));
  for (std::size_t p = 1; p < parts.size(); ++p) {
    const auto eq = parts[p].find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("model spec field without '=': " + std::string(parts[p]));
    }
    const auto key = trim(parts[p].substr(0, eq));
    const auto value = parts[p].substr(eq + 1);
    if (key == "f") spec.factors = static_cast<int>(parse_int(value, key));
    else if (key == "lambda") spec.regularization = parse_double(value, key);
    else if (key == "alpha") spec.alpha = parse_double(value, key);
    else if (key == "iters") spec.iterations = static_cast<int>(parse_int(value, key));
    else if (key == "m") spec.neighbors = static_cast<int>(parse_int(value, key));
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "filter") spec.filter_seen = parse_int(value, key) != 0;
    else throw ConfigError("unknown model spec field '" + std::string(key) + "'");
  }
  return spec;
}

std::string ModelSpec::to_string() const {
  std::string s = recgap::to_string(kind);
  if (kind == ModelKind::MfKnn || kind == ModelKind::Mf) {
    s += ":f=" + std::to_string(factors) + ":lambda=" + format_exact(regularization) +
         ":alpha=" + format_exact(alpha) + ":iters=" + std::to_string(iterations);
  }
  if (kind == ModelKind::MfKnn) s += ":m=" + std::to_string(neighbors);
  s += ":seed=" + std::to_string(seed);
  if (!filter_seen) s += ":filter=0";
  return s;
}

// --- ranking ----------------------------------------------------------------

namespace {

// Order: score descending, then popularity descending, then id ascending.
// A null score span means all scores are equal.
struct RankOrder {
  std::span<const double> score;
  std::span<const double> pop;

  bool ahead(ItemId a, ItemId b) const {
    if (!score.empty() && score[a] != score[b]) return score[a] > score[b];
    if (pop[a] != pop[b]) return pop[a] > pop[b];
    return a < b;
  }
};

struct Scratch {
  std::vector<double> score;
  std::vector<char> excluded;
  std::vector<ItemId> candidates;
  std::vector<ItemId> profile;
};

Scratch& scratch(std::size_t n) {
  thread_local Scratch s;
  if (s.score.size() != n) {
    s.score.assign(n, 0.0);
    s.excluded.assign(n, 0);
  }
  return s;
}

// Sorted, deduplicated copy of profile restricted to [0, n).
void normalize_profile(std::span<const ItemId> profile, std::size_t n,
                       std::vector<ItemId>& out) {
  out.clear();
  for (ItemId i : profile) {
    if (i < n) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

std::vector<ItemId> select_top(const RankOrder& order, const std::vector<char>& excluded,
                               std::size_t k, std::vector<ItemId>& candidates) {
  candidates.clear();
  for (std::size_t i = 0; i < excluded.size(); ++i) {
    if (!excluded[i]) candidates.push_back(static_cast<ItemId>(i));
  }
  auto cmp = [&order](ItemId a, ItemId b) { return order.ahead(a, b); };
  const std::size_t take = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), cmp);
  return std::vector<ItemId>(candidates.begin(),
                             candidates.begin() + static_cast<std::ptrdiff_t>(take));
}

std::size_t count_ahead(const RankOrder& order, const std::vector<char>& excluded,
                        ItemId target, std::size_t limit) {
  if (target >= excluded.size() || excluded[target]) return limit;
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < excluded.size(); ++j) {
    if (excluded[j] || j == target) continue;
    if (order.ahead(static_cast<ItemId>(j), target) && ++ahead >= limit) return limit;
  }
  return ahead;
}

void mark_profile(const std::vector<ItemId>& profile, std::vector<char>& excluded,
                  bool on) {
  for (ItemId i : profile) excluded[i] = on ? 1 : 0;
}

}  // namespace

std::size_t RecModel::rank_of(std::span<const ItemId> profile, ItemId target,
                              std::size_t limit) const {
  const auto top = recommend(profile, limit);
  const auto it = std::find(top.begin(), top.end(), target);
  return it == top.end() ? limit : static_cast<std::size_t>(it - top.begin());
}

// --- ALS ----------------------------------------------------------------------

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct SparseRows {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> index;
  std::vector<double> count;
};

// Solves (G + lambda I + sum (c-1) y y^T) x = sum c y for one row of the
// opposite factor.
void solve_row(const RowMatrix& other, const Eigen::MatrixXd& gram, double lambda,
               double alpha, const SparseRows& rows, std::size_t r,
               Eigen::Ref<Eigen::VectorXd> out, Eigen::MatrixXd& a, Eigen::VectorXd& b) {
  a = gram;
  a.diagonal().array() += lambda;
  b.setZero();
  for (std::size_t e = rows.offsets[r]; e < rows.offsets[r + 1]; ++e) {
    const double c = 1.0 + alpha * rows.count[e];
    const auto y = other.row(rows.index[e]).transpose();
    a.noalias() += (c - 1.0) * (y * y.transpose());
    b.noalias() += c * y;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw SingularSystem("Cholesky factorization failed in ALS half-step");
  }
  out = llt.solve(b);
}

double als_loss(const RowMatrix& x, const RowMatrix& y, const SparseRows& by_user,
                double lambda, double alpha) {
  const Eigen::MatrixXd gx = x.transpose() * x;
  const Eigen::MatrixXd gy = y.transpose() * y;
  double loss = (gx.array() * gy.array()).sum();
  for (Eigen::Index u = 0; u < x.rows(); ++u) {
    for (std::size_t e = by_user.offsets[u]; e < by_user.offsets[u + 1]; ++e) {
      const double c = 1.0 + alpha * by_user.count[e];
      const double s = x.row(u).dot(y.row(by_user.index[e]));
      loss += c * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  return loss + lambda * (x.squaredNorm() + y.squaredNorm());
}

}  // namespace

ItemEmbeddings train_implicit_mf(const InteractionLog& log, int factors,
                                 double regularization, double alpha, int iterations,
                                 std::uint64_t seed, AlsTrace* trace) {
  if (log.empty()) throw EmptyLog();
  if (factors < 1) throw PreconditionError("factors must be >= 1");
  if (iterations < 1) throw PreconditionError("iterations must be >= 1");
  if (!(regularization > 0.0)) throw PreconditionError("regularization must be > 0");
  if (!(alpha >= 0.0)) throw PreconditionError("alpha must be >= 0");

  const std::size_t n_items = log.catalog().num_items();
  const auto users = log.users();
  const std::size_t n_users = users.size();

  // Distinct (user, item) cells with their interaction counts.
  SparseRows by_user;
  by_user.offsets.assign(n_users + 1, 0);
  std::vector<std::size_t> item_nnz(n_items + 1, 0);
  std::vector<std::pair<ItemId, double>> cells;
  for (std::size_t r = 0; r < n_users; ++r) {
    cells.clear();
    for (const auto& e : log.history(users[r])) cells.emplace_back(e.item, 1.0);
    std::sort(cells.begin(), cells.end());
    for (std::size_t e = 0; e < cells.size(); ++e) {
      if (!by_user.index.empty() && by_user.offsets[r] < by_user.index.size() &&
          by_user.index.back() == cells[e].first) {
        by_user.count.back() += 1.0;
      } else {
        by_user.index.push_back(cells[e].first);
        by_user.count.push_back(1.0);
        ++item_nnz[cells[e].first + 1];
      }
    }
    by_user.offsets[r + 1] = by_user.index.size();
  }
  SparseRows by_item;
  for (std::size_t i = 0; i < n_items; ++i) item_nnz[i + 1] += item_nnz[i];
  by_item.offsets = item_nnz;
  by_item.index.resize(by_user.index.size());
  by_item.count.resize(by_user.index.size());
  {
    std::vector<std::size_t> cursor(item_nnz.begin(), item_nnz.end() - 1);
    for (std::size_t r = 0; r < n_users; ++r) {
      for (std::size_t e = by_user.offsets[r]; e < by_user.offsets[r + 1]; ++e) {
        const std::size_t slot = cursor[by_user.index[e]]++;
        by_item.index[slot] = static_cast<std::uint32_t>(r);
        by_item.count[slot] = by_user.count[e];
      }
    }
  }

  Rng rng(derive_seed(seed, 0xA15));
  const double scale = 0.01;
  RowMatrix x(static_cast<Eigen::Index>(n_users), factors);
  RowMatrix y(static_cast<Eigen::Index>(n_items), factors);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = scale * rng.normal();
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = scale * rng.normal();

  if (trace) {
    trace->loss.clear();
    trace->loss.push_back(als_loss(x, y, by_user, regularization, alpha));
  }

  Eigen::MatrixXd a(factors, factors);
  Eigen::VectorXd b(factors);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd gy = y.transpose() * y;
    for (std::size_t r = 0; r < n_users; ++r) {
      solve_row(y, gy, regularization, alpha, by_user, r,
                x.row(static_cast<Eigen::Index>(r)).transpose(), a, b);
    }
    if (trace) trace->loss.push_back(als_loss(x, y, by_user, regularization, alpha));
    const Eigen::MatrixXd gx = x.transpose() * x;
    for (std::size_t i = 0; i < n_items; ++i) {
      solve_row(x, gx, regularization, alpha, by_item, i,
                y.row(static_cast<Eigen::Index>(i)).transpose(), a, b);
    }
    if (trace) trace->loss.push_back(als_loss(x, y, by_user, regularization, alpha));
  }

  ItemEmbeddings emb;
  emb.factors = factors;
  emb.regularization = regularization;
  emb.alpha = alpha;
  emb.iterations = iterations;
  emb.values.assign(y.data(), y.data() + y.size());
  for (double v : emb.values) {
    if (!std::isfinite(v)) throw SingularSystem("non-finite item factor");
  }
  return emb;
}

// --- similarity index --------------------------------------------------------

SimilarityIndex::SimilarityIndex(std::vector<std::vector<Neighbor>> neighbors,
                                 std::vector<bool> zero_norm, std::size_t max_neighbors)
    : neighbors_(std::move(neighbors)),
      zero_norm_(std::move(zero_norm)),
      max_neighbors_(max_neighbors) {
  if (neighbors_.size() != zero_norm_.size()) {
    throw PreconditionError("neighbor lists and zero-norm flags differ in size");
  }
}

std::size_t SimilarityIndex::zero_norm_count() const {
  return static_cast<std::size_t>(std::count(zero_norm_.begin(), zero_norm_.end(), true));
}

SimilarityIndex build_similarity_index(const ItemEmbeddings& emb, std::size_t m) {
  if (m < 1) throw PreconditionError("neighbor count m must be >= 1");
  const std::size_t n = emb.num_items();
  const std::size_t f = static_cast<std::size_t>(emb.factors);

  std::vector<double> unit(emb.values.size(), 0.0);
  std::vector<bool> zero(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0.0;
    for (std::size_t d = 0; d < f; ++d) sq += emb.values[i * f + d] * emb.values[i * f + d];
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0)) {
      zero[i] = true;
      continue;
    }
    for (std::size_t d = 0; d < f; ++d) unit[i * f + d] = emb.values[i * f + d] / norm;
  }

  auto before = [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.item < b.item;
  };

  std::vector<std::vector<Neighbor>> lists(n);
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < n; ++i) {
    if (zero[i]) continue;
    all.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || zero[j]) continue;
      double dot = 0.0;
      for (std::size_t d = 0; d < f; ++d) dot += unit[i * f + d] * unit[j * f + d];
      all.push_back({static_cast<ItemId>(j), std::clamp(dot, -1.0, 1.0)});
    }
    const std::size_t take = std::min(m, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take),
                      all.end(), before);
    lists[i].assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return SimilarityIndex(std::move(lists), std::move(zero), m);
}

// --- free ranking functions ---------------------------------------------------

namespace {

void accumulate_scores(const SimilarityIndex& index, const std::vector<ItemId>& profile,
                       std::vector<double>& score) {
  std::fill(score.begin(), score.end(), 0.0);
  for (ItemId i : profile) {
    for (const auto& nb : index.neighbors(i)) score[nb.item] += nb.similarity;
  }
}

}  // namespace

std::vector<ItemId> knn_recommend(const SimilarityIndex& index, const PopularityTable& pop,
                                  std::span<const ItemId> profile, std::size_t k) {
  const std::size_t n = index.num_items();
  if (pop.values().size() != n) {
    throw PreconditionError("similarity index and popularity table differ in size");
  }
  auto& s = scratch(n);
  normalize_profile(profile, n, s.profile);
  accumulate_scores(index, s.profile, s.score);
  mark_profile(s.profile, s.excluded, true);
  auto out = select_top(RankOrder{s.score, pop.values()}, s.excluded, k, s.candidates);
  mark_profile(s.profile, s.excluded, false);
  return out;
}

std::vector<ItemId> popularity_recommend(const PopularityTable& pop,
                                         std::span<const ItemId> profile, std::size_t k) {
  const std::size_t n = pop.values().size();
  auto& s = scratch(n);
  normalize_profile(profile, n, s.profile);
  mark_profile(s.profile, s.excluded, true);
  auto out = select_top(RankOrder{{}, pop.values()}, s.excluded, k, s.candidates);
  mark_profile(s.profile, s.excluded, false);
  return out;
}

std::vector<ItemId> random_recommend(std::size_t catalog_size, std::uint64_t seed,
                                     std::span<const ItemId> profile, std::size_t k) {
  std::vector<ItemId> sorted;
  normalize_profile(profile, catalog_size, sorted);
  std::uint64_t h = splitmix64(seed ^ 0x7A3DULL);
  for (ItemId i : sorted) h = splitmix64(h ^ i);
  Rng rng(h);

  std::vector<ItemId> pool;
  pool.reserve(catalog_size);
  auto it = sorted.begin();
  for (std::size_t i = 0; i < catalog_size; ++i) {
    if (it != sorted.end() && *it == i) {
      ++it;
      continue;
    }
    pool.push_back(static_cast<ItemId>(i));
  }
  const std::size_t take = std::min(k, pool.size());
  for (std::size_t j = 0; j < take; ++j) {
    const std::size_t pick = j + rng.below(pool.size() - j);
    std::swap(pool[j], pool[pick]);
  }
  pool.resize(take);
  return pool;
}

// --- model classes -------------------------------------------------------------

namespace {

Timestamp latest_timestamp(const InteractionLog& log) {
  Timestamp t = 0;
  for (const auto& f : log.interactions()) t = std::max(t, f.timestamp);
  return t;
}

json base_json(const ModelInfo& info, const std::vector<std::string>& items,
               std::span<const double> pop) {
  json j;
  j["format"] = "recgap-model";
  j["version"] = 1;
  j["kind"] = to_string(info.spec.kind);
  j["spec"] = info.spec.to_string();
  j["trained_at"] = info.trained_at;
  j["items"] = items;
  j["popularity"] = std::vector<double>(pop.begin(), pop.end());
  return j;
}

class PopularityModel final : public RecModel {
 public:
  PopularityModel(ModelInfo info, PopularityTable pop)
      : info_(std::move(info)), pop_(std::move(pop)) {}

  std::vector<ItemId> recommend(std::span<const ItemId> profile,
                                std::size_t k) const override {
    return popularity_recommend(pop_, info_.spec.filter_seen ? profile
                                                             : std::span<const ItemId>{},
                                k);
  }

  std::size_t rank_of(std::span<const ItemId> profile, ItemId target,
                      std::size_t limit) const override {
    auto& s = scratch(pop_.values().size());
    normalize_profile(info_.spec.filter_seen ? profile : std::span<const ItemId>{},
                      pop_.values().size(), s.profile);
    mark_profile(s.profile, s.excluded, true);
    const auto r = count_ahead(RankOrder{{}, pop_.values()}, s.excluded, target, limit);
    mark_profile(s.profile, s.excluded, false);
    return r;
  }

  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return pop_.values().size(); }
  json to_json() const override {
    return base_json(info_, pop_.catalog().item_names(), pop_.values());
  }

 private:
  ModelInfo info_;
  PopularityTable pop_;
};

class RandomModel final : public RecModel {
 public:
  RandomModel(ModelInfo info, PopularityTable pop)
      : info_(std::move(info)), pop_(std::move(pop)) {}

  std::vector<ItemId> recommend(std::span<const ItemId> profile,
                                std::size_t k) const override {
    if (!info_.spec.filter_seen) {
      return random_recommend(num_items(), info_.spec.seed, {}, k);
    }
    return random_recommend(num_items(), info_.spec.seed, profile, k);
  }

  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return pop_.values().size(); }
  json to_json() const override {
    return base_json(info_, pop_.catalog().item_names(), pop_.values());
  }

 private:
  ModelInfo info_;
  PopularityTable pop_;
};

class KnnModel final : public RecModel {
 public:
  KnnModel(ModelInfo info, SimilarityIndex index, PopularityTable pop)
      : info_(std::move(info)), index_(std::move(index)), pop_(std::move(pop)) {
    info_.zero_norm_items = index_.zero_norm_count();
    info_.truncated_neighbors = index_.max_neighbors() + 1 < index_.num_items();
  }

  std::vector<ItemId> recommend(std::span<const ItemId> profile,
                                std::size_t k) const override {
    auto& s = prepare(profile);
    auto out = select_top(RankOrder{s.score, pop_.values()}, s.excluded, k, s.candidates);
    release(s);
    return out;
  }

  std::size_t rank_of(std::span<const ItemId> profile, ItemId target,
                      std::size_t limit) const override {
    auto& s = prepare(profile);
    const auto r = count_ahead(RankOrder{s.score, pop_.values()}, s.excluded, target, limit);
    release(s);
    return r;
  }

  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return index_.num_items(); }

  json to_json() const override {
    json j = base_json(info_, pop_.catalog().item_names(), pop_.values());
    json lists = json::array();
    for (std::size_t i = 0; i < index_.num_items(); ++i) {
      json row = json::array();
      for (const auto& nb : index_.neighbors(static_cast<ItemId>(i))) {
        row.push_back(json::array({nb.item, nb.similarity}));
      }
      lists.push_back(std::move(row));
    }
    j["neighbors"] = std::move(lists);
    std::vector<int> zero;
    for (std::size_t i = 0; i < index_.num_items(); ++i) {
      zero.push_back(index_.zero_norm(static_cast<ItemId>(i)) ? 1 : 0);
    }
    j["zero_norm"] = zero;
    j["max_neighbors"] = index_.max_neighbors();
    return j;
  }

 private:
  Scratch& prepare(std::span<const ItemId> profile) const {
    auto& s = scratch(index_.num_items());
    normalize_profile(profile, index_.num_items(), s.profile);
    accumulate_scores(index_, s.profile, s.score);
    if (info_.spec.filter_seen) mark_profile(s.profile, s.excluded, true);
    return s;
  }
  void release(Scratch& s) const { mark_profile(s.profile, s.excluded, false); }

  ModelInfo info_;
  SimilarityIndex index_;
  PopularityTable pop_;
};

// Scores items by y_j . x where x is the least-squares fold-in of the profile.
class MfModel final : public RecModel {
 public:
  MfModel(ModelInfo info, ItemEmbeddings emb, PopularityTable pop)
      : info_(std::move(info)), emb_(std::move(emb)), pop_(std::move(pop)) {
    const auto f = static_cast<Eigen::Index>(emb_.factors);
    gram_ = Eigen::MatrixXd::Zero(f, f);
    for (std::size_t i = 0; i < emb_.num_items(); ++i) {
      const Eigen::Map<const Eigen::VectorXd> y(emb_.row(static_cast<ItemId>(i)).data(), f);
      gram_.noalias() += y * y.transpose();
    }
    std::size_t zero = 0;
    for (std::size_t i = 0; i < emb_.num_items(); ++i) {
      const auto r = emb_.row(static_cast<ItemId>(i));
      if (std::all_of(r.begin(), r.end(), [](double v) { return v == 0.0; })) ++zero;
    }
    info_.zero_norm_items = zero;
  }

  std::vector<ItemId> recommend(std::span<const ItemId> profile,
                                std::size_t k) const override {
    auto& s = prepare(profile);
    auto out = select_top(RankOrder{s.score, pop_.values()}, s.excluded, k, s.candidates);
    if (info_.spec.filter_seen) mark_profile(s.profile, s.excluded, false);
    return out;
  }

  std::size_t rank_of(std::span<const ItemId> profile, ItemId target,
                      std::size_t limit) const override {
    auto& s = prepare(profile);
    const auto r = count_ahead(RankOrder{s.score, pop_.values()}, s.excluded, target, limit);
    if (info_.spec.filter_seen) mark_profile(s.profile, s.excluded, false);
    return r;
  }

  const ModelInfo& info() const override { return info_; }
  std::size_t num_items() const override { return emb_.num_items(); }

  json to_json() const override {
    json j = base_json(info_, pop_.catalog().item_names(), pop_.values());
    j["factors"] = emb_.factors;
    j["embeddings"] = emb_.values;
    return j;
  }

 private:
  Scratch& prepare(std::span<const ItemId> profile) const {
    const std::size_t n = emb_.num_items();
    const auto f = static_cast<Eigen::Index>(emb_.factors);
    auto& s = scratch(n);
    normalize_profile(profile, n, s.profile);
    std::fill(s.score.begin(), s.score.end(), 0.0);
    if (!s.profile.empty()) {
      Eigen::MatrixXd a = gram_;
      a.diagonal().array() += emb_.regularization;
      Eigen::VectorXd b = Eigen::VectorXd::Zero(f);
      for (ItemId i : s.profile) {
        const Eigen::Map<const Eigen::VectorXd> y(emb_.row(i).data(), f);
        a.noalias() += emb_.alpha * (y * y.transpose());
        b.noalias() += (1.0 + emb_.alpha) * y;
      }
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() != Eigen::Success) throw ModelFailure("profile fold-in is singular");
      const Eigen::VectorXd x = llt.solve(b);
      for (std::size_t j = 0; j < n; ++j) {
        const Eigen::Map<const Eigen::VectorXd> y(emb_.row(static_cast<ItemId>(j)).data(), f);
        s.score[j] = y.dot(x);
      }
    }
    if (info_.spec.filter_seen) mark_profile(s.profile, s.excluded, true);
    return s;
  }

  ModelInfo info_;
  ItemEmbeddings emb_;
  PopularityTable pop_;
  Eigen::MatrixXd gram_;
};

void validate(const ModelSpec& spec) {
  if (spec.kind == ModelKind::MfKnn || spec.kind == ModelKind::Mf) {
    if (spec.factors < 1) throw PreconditionError("f must be >= 1");
    if (spec.iterations < 1) throw PreconditionError("iters must be >= 1");
    if (!(spec.regularization > 0.0)) throw PreconditionError("lambda must be > 0");
    if (!(spec.alpha >= 0.0)) throw PreconditionError("alpha must be >= 0");
  }
  if (spec.kind == ModelKind::MfKnn && spec.neighbors < 1) {
    throw PreconditionError("m must be >= 1");
  }
}

}  // namespace

std::unique_ptr<RecModel> train_model(const ModelSpec& spec, const InteractionLog& log) {
  validate(spec);
  if (log.empty()) throw EmptyLog();
  ModelInfo info;
  info.spec = spec;
  info.trained_at = latest_timestamp(log);
  PopularityTable pop = compute_popularity(log);
  switch (spec.kind) {
    case ModelKind::Popularity:
      return std::make_unique<PopularityModel>(std::move(info), std::move(pop));
    case ModelKind::Random:
      return std::make_unique<RandomModel>(std::move(info), std::move(pop));
    case ModelKind::MfKnn: {
      auto emb = train_implicit_mf(log, spec.factors, spec.regularization, spec.alpha,
                                   spec.iterations, spec.seed);
      auto index = build_similarity_index(emb, static_cast<std::size_t>(spec.neighbors));
      return std::make_unique<KnnModel>(std::move(info), std::move(index), std::move(pop));
    }
    case ModelKind::Mf: {
      auto emb = train_implicit_mf(log, spec.factors, spec.regularization, spec.alpha,
                                   spec.iterations, spec.seed);
      return std::make_unique<MfModel>(std::move(info), std::move(emb), std::move(pop));
    }
  }
  throw PreconditionError("unhandled model kind");
}

void save_model(const RecModel& model, const std::string& path) {
  write_file_atomic(path, model.to_json().dump() + "\n");
}

std::unique_ptr<RecModel> model_from_json(const json& j, const CatalogPtr& catalog) {
  try {
    if (j.at("format") != "recgap-model") throw ModelFailure("not a recgap model file");
    if (j.at("version") != 1) throw ModelFailure("unsupported model file version");
    ModelInfo info;
    info.spec = ModelSpec::parse(j.at("spec").get<std::string>());
    info.trained_at = j.at("trained_at").get<Timestamp>();

    const auto names = j.at("items").get<std::vector<std::string>>();
    const auto stored_pop = j.at("popularity").get<std::vector<double>>();
    if (stored_pop.size() != names.size()) throw ModelFailure("popularity length mismatch");
    const std::size_t n = catalog->num_items();
    std::vector<std::int64_t> remap(names.size(), -1);
    for (std::size_t s = 0; s < names.size(); ++s) {
      if (auto id = catalog->find_item(names[s])) remap[s] = *id;
    }
    std::vector<double> pop(n, 0.0);
    for (std::size_t s = 0; s < names.size(); ++s) {
      if (remap[s] >= 0) pop[static_cast<std::size_t>(remap[s])] = stored_pop[s];
    }
    PopularityTable table(catalog, std::move(pop));

    switch (info.spec.kind) {
      case ModelKind::Popularity:
        return std::make_unique<PopularityModel>(std::move(info), std::move(table));
      case ModelKind::Random:
        return std::make_unique<RandomModel>(std::move(info), std::move(table));
      case ModelKind::MfKnn: {
        const auto& lists = j.at("neighbors");
        const auto& zero = j.at("zero_norm");
        std::vector<std::vector<Neighbor>> mapped(n);
        std::vector<bool> zero_norm(n, true);
        for (std::size_t s = 0; s < names.size(); ++s) {
          if (remap[s] < 0) continue;
          const auto target = static_cast<std::size_t>(remap[s]);
          zero_norm[target] = zero.at(s).get<int>() != 0;
          for (const auto& entry : lists.at(s)) {
            const auto other = entry.at(0).get<std::size_t>();
            if (other >= names.size() || remap[other] < 0) continue;
            mapped[target].push_back(
                {static_cast<ItemId>(remap[other]), entry.at(1).get<double>()});
          }
        }
        SimilarityIndex index(std::move(mapped), std::move(zero_norm),
                              j.at("max_neighbors").get<std::size_t>());
        return std::make_unique<KnnModel>(std::move(info), std::move(index), std::move(table));
      }
      case ModelKind::Mf: {
        ItemEmbeddings emb;
        emb.factors = j.at("factors").get<int>();
        emb.regularization = info.spec.regularization;
        emb.alpha = info.spec.alpha;
        emb.iterations = info.spec.iterations;
        const auto stored = j.at("embeddings").get<std::vector<double>>();
        const auto f = static_cast<std::size_t>(emb.factors);
        if (f == 0 || stored.size() != names.size() * f) {
          throw ModelFailure("embedding matrix has the wrong shape");
        }
        emb.values.assign(n * f, 0.0);
        for (std::size_t s = 0; s < names.size(); ++s) {
          if (remap[s] < 0) continue;
          std::copy_n(stored.begin() + static_cast<std::ptrdiff_t>(s * f), f,
                      emb.values.begin() + static_cast<std::ptrdiff_t>(
                                               static_cast<std::size_t>(remap[s]) * f));
        }
        return std::make_unique<MfModel>(std::move(info), std::move(emb), std::move(table));
      }
    }
  } catch (const json::exception& e) {
    throw ModelFailure(std::string("malformed model file: ") + e.what());
  }
  throw ModelFailure("unhandled model kind");
}

std::unique_ptr<RecModel> load_model(const std::string& path, const CatalogPtr& catalog) {
  return model_from_json(json::parse(read_file(path)), catalog);
}

}  // namespace recgap
