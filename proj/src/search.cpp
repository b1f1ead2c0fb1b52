#include "mtgbn/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "mtgbn/rng.hpp"

namespace mtgbn {

void SearchConfig::validate() const {
  if (max_parents < 0) throw ConfigError("search: max_parents must be non-negative");
  if (max_iters < 1) throw ConfigError("search: max_iters must be positive");
  if (restarts < 0) throw ConfigError("search: restarts must be non-negative");
}

namespace {

constexpr double kImprovementTol = 1e-9;

using ParentSets = std::vector<std::vector<int>>;

// Subset memo key; bitmask for p <= 64, sorted-vector map fallback above that.
class SubsetMemo {
 public:
  explicit SubsetMemo(int p) : use_mask_(p <= 64) {}

  template <typename Fn>
  double get(const std::vector<int>& subset, Fn&& compute) {
    if (use_mask_) {
      std::uint64_t mask = 0;
      for (int v : subset) mask |= (1ULL << v);
      auto it = by_mask_.find(mask);
      if (it != by_mask_.end()) return it->second;
      double value = compute();
      by_mask_.emplace(mask, value);
      return value;
    }
    auto it = by_set_.find(subset);
    if (it != by_set_.end()) return it->second;
    double value = compute();
    by_set_.emplace(subset, value);
    return value;
  }

 private:
  bool use_mask_;
  std::unordered_map<std::uint64_t, double> by_mask_;
  std::map<std::vector<int>, double> by_set_;
};

// Objective evaluated on parent sets; implementations memoize aggressively so the
// same structure scored twice costs only lookups.
class DagScorer {
 public:
  virtual ~DagScorer() = default;
  virtual double score(const ParentSets& parents) = 0;
};

// Moral graph assembled straight from parent lists (identical edge set to
// moralize(Dag) for the same structure).
UGraph moral_from_parents(const std::vector<std::string>& names, const ParentSets& parents) {
  UGraph g(names);
  for (int child = 0; child < static_cast<int>(parents.size()); ++child) {
    const auto& ps = parents[child];
    for (int p : ps) g.add_edge(p, child);
    for (size_t i = 0; i < ps.size(); ++i) {
      for (size_t j = i + 1; j < ps.size(); ++j) g.add_edge(ps[i], ps[j]);
    }
  }
  return g;
}

// Monte-Carlo scorer over a fixed set of covariance draws.
class McScorer : public DagScorer {
 public:
  McScorer(const TaskData& task, const std::vector<SpdMatrix>& sigmas,
           const HyperParams& hp, const std::vector<std::string>& names)
      : task_(task), sigmas_(sigmas), hp_(hp), names_(names),
        data_memo_(hp.p), prior_memo_(hp.p) {
    hp_.validate();
    posteriors_.reserve(sigmas_.size());
    for (const auto& s : sigmas_) {
      if (s.dim() != hp_.p) throw DimensionMismatch("mc_score: sample dimension mismatch");
      posteriors_.emplace_back(s.mat() + static_cast<double>(task_.n) * task_.s);
    }
  }

  // Sum over draws of the family/parent marginal factor for one subset.
  double data_sum(const std::vector<int>& subset) {
    if (subset.empty()) return 0.0;
    return data_memo_.get(subset, [&] {
      double out = 0.0;
      for (size_t l = 0; l < sigmas_.size(); ++l) {
        out += marginal_family_term(sigmas_[l], posteriors_[l], task_.n, subset, hp_.nu0);
      }
      return out;
    });
  }

  // Sum over draws of the prior clique/separator factor for one subset.
  double prior_sum(const std::vector<int>& subset) {
    if (subset.empty()) return 0.0;
    return prior_memo_.get(subset, [&] {
      double out = 0.0;
      for (const auto& s : sigmas_) out += hiw_subset_term(s, subset, hp_.nu0);
      return out;
    });
  }

  double score(const ParentSets& parents) override {
    double out = 0.0;
    for (int k = 0; k < hp_.p; ++k) {
      std::vector<int> family = parents[k];
      family.insert(std::lower_bound(family.begin(), family.end(), k), k);
      out += data_sum(family) - data_sum(parents[k]);
    }
    const CliqueSequence cs = clique_sequence(triangulate(moral_from_parents(names_, parents)));
    for (const auto& c : cs.cliques) out += prior_sum(c);
    for (const auto& s : cs.separators) out -= prior_sum(s);
    return out;
  }

 private:
  const TaskData& task_;
  const std::vector<SpdMatrix>& sigmas_;
  HyperParams hp_;
  std::vector<std::string> names_;
  std::vector<SpdMatrix> posteriors_;
  SubsetMemo data_memo_, prior_memo_;
};

// Gaussian BIC scorer (zero-mean regressions, no intercept).
class BicScorer : public DagScorer {
 public:
  explicit BicScorer(const TaskData& task) : data_(task.data), n_(task.n) {
    if (data_.rows() == 0) {
      throw DomainError("learn_sig: task has no raw data rows");
    }
    p_ = static_cast<int>(data_.cols());
    memos_.reserve(p_);
    for (int k = 0; k < p_; ++k) memos_.emplace_back(p_);
  }

  double node_term(int k, const std::vector<int>& parents) {
    return memos_[k].get(parents, [&] {
      const Eigen::VectorXd y = data_.col(k);
      double rss;
      if (parents.empty()) {
        rss = y.squaredNorm();
      } else {
        Eigen::MatrixXd x(n_, parents.size());
        for (size_t j = 0; j < parents.size(); ++j) x.col(j) = data_.col(parents[j]);
        // Rank-revealing solve keeps redundant or constant parents harmless.
        const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
        rss = (y - x * beta).squaredNorm();
      }
      // Floor keeps exactly-collinear or constant columns finite; constant across
      // structures, so score differences stay meaningful.
      const double var = std::max(rss / n_, 1e-100);
      const double loglik = -0.5 * n_ * (std::log(2.0 * M_PI * var) + 1.0);
      const double penalty = 0.5 * (static_cast<double>(parents.size()) + 1.0) * std::log(n_);
      return loglik - penalty;
    });
  }

  double score(const ParentSets& parents) override {
    double out = 0.0;
    for (int k = 0; k < p_; ++k) out += node_term(k, parents[k]);
    return out;
  }

 private:
  const Eigen::MatrixXd& data_;
  int n_;
  int p_;
  std::vector<SubsetMemo> memos_;
};

struct Move {
  enum Kind { kDelete = 0, kReverse = 1, kAdd = 2 };
  Kind kind;
  int src, dst;
};

// True iff a directed path src -> ... -> dst exists, optionally ignoring one edge.
bool has_path(const ParentSets& parents, int src, int dst, int skip_src = -1,
              int skip_dst = -1) {
  const int p = static_cast<int>(parents.size());
  std::vector<std::vector<int>> children(p);
  for (int child = 0; child < p; ++child) {
    for (int parent : parents[child]) {
      if (parent == skip_src && child == skip_dst) continue;
      children[parent].push_back(child);
    }
  }
  std::vector<char> seen(p, 0);
  std::vector<int> stack{src};
  seen[src] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == dst) return true;
    for (int c : children[v]) {
      if (!seen[c]) {
        seen[c] = 1;
        stack.push_back(c);
      }
    }
  }
  return false;
}

bool contains(const std::vector<int>& sorted, int v) {
  return std::binary_search(sorted.begin(), sorted.end(), v);
}

void insert_sorted(std::vector<int>& sorted, int v) {
  sorted.insert(std::lower_bound(sorted.begin(), sorted.end(), v), v);
}

void erase_sorted(std::vector<int>& sorted, int v) {
  sorted.erase(std::lower_bound(sorted.begin(), sorted.end(), v));
}

class SkeletonFilter {
 public:
  SkeletonFilter(int p, const std::optional<std::vector<std::pair<int, int>>>& pairs)
      : restrict_(pairs.has_value()), allowed_(restrict_ ? p * p : 0, 0), p_(p) {
    if (!restrict_) return;
    for (auto [a, b] : *pairs) {
      if (a < 0 || a >= p || b < 0 || b >= p || a == b) {
        throw ConfigError("search: candidate skeleton pair out of range");
      }
      allowed_[a * p_ + b] = allowed_[b * p_ + a] = 1;
    }
  }
  bool allows(int a, int b) const { return !restrict_ || allowed_[a * p_ + b] != 0; }

 private:
  bool restrict_;
  std::vector<unsigned char> allowed_;
  int p_;
};

// One greedy climb: repeatedly apply the best improving move. Moves are scanned
// deletes first, then reverses, then adds, each in (src, dst) order, and a later
// move must beat the incumbent by more than the tolerance — so among near-equal
// moves the earliest in that canonical order wins, deterministically.
std::pair<ParentSets, std::vector<double>> climb(DagScorer& scorer, ParentSets parents,
                                                 const SearchConfig& cfg,
                                                 const SkeletonFilter& skeleton) {
  const int p = static_cast<int>(parents.size());
  std::vector<double> trace;
  double current = scorer.score(parents);
  trace.push_back(current);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    bool found = false;
    Move best_move{Move::kDelete, -1, -1};
    double best_score = current;

    auto consider = [&](Move mv, ParentSets& scratch) {
      const double s = scorer.score(scratch);
      if (s > best_score + kImprovementTol) {
        best_score = s;
        best_move = mv;
        found = true;
      }
    };

    ParentSets scratch = parents;
    // Deletions.
    for (int src = 0; src < p; ++src) {
      for (int dst = 0; dst < p; ++dst) {
        if (src == dst || !contains(parents[dst], src)) continue;
        erase_sorted(scratch[dst], src);
        consider({Move::kDelete, src, dst}, scratch);
        insert_sorted(scratch[dst], src);
      }
    }
    // Reversals: src->dst becomes dst->src.
    for (int src = 0; src < p; ++src) {
      for (int dst = 0; dst < p; ++dst) {
        if (src == dst || !contains(parents[dst], src)) continue;
        if (static_cast<int>(parents[src].size()) + 1 > cfg.max_parents) continue;
        if (has_path(parents, src, dst, src, dst)) continue;  // would create a cycle
        erase_sorted(scratch[dst], src);
        insert_sorted(scratch[src], dst);
        consider({Move::kReverse, src, dst}, scratch);
        erase_sorted(scratch[src], dst);
        insert_sorted(scratch[dst], src);
      }
    }
    // Additions.
    for (int src = 0; src < p; ++src) {
      for (int dst = 0; dst < p; ++dst) {
        if (src == dst || contains(parents[dst], src) || contains(parents[src], dst)) continue;
        if (!skeleton.allows(src, dst)) continue;
        if (static_cast<int>(parents[dst].size()) + 1 > cfg.max_parents) continue;
        if (has_path(parents, dst, src)) continue;  // would create a cycle
        insert_sorted(scratch[dst], src);
        consider({Move::kAdd, src, dst}, scratch);
        erase_sorted(scratch[dst], src);
      }
    }

    if (!found) break;
    switch (best_move.kind) {
      case Move::kDelete:
        erase_sorted(parents[best_move.dst], best_move.src);
        break;
      case Move::kReverse:
        erase_sorted(parents[best_move.dst], best_move.src);
        insert_sorted(parents[best_move.src], best_move.dst);
        break;
      case Move::kAdd:
        insert_sorted(parents[best_move.dst], best_move.src);
        break;
    }
    current = best_score;
    trace.push_back(current);
  }
  return {std::move(parents), std::move(trace)};
}

// Random DAG for restart climbs: random order, each allowed pair oriented along
// the order and kept with probability 1/4, honoring parent and skeleton limits.
ParentSets random_restart(int p, const SearchConfig& cfg, const SkeletonFilter& skeleton,
                          Rng& rng) {
  std::vector<int> position(p);
  for (int i = 0; i < p; ++i) position[i] = i;
  for (int i = p - 1; i > 0; --i) {
    std::swap(position[i], position[rng.below(i + 1)]);
  }
  ParentSets parents(p);
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      if (!skeleton.allows(a, b)) continue;
      if (rng.uniform() >= 0.25) continue;
      int src = position[a] < position[b] ? a : b;
      int dst = src == a ? b : a;
      if (static_cast<int>(parents[dst].size()) < cfg.max_parents) {
        insert_sorted(parents[dst], src);
      }
    }
  }
  return parents;
}

ScoredDag search_with_restarts(DagScorer& scorer, const std::vector<std::string>& names,
                               const ParentSets& init, const SearchConfig& cfg) {
  cfg.validate();
  const int p = static_cast<int>(init.size());
  for (const auto& ps : init) {
    if (static_cast<int>(ps.size()) > cfg.max_parents) {
      throw ConfigError("search: init structure violates max_parents");
    }
  }
  const SkeletonFilter skeleton(p, cfg.candidate_skeleton);
  Rng rng(cfg.seed);

  auto [best_parents, best_trace] = climb(scorer, init, cfg, skeleton);
  double best = best_trace.back();
  for (int r = 0; r < cfg.restarts; ++r) {
    Rng restart_rng = rng.derive(r + 1);
    auto start = random_restart(p, cfg, skeleton, restart_rng);
    auto [parents, trace] = climb(scorer, std::move(start), cfg, skeleton);
    if (trace.back() > best + kImprovementTol) {
      best = trace.back();
      best_parents = std::move(parents);
      best_trace = std::move(trace);
    }
  }

  std::vector<std::pair<int, int>> edges;
  for (int child = 0; child < p; ++child) {
    for (int parent : best_parents[child]) edges.emplace_back(parent, child);
  }
  ScoredDag out{Dag(names, edges), 0.0, std::move(best_trace)};
  // Recompute from the final structure so the reported score is exactly the
  // objective of the returned dag.
  out.score = scorer.score(out.dag.parent_sets());
  return out;
}

std::vector<std::string> default_names(int p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (int i = 1; i <= p; ++i) names.push_back("X" + std::to_string(i));
  return names;
}

}  // namespace

double mc_score(const Dag& dag, const TaskData& task,
                const std::vector<SpdMatrix>& sigma_samples, const HyperParams& hp) {
  if (sigma_samples.empty()) throw DomainError("mc_score: need at least one draw");
  if (dag.num_nodes() != task.dim()) throw DimensionMismatch("mc_score: dimension mismatch");
  McScorer scorer(task, sigma_samples, hp, dag.names());
  return scorer.score(dag.parent_sets());
}

ScoredDag hill_climb(const TaskData& task, const std::vector<SpdMatrix>& sigma_samples,
                     const HyperParams& hp, const SearchConfig& cfg, const Dag& init) {
  if (sigma_samples.empty()) throw DomainError("hill_climb: need at least one draw");
  if (init.num_nodes() != task.dim()) throw DimensionMismatch("hill_climb: dimension mismatch");
  McScorer scorer(task, sigma_samples, hp, init.names());
  return search_with_restarts(scorer, init.names(), init.parent_sets(), cfg);
}

ScoredDag learn_sig(const TaskData& task, const SearchConfig& cfg,
                    const std::vector<std::string>& names) {
  BicScorer scorer(task);
  auto node_names = names.empty() ? default_names(task.dim()) : names;
  if (static_cast<int>(node_names.size()) != task.dim()) {
    throw DimensionMismatch("learn_sig: names length does not match dimension");
  }
  return search_with_restarts(scorer, node_names, ParentSets(task.dim()), cfg);
}

ScoredDag learn_avg(const std::vector<TaskData>& tasks, const SearchConfig& cfg,
                    const std::vector<std::string>& names) {
  if (tasks.empty()) throw DomainError("learn_avg: need at least one task");
  const int p = tasks[0].dim();
  long rows = 0;
  for (const auto& t : tasks) {
    if (t.dim() != p) throw DimensionMismatch("learn_avg: task dimensions disagree");
    if (t.data.rows() == 0) throw DomainError("learn_avg: task has no raw data rows");
    rows += t.data.rows();
  }
  Eigen::MatrixXd pooled(rows, p);
  long at = 0;
  for (const auto& t : tasks) {
    pooled.middleRows(at, t.data.rows()) = t.data;
    at += t.data.rows();
  }
  return learn_sig(TaskData::from_data(std::move(pooled)), cfg, names);
}

std::vector<std::pair<int, int>> correlation_skeleton(const TaskData& task, double threshold) {
  const int p = task.dim();
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      const double denom = task.s(a, a) * task.s(b, b);
      if (denom <= 0.0) continue;
      if (std::abs(task.s(a, b)) / std::sqrt(denom) > threshold) pairs.emplace_back(a, b);
    }
  }
  return pairs;
}

}  // namespace mtgbn
