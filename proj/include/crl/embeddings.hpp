#pragma once
// Embedding spaces Emb(A,M): exhaustive backtracking enumeration of
// isometric, predicate-preserving injections, together with the sup
// pseudometric rho(a,a') = max over source points of d(a(x), a'(x)).

#include "crl/structures.hpp"

#include <memory>
#include <utility>

namespace crl {

using StructureRef = std::shared_ptr<const MetricStructure>;

inline StructureRef share(MetricStructure s) {
  return std::make_shared<const MetricStructure>(std::move(s));
}

// Point map that is injective, distance preserving, and predicate
// preserving. Structures are threaded by shared_ptr; embeddings compare
// by map within a shared structure pair.
class Embedding {
 public:
  Embedding(StructureRef source, StructureRef target, std::vector<int> map)
      : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
    if (static_cast<int>(map_.size()) != source_->size)
      throw std::invalid_argument("embedding map size does not match source");
  }

  const StructureRef& source() const { return source_; }
  const StructureRef& target() const { return target_; }
  int operator()(int a) const { return map_[static_cast<std::size_t>(a)]; }
  const std::vector<int>& map() const { return map_; }

  friend bool operator==(const Embedding& a, const Embedding& b) {
    return a.source_ == b.source_ && a.target_ == b.target_ && a.map_ == b.map_;
  }

 private:
  StructureRef source_, target_;
  std::vector<int> map_;
};

inline bool is_embedding_map(const MetricStructure& a, const MetricStructure& m,
                             const std::vector<int>& map) {
  const int n = a.size;
  if (static_cast<int>(map.size()) != n) return false;
  for (int i = 0; i < n; ++i)
    if (map[static_cast<std::size_t>(i)] < 0 || map[static_cast<std::size_t>(i)] >= m.size)
      return false;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (map[static_cast<std::size_t>(i)] == map[static_cast<std::size_t>(j)]) return false;
      if (a.d(i, j) != m.d(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)]))
        return false;
    }
  for (std::size_t r = 0; r < a.signature.relations.size(); ++r) {
    const int arity = a.signature.relations[r].arity;
    std::vector<int> t(static_cast<std::size_t>(arity), 0);
    do {
      std::vector<int> mt(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) mt[i] = map[static_cast<std::size_t>(t[i])];
      if (a.predicate(static_cast<int>(r), t) != m.predicate(static_cast<int>(r), mt))
        return false;
    } while (detail::next_tuple(t, n));
  }
  return true;
}

// outer: B -> M composed after inner: A -> B, giving A -> M.
inline Embedding compose(const Embedding& outer, const Embedding& inner) {
  if (inner.target() != outer.source())
    throw std::invalid_argument("embedding composition: structure mismatch");
  std::vector<int> map(inner.map().size());
  for (std::size_t i = 0; i < map.size(); ++i)
    map[i] = outer(inner.map()[i]);
  return Embedding(inner.source(), outer.target(), std::move(map));
}

class EmbeddingSpace;
using SpaceRef = std::shared_ptr<const EmbeddingSpace>;

// All embeddings of `source` into `target`, in lexicographic order of their
// point maps, with the rho matrix precomputed.
class EmbeddingSpace {
 public:
  static SpaceRef enumerate(StructureRef source, StructureRef target) {
    if (source->signature != target->signature)
      throw std::invalid_argument("embedding enumeration: signature mismatch");
    auto sp = std::shared_ptr<EmbeddingSpace>(new EmbeddingSpace(source, target));
    sp->run_enumeration();
    sp->fill_rho();
    return sp;
  }

  const StructureRef& source() const { return source_; }
  const StructureRef& target() const { return target_; }
  int size() const { return static_cast<int>(embeddings_.size()); }
  const Embedding& at(int i) const { return embeddings_[static_cast<std::size_t>(i)]; }
  const std::vector<Embedding>& embeddings() const { return embeddings_; }

  const Rat& rho(int i, int j) const {
    return rho_[static_cast<std::size_t>(i) * embeddings_.size() + static_cast<std::size_t>(j)];
  }

  Rat rho_truncated(int i, int j) const {
    const Rat& r = rho(i, j);
    return r > 1 ? Rat(1) : r;
  }

  // All distinct embeddings at truncated distance exactly 1.
  bool discrete_truncated() const { return discrete_; }

  int index_of_map(const std::vector<int>& map) const {
    auto it = std::lower_bound(embeddings_.begin(), embeddings_.end(), map,
                               [](const Embedding& e, const std::vector<int>& m) {
                                 return e.map() < m;
                               });
    if (it == embeddings_.end() || it->map() != map) return -1;
    return static_cast<int>(it - embeddings_.begin());
  }

  int index_of(const Embedding& e) const {
    if (e.source() != source_ || e.target() != target_) return -1;
    return index_of_map(e.map());
  }

 private:
  EmbeddingSpace(StructureRef source, StructureRef target)
      : source_(std::move(source)), target_(std::move(target)) {}

  void run_enumeration() {
    const MetricStructure& a = *source_;
    const MetricStructure& m = *target_;
    std::vector<int> map(static_cast<std::size_t>(a.size), -1);
    std::vector<char> used(static_cast<std::size_t>(m.size), 0);
    extend(a, m, map, used, 0);
  }

  // Assign source point `depth`; candidates ascend, so the emitted order is
  // lexicographic. Prunes on exact distance match to the assigned prefix and
  // on predicate tuples that close over the prefix.
  void extend(const MetricStructure& a, const MetricStructure& m, std::vector<int>& map,
              std::vector<char>& used, int depth) {
    if (depth == a.size) {
      embeddings_.push_back(Embedding(source_, target_, map));
      return;
    }
    for (int t = 0; t < m.size; ++t) {
      if (used[static_cast<std::size_t>(t)]) continue;
      bool ok = true;
      for (int p = 0; p < depth && ok; ++p)
        if (a.d(p, depth) != m.d(map[static_cast<std::size_t>(p)], t)) ok = false;
      if (ok) {
        map[static_cast<std::size_t>(depth)] = t;
        ok = predicates_close(a, m, map, depth);
      }
      if (ok) {
        used[static_cast<std::size_t>(t)] = 1;
        extend(a, m, map, used, depth + 1);
        used[static_cast<std::size_t>(t)] = 0;
      }
      map[static_cast<std::size_t>(depth)] = -1;
    }
  }

  // Check every predicate tuple over points 0..depth that mentions `depth`.
  static bool predicates_close(const MetricStructure& a, const MetricStructure& m,
                               const std::vector<int>& map, int depth) {
    for (std::size_t r = 0; r < a.signature.relations.size(); ++r) {
      const int arity = a.signature.relations[r].arity;
      std::vector<int> t(static_cast<std::size_t>(arity), 0);
      do {
        bool mentions = false;
        for (int p : t)
          if (p == depth) { mentions = true; break; }
        if (!mentions) continue;
        std::vector<int> mt(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) mt[i] = map[static_cast<std::size_t>(t[i])];
        if (a.predicate(static_cast<int>(r), t) != m.predicate(static_cast<int>(r), mt))
          return false;
      } while (detail::next_tuple(t, depth + 1));
    }
    return true;
  }

  void fill_rho() {
    const std::size_t k = embeddings_.size();
    rho_.assign(k * k, Rat(0));
    const MetricStructure& m = *target_;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) {
        Rat r(0);
        const auto& mi = embeddings_[i].map();
        const auto& mj = embeddings_[j].map();
        for (std::size_t p = 0; p < mi.size(); ++p) {
          const Rat& d = m.d(mi[p], mj[p]);
          if (d > r) r = d;
        }
        rho_[i * k + j] = r;
        rho_[j * k + i] = r;
      }
    discrete_ = true;
    for (std::size_t i = 0; i < k && discrete_; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        if (rho_[i * k + j] < 1) { discrete_ = false; break; }
  }

  StructureRef source_, target_;
  std::vector<Embedding> embeddings_;
  std::vector<Rat> rho_;
  bool discrete_ = true;
};

inline Rat rho_distance(const EmbeddingSpace& space, const Embedding& a, const Embedding& b) {
  int i = space.index_of(a);
  int j = space.index_of(b);
  if (i < 0 || j < 0)
    throw std::invalid_argument("rho_distance: embedding not a member of the space");
  return space.rho(i, j);
}

}  // namespace crl
