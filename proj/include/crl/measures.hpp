#pragma once
// Finitely supported probability measures on embedding spaces, 1-Lipschitz
// [0,1] colorings, and the bilinear composition / pushforward algebra.

#include "crl/embeddings.hpp"

#include <map>

namespace crl {

// Atoms are (index into space, weight) with weights > 0 summing to 1,
// sorted by index, pairwise distinct. This normal form is enforced on
// construction, so equal measures compare equal componentwise.
class WeightedEmbeddingMeasure {
 public:
  WeightedEmbeddingMeasure(SpaceRef space, std::vector<std::pair<int, Rat>> atoms)
      : space_(std::move(space)), atoms_(std::move(atoms)) {
    Rat total(0);
    int prev = -1;
    for (const auto& [idx, w] : atoms_) {
      if (idx <= prev)
        throw std::invalid_argument("measure atoms must be sorted with distinct indices");
      if (idx >= space_->size())
        throw std::invalid_argument("measure atom outside the embedding space");
      if (w <= 0) throw std::invalid_argument("measure atom with nonpositive weight");
      total += w;
      prev = idx;
    }
    if (total != 1) throw std::invalid_argument("measure weights must sum to 1");
  }

  // Merges duplicate indices and drops zero weights before normal-form checks.
  static WeightedEmbeddingMeasure from_atoms(SpaceRef space,
                                             const std::vector<std::pair<int, Rat>>& raw) {
    std::map<int, Rat> merged;
    for (const auto& [idx, w] : raw) merged[idx] += w;
    std::vector<std::pair<int, Rat>> atoms;
    for (auto& [idx, w] : merged)
      if (w != 0) atoms.emplace_back(idx, w);
    return WeightedEmbeddingMeasure(std::move(space), std::move(atoms));
  }

  static WeightedEmbeddingMeasure dirac(SpaceRef space, int index) {
    return WeightedEmbeddingMeasure(std::move(space), {{index, Rat(1)}});
  }

  static WeightedEmbeddingMeasure uniform(SpaceRef space) {
    const int k = space->size();
    if (k == 0) throw std::invalid_argument("uniform measure on empty embedding space");
    std::vector<std::pair<int, Rat>> atoms;
    for (int i = 0; i < k; ++i) atoms.emplace_back(i, rat(1, k));
    return WeightedEmbeddingMeasure(std::move(space), std::move(atoms));
  }

  const SpaceRef& space() const { return space_; }
  const std::vector<std::pair<int, Rat>>& atoms() const { return atoms_; }

  Rat weight(int index) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), index,
                               [](const auto& a, int i) { return a.first < i; });
    if (it == atoms_.end() || it->first != index) return Rat(0);
    return it->second;
  }

  friend bool operator==(const WeightedEmbeddingMeasure& a, const WeightedEmbeddingMeasure& b) {
    return a.space_ == b.space_ && a.atoms_ == b.atoms_;
  }

 private:
  SpaceRef space_;
  std::vector<std::pair<int, Rat>> atoms_;
};

// Total function Emb -> [0,1], 1-Lipschitz for the truncated rho metric.
// Both conditions are enforced on construction.
class Coloring {
 public:
  Coloring(SpaceRef space, std::vector<Rat> values)
      : space_(std::move(space)), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != space_->size())
      throw std::invalid_argument("coloring must assign a value to every embedding");
    for (const auto& v : values_)
      if (v < 0 || v > 1) throw std::invalid_argument("coloring value outside [0,1]");
    const int k = space_->size();
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        Rat gap = values_[static_cast<std::size_t>(i)] - values_[static_cast<std::size_t>(j)];
        if (gap < 0) gap = -gap;
        if (gap > space_->rho_truncated(i, j))
          throw std::invalid_argument("coloring is not 1-Lipschitz for truncated rho");
      }
  }

  const SpaceRef& space() const { return space_; }
  const std::vector<Rat>& values() const { return values_; }
  const Rat& value(int i) const { return values_[static_cast<std::size_t>(i)]; }

 private:
  SpaceRef space_;
  std::vector<Rat> values_;
};

// Linear extension: kappa(nu) = sum of weight * kappa(atom).
inline Rat evaluate_coloring(const Coloring& kappa, const WeightedEmbeddingMeasure& nu) {
  if (kappa.space() != nu.space())
    throw std::invalid_argument("coloring and measure live on different spaces");
  Rat v(0);
  for (const auto& [idx, w] : nu.atoms()) v += w * kappa.value(idx);
  return v;
}

// Bilinear composition: for nu on Emb(A,B) and nu' on Emb(B,M), the image
// measure of (a, b) -> b o a under nu x nu', an element of Emb(A,M).
// Pass `composite` to reuse an already enumerated Emb(A,M).
inline WeightedEmbeddingMeasure compose_measures(const WeightedEmbeddingMeasure& nu,
                                                 const WeightedEmbeddingMeasure& nu_prime,
                                                 SpaceRef composite = nullptr) {
  const SpaceRef& ab = nu.space();
  const SpaceRef& bm = nu_prime.space();
  if (ab->target() != bm->source())
    throw std::invalid_argument("compose_measures: inner target differs from outer source");
  if (!composite)
    composite = EmbeddingSpace::enumerate(ab->source(), bm->target());
  if (composite->source() != ab->source() || composite->target() != bm->target())
    throw std::invalid_argument("compose_measures: composite space has wrong endpoints");
  std::vector<std::pair<int, Rat>> raw;
  std::vector<int> comp(static_cast<std::size_t>(ab->source()->size));
  for (const auto& [i, wi] : nu.atoms()) {
    const auto& inner = ab->at(i).map();
    for (const auto& [j, wj] : nu_prime.atoms()) {
      const auto& outer = bm->at(j).map();
      for (std::size_t p = 0; p < comp.size(); ++p)
        comp[p] = outer[static_cast<std::size_t>(inner[p])];
      int idx = composite->index_of_map(comp);
      if (idx < 0)
        throw std::logic_error("compose_measures: composite embedding missing from space");
      raw.emplace_back(idx, wi * wj);
    }
  }
  return WeightedEmbeddingMeasure::from_atoms(composite, raw);
}

// One pushforward nu o delta_alpha per alpha in Emb(A,B), indexed like base.
struct PushforwardFamily {
  SpaceRef base;                                   // Emb(A,B)
  std::vector<WeightedEmbeddingMeasure> members;   // measures on Emb(A,M)
};

inline PushforwardFamily pushforward_family(const WeightedEmbeddingMeasure& nu, StructureRef a,
                                            SpaceRef emb_ab = nullptr, SpaceRef emb_am = nullptr) {
  const SpaceRef& bm = nu.space();
  if (!emb_ab) emb_ab = EmbeddingSpace::enumerate(a, bm->source());
  if (emb_ab->source() != a || emb_ab->target() != bm->source())
    throw std::invalid_argument("pushforward_family: base space has wrong endpoints");
  if (!emb_am) emb_am = EmbeddingSpace::enumerate(a, bm->target());
  PushforwardFamily fam;
  fam.base = emb_ab;
  for (int i = 0; i < emb_ab->size(); ++i)
    fam.members.push_back(
        compose_measures(WeightedEmbeddingMeasure::dirac(emb_ab, i), nu, emb_am));
  return fam;
}

// Average over the automorphisms of the source: (1/|Aut B|) sum of nu o delta_g.
// Pass `aut` to reuse an already enumerated Emb(B,B).
inline WeightedEmbeddingMeasure symmetrize_measure(const WeightedEmbeddingMeasure& nu,
                                                   SpaceRef aut = nullptr) {
  const SpaceRef& bm = nu.space();
  if (!aut) aut = EmbeddingSpace::enumerate(bm->source(), bm->source());
  if (aut->source() != bm->source() || aut->target() != bm->source())
    throw std::invalid_argument("symmetrize_measure: automorphism space has wrong endpoints");
  return compose_measures(WeightedEmbeddingMeasure::uniform(aut), nu, bm);
}

}  // namespace crl
