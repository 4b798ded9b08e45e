#pragma once
// Independent reference implementations used only by the tests: a compact
// double-precision simplex, brute-force grid oracles for the transport and
// oscillation values, and seeded random instance generators. Nothing here
// shares solver code with the library headers; agreement between the two is
// what the tests check.

#include "crl/ramsey.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

namespace testsupport {

constexpr double kFloatEps = 1e-9;

// ---------------------------------------------------------------------------
// Double-precision two-phase simplex, Bland's rule. minimize c.x subject to
// a.x (rel) rhs with x >= 0; rel is '<', '=' or '>'.

struct FloatRow {
  std::vector<double> a;
  char rel = '<';
  double rhs = 0;
};

struct FloatLP {
  std::vector<double> c;
  std::vector<FloatRow> rows;
};

struct FloatSolution {
  bool feasible = false;
  bool bounded = false;
  double value = 0;
  std::vector<double> x;
};

namespace detail {

struct FloatTableau {
  int m = 0, n = 0;
  std::vector<double> a;  // m x (n+1), last column rhs
  std::vector<int> basis;
  std::vector<char> banned;  // columns barred from entering

  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * (n + 1) + j]; }

  void pivot(int r, int c) {
    double inv = 1.0 / at(r, c);
    for (int j = 0; j <= n; ++j) at(r, j) *= inv;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      double f = at(i, c);
      if (f == 0) continue;
      for (int j = 0; j <= n; ++j) at(i, j) -= f * at(r, j);
    }
    basis[static_cast<std::size_t>(r)] = c;
  }

  // Returns false when the objective is unbounded below.
  bool run(const std::vector<double>& cost) {
    for (;;) {
      std::vector<double> red = cost;
      for (int i = 0; i < m; ++i) {
        double cb = cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])];
        if (cb == 0) continue;
        for (int j = 0; j < n; ++j) red[static_cast<std::size_t>(j)] -= cb * at(i, j);
      }
      int enter = -1;
      for (int j = 0; j < n; ++j)
        if (!banned[static_cast<std::size_t>(j)] && red[static_cast<std::size_t>(j)] < -kFloatEps) {
          enter = j;
          break;  // Bland: lowest index
        }
      if (enter < 0) return true;
      int leave = -1;
      double best = 0;
      for (int i = 0; i < m; ++i) {
        if (at(i, enter) <= kFloatEps) continue;
        double ratio = at(i, n) / at(i, enter);
        if (leave < 0 || ratio < best - kFloatEps ||
            (ratio < best + kFloatEps && basis[static_cast<std::size_t>(i)] <
                                             basis[static_cast<std::size_t>(leave)]))
          leave = i, best = ratio;
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace detail

inline FloatSolution solve_float_lp(const FloatLP& lp) {
  const int n0 = static_cast<int>(lp.c.size());
  const int m = static_cast<int>(lp.rows.size());
  // Columns: original, one slack/surplus per inequality, one artificial per row.
  int nslack = 0;
  for (const auto& r : lp.rows)
    if (r.rel != '=') ++nslack;
  const int n = n0 + nslack + m;
  detail::FloatTableau t;
  t.m = m;
  t.n = n;
  t.a.assign(static_cast<std::size_t>(m) * (n + 1), 0.0);
  t.basis.assign(static_cast<std::size_t>(m), -1);
  t.banned.assign(static_cast<std::size_t>(n), 0);
  int scol = n0;
  for (int i = 0; i < m; ++i) {
    const FloatRow& r = lp.rows[static_cast<std::size_t>(i)];
    if (static_cast<int>(r.a.size()) != n0)
      throw std::invalid_argument("float lp: row length mismatch");
    double flip = 1.0;
    if (r.rhs < 0) flip = -1.0;  // normalize rhs nonnegative
    for (int j = 0; j < n0; ++j) t.at(i, j) = flip * r.a[static_cast<std::size_t>(j)];
    t.at(i, n) = flip * r.rhs;
    if (r.rel != '=') {
      double s = (r.rel == '<') ? 1.0 : -1.0;
      t.at(i, scol) = flip * s;
      ++scol;
    }
    t.at(i, n0 + nslack + i) = 1.0;  // artificial
    t.basis[static_cast<std::size_t>(i)] = n0 + nslack + i;
  }

  FloatSolution out;
  std::vector<double> phase1(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < m; ++i) phase1[static_cast<std::size_t>(n0 + nslack + i)] = 1.0;
  if (!t.run(phase1)) return out;  // cannot happen: phase 1 is bounded below by 0
  double infeas = 0;
  for (int i = 0; i < m; ++i)
    if (t.basis[static_cast<std::size_t>(i)] >= n0 + nslack) infeas += t.at(i, n);
  if (infeas > 1e-7) return out;  // infeasible
  out.feasible = true;

  // Drive zero-valued basic artificials out where possible, then bar them.
  for (int i = 0; i < m; ++i) {
    if (t.basis[static_cast<std::size_t>(i)] < n0 + nslack) continue;
    for (int j = 0; j < n0 + nslack; ++j)
      if (std::fabs(t.at(i, j)) > kFloatEps) {
        t.pivot(i, j);
        break;
      }
  }
  for (int j = n0 + nslack; j < n; ++j) t.banned[static_cast<std::size_t>(j)] = 1;

  std::vector<double> phase2(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n0; ++j) phase2[static_cast<std::size_t>(j)] = lp.c[static_cast<std::size_t>(j)];
  if (!t.run(phase2)) return out;  // feasible but unbounded
  out.bounded = true;
  out.x.assign(static_cast<std::size_t>(n0), 0.0);
  for (int i = 0; i < m; ++i)
    if (t.basis[static_cast<std::size_t>(i)] < n0)
      out.x[static_cast<std::size_t>(t.basis[static_cast<std::size_t>(i)])] = t.at(i, n);
  out.value = 0;
  for (int j = 0; j < n0; ++j) out.value += lp.c[static_cast<std::size_t>(j)] * out.x[static_cast<std::size_t>(j)];
  return out;
}

// Minimum transport cost between nonnegative balanced marginals, solved by
// the float simplex over the full coupling polytope.
inline double float_transport(const std::vector<std::vector<double>>& cost,
                              const std::vector<double>& supply,
                              const std::vector<double>& demand) {
  const int ns = static_cast<int>(supply.size());
  const int nd = static_cast<int>(demand.size());
  FloatLP lp;
  lp.c.resize(static_cast<std::size_t>(ns) * nd);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nd; ++j)
      lp.c[static_cast<std::size_t>(i * nd + j)] = cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  for (int i = 0; i < ns; ++i) {
    FloatRow r;
    r.a.assign(lp.c.size(), 0.0);
    for (int j = 0; j < nd; ++j) r.a[static_cast<std::size_t>(i * nd + j)] = 1.0;
    r.rel = '=';
    r.rhs = supply[static_cast<std::size_t>(i)];
    lp.rows.push_back(std::move(r));
  }
  for (int j = 0; j < nd; ++j) {
    FloatRow r;
    r.a.assign(lp.c.size(), 0.0);
    for (int i = 0; i < ns; ++i) r.a[static_cast<std::size_t>(i * nd + j)] = 1.0;
    r.rel = '=';
    r.rhs = demand[static_cast<std::size_t>(j)];
    lp.rows.push_back(std::move(r));
  }
  FloatSolution s = solve_float_lp(lp);
  if (!s.feasible || !s.bounded)
    throw std::logic_error("float_transport: balanced instance did not solve");
  return s.value;
}

// ---------------------------------------------------------------------------
// Plain total-variation formula over aligned weight vectors.

inline crl::Rat tv_from_weights(const std::vector<crl::Rat>& p, const std::vector<crl::Rat>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_from_weights: length mismatch");
  crl::Rat twice(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    crl::Rat d = p[i] - q[i];
    if (d < 0) d = -d;
    twice += d;
  }
  return twice / 2;
}

// ---------------------------------------------------------------------------
// Composition table comp[j][i]: index in Emb(A,C) of bc[j] composed after
// ab[i], recomputed here from the raw point maps.

inline std::vector<std::vector<int>> composition_table(const crl::SpaceRef& ab,
                                                       const crl::SpaceRef& bc,
                                                       const crl::SpaceRef& ac) {
  std::vector<std::vector<int>> comp(static_cast<std::size_t>(bc->size()),
                                     std::vector<int>(static_cast<std::size_t>(ab->size()), -1));
  std::vector<int> m(ab->source()->size);
  for (int j = 0; j < bc->size(); ++j)
    for (int i = 0; i < ab->size(); ++i) {
      const auto& outer = bc->at(j).map();
      const auto& inner = ab->at(i).map();
      for (std::size_t p = 0; p < m.size(); ++p)
        m[p] = outer[static_cast<std::size_t>(inner[p])];
      comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = ac->index_of_map(m);
      if (comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] < 0)
        throw std::logic_error("composition_table: composite missing from Emb(A,C)");
    }
  return comp;
}

// ---------------------------------------------------------------------------
// Exhaustive lambda-grid value: min over lambda with denominator g on the
// Emb(B,C) simplex of the worst pairwise distance between pushforwards.
// Requires a discrete truncated metric on Emb(A,C) so the pair distance is
// the plain total-variation formula; exact rational arithmetic throughout.
// The grid contains every vertex, so the result is always an upper bound on
// the LP value, within max-pair Lipschitz slack of it for fine grids.

inline crl::Rat lambda_grid_uniform_value(const crl::StructureRef& a, const crl::StructureRef& b,
                                          const crl::StructureRef& c, int g) {
  auto ab = crl::EmbeddingSpace::enumerate(a, b);
  auto bc = crl::EmbeddingSpace::enumerate(b, c);
  auto ac = crl::EmbeddingSpace::enumerate(a, c);
  if (ab->size() < 2) return crl::Rat(0);
  if (bc->size() == 0) throw std::invalid_argument("lambda_grid: no measures on Emb(B,C)");
  if (!ac->discrete_truncated())
    throw std::invalid_argument("lambda_grid: needs a discrete Emb(A,C)");
  auto comp = composition_table(ab, bc, ac);

  const int J = bc->size();
  const int E = ac->size();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < ab->size(); ++i)
    for (int j = i + 1; j < ab->size(); ++j) pairs.emplace_back(i, j);

  crl::Rat best(2);  // above any possible value
  std::vector<int> parts(static_cast<std::size_t>(J), 0);
  // Enumerate compositions of g into J nonnegative parts.
  auto eval = [&]() {
    crl::Rat worst(0);
    std::vector<crl::Rat> w1(static_cast<std::size_t>(E)), w2(static_cast<std::size_t>(E));
    for (const auto& [i1, i2] : pairs) {
      std::fill(w1.begin(), w1.end(), crl::Rat(0));
      std::fill(w2.begin(), w2.end(), crl::Rat(0));
      for (int j = 0; j < J; ++j) {
        if (!parts[static_cast<std::size_t>(j)]) continue;
        crl::Rat wt = crl::rat(parts[static_cast<std::size_t>(j)], g);
        w1[static_cast<std::size_t>(comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i1)])] += wt;
        w2[static_cast<std::size_t>(comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i2)])] += wt;
      }
      crl::Rat d = tv_from_weights(w1, w2);
      if (d > worst) worst = d;
      if (worst >= best) break;
    }
    if (worst < best) best = worst;
  };
  // parts[k] chosen last absorbs the remainder.
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == J - 1) {
      parts[static_cast<std::size_t>(k)] = left;
      eval();
      return;
    }
    for (int v = 0; v <= left; ++v) {
      parts[static_cast<std::size_t>(k)] = v;
      rec(k + 1, left - v);
    }
  };
  rec(0, g);
  return best;
}

// ---------------------------------------------------------------------------
// Grid-coloring transport bound: the best mean difference over colorings
// whose values lie on {0, 1/g, ..., 1} and satisfy the truncated-rho
// Lipschitz constraints. Every such coloring is a feasible dual potential,
// so the result never exceeds the Kantorovich value; when every truncated
// distance of the space is an integer multiple of 1/g, rounding the optimal
// potential down to the grid stays feasible and the bound is within 1/g.

inline crl::Rat grid_coloring_gap(const crl::WeightedEmbeddingMeasure& mu,
                                  const crl::WeightedEmbeddingMeasure& mu_prime, int g) {
  const crl::SpaceRef& space = mu.space();
  const int k = space->size();
  if (k > 6) throw std::invalid_argument("grid_coloring_gap: space too large for brute force");
  std::vector<crl::Rat> diff(static_cast<std::size_t>(k), crl::Rat(0));
  for (const auto& [idx, w] : mu.atoms()) diff[static_cast<std::size_t>(idx)] += w;
  for (const auto& [idx, w] : mu_prime.atoms()) diff[static_cast<std::size_t>(idx)] -= w;

  std::vector<int> vals(static_cast<std::size_t>(k), 0);
  crl::Rat best(0);
  std::function<void(int)> rec = [&](int at) {
    if (at == k) {
      crl::Rat gap(0);
      for (int i = 0; i < k; ++i)
        gap += diff[static_cast<std::size_t>(i)] * crl::rat(vals[static_cast<std::size_t>(i)], g);
      if (gap < 0) gap = -gap;
      if (gap > best) best = gap;
      return;
    }
    for (int v = 0; v <= g; ++v) {
      bool ok = true;
      for (int p = 0; p < at && ok; ++p) {
        int dv = vals[static_cast<std::size_t>(p)] - v;
        if (dv < 0) dv = -dv;
        if (crl::rat(dv, g) > space->rho_truncated(p, at)) ok = false;
      }
      if (!ok) continue;
      vals[static_cast<std::size_t>(at)] = v;
      rec(at + 1);
    }
  };
  rec(0);
  return best;
}

// ---------------------------------------------------------------------------
// Brute-force adaptive value on the 1/g coloring grid, in doubles. For each
// grid coloring of Emb(A,C) (canonicalized to have a zero coordinate, since
// shifting a coloring never changes pair differences) the exact inner
// minimum over measures is solved by the float simplex; a cheap upper bound
// at a few fixed measures prunes colorings that cannot beat the running
// best. Lipschitz filtering happens during enumeration.

inline double adaptive_grid_value(const crl::StructureRef& a, const crl::StructureRef& b,
                                  const crl::StructureRef& c, int g) {
  auto ab = crl::EmbeddingSpace::enumerate(a, b);
  auto bc = crl::EmbeddingSpace::enumerate(b, c);
  auto ac = crl::EmbeddingSpace::enumerate(a, c);
  if (ab->size() < 2) return 0.0;
  if (bc->size() == 0) throw std::invalid_argument("adaptive_grid: no measures on Emb(B,C)");
  auto comp = composition_table(ab, bc, ac);

  const int E = ac->size();
  const int J = bc->size();
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < ab->size(); ++i)
    for (int j = i + 1; j < ab->size(); ++j) pairs.emplace_back(i, j);
  const int P = static_cast<int>(pairs.size());

  double best = 0.0;
  std::vector<int> vals(static_cast<std::size_t>(E), 0);
  std::vector<std::vector<double>> w(static_cast<std::size_t>(P),
                                     std::vector<double>(static_cast<std::size_t>(J), 0.0));

  auto inner_exact = [&]() {
    // min t subject to lambda on the simplex and |w_p . lambda| <= t.
    FloatLP lp;
    lp.c.assign(static_cast<std::size_t>(J + 1), 0.0);
    lp.c[static_cast<std::size_t>(J)] = 1.0;
    FloatRow simplex;
    simplex.a.assign(static_cast<std::size_t>(J + 1), 1.0);
    simplex.a[static_cast<std::size_t>(J)] = 0.0;
    simplex.rel = '=';
    simplex.rhs = 1.0;
    lp.rows.push_back(std::move(simplex));
    for (int p = 0; p < P; ++p)
      for (int s = 0; s < 2; ++s) {
        FloatRow r;
        r.a.assign(static_cast<std::size_t>(J + 1), 0.0);
        for (int j = 0; j < J; ++j)
          r.a[static_cast<std::size_t>(j)] = s ? -w[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)]
                                               : w[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
        r.a[static_cast<std::size_t>(J)] = -1.0;
        r.rel = '<';
        r.rhs = 0.0;
        lp.rows.push_back(std::move(r));
      }
    FloatSolution s = solve_float_lp(lp);
    if (!s.feasible || !s.bounded) throw std::logic_error("adaptive_grid: inner LP failed");
    return s.value;
  };

  auto consider = [&]() {
    bool has_zero = false;
    for (int e = 0; e < E && !has_zero; ++e)
      if (vals[static_cast<std::size_t>(e)] == 0) has_zero = true;
    if (!has_zero) return;  // a shifted copy with a zero scores the same

    for (int p = 0; p < P; ++p)
      for (int j = 0; j < J; ++j) {
        int v1 = vals[static_cast<std::size_t>(comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(pairs[static_cast<std::size_t>(p)].first)])];
        int v2 = vals[static_cast<std::size_t>(comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(pairs[static_cast<std::size_t>(p)].second)])];
        w[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)] =
            static_cast<double>(v1 - v2) / static_cast<double>(g);
      }
    // Upper bound at the uniform measure: the inner min can only be lower.
    double ub = 0.0;
    for (int p = 0; p < P; ++p) {
      double dot = 0.0;
      for (int j = 0; j < J; ++j) dot += w[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
      dot = std::fabs(dot) / static_cast<double>(J);
      if (dot > ub) ub = dot;
    }
    if (ub <= best + kFloatEps) return;
    double v = inner_exact();
    if (v > best) best = v;
  };

  std::function<void(int)> rec = [&](int at) {
    if (at == E) {
      consider();
      return;
    }
    for (int v = 0; v <= g; ++v) {
      bool ok = true;
      for (int p = 0; p < at && ok; ++p) {
        int dv = vals[static_cast<std::size_t>(p)] - v;
        if (dv < 0) dv = -dv;
        if (crl::rat(dv, g) > ac->rho_truncated(p, at)) ok = false;
      }
      if (!ok) continue;
      vals[static_cast<std::size_t>(at)] = v;
      rec(at + 1);
    }
  };
  rec(0);
  return best;
}

// ---------------------------------------------------------------------------
// Seeded random instances

inline crl::Rat random_grid_rat(std::mt19937_64& rng, int g) {
  return crl::rat(static_cast<long>(rng() % static_cast<std::uint64_t>(g + 1)), g);
}

// Nested discrete-metric structures A inside B inside C over one unary
// predicate with values in {0, 1/2, 1}. Inclusions are embeddings, so
// Emb(A,B) and Emb(B,C) are never empty.
struct DiscreteTriple {
  crl::StructureRef a, b, c;
};

inline DiscreteTriple random_discrete_triple(std::mt19937_64& rng, int max_embeddings_ac) {
  using namespace crl;
  Signature sig;
  sig.relations = {{"u", 1}};
  for (;;) {
    const int nc = 3 + static_cast<int>(rng() % 3);  // 3..5
    MetricStructure cs = make_structure(sig, nc);
    for (int i = 0; i < nc; ++i)
      for (int j = i + 1; j < nc; ++j) cs.set_distance(i, j, Rat(1));
    for (int i = 0; i < nc; ++i)
      cs.predicate_slot(0, {i}) = rat(static_cast<long>(rng() % 3), 2);

    const int nb = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(nc - 1));  // 2..nc
    const int na = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(nb - 1));  // 1..nb-1
    // Substructure on the first k points keeps distances and the predicate.
    auto restrict_to = [&](int k) {
      MetricStructure s = make_structure(sig, k);
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) s.set_distance(i, j, Rat(1));
      for (int i = 0; i < k; ++i) s.predicate_slot(0, {i}) = cs.predicate(0, {i});
      return s;
    };
    DiscreteTriple t{share(restrict_to(na)), share(restrict_to(nb)), share(cs)};
    auto ac = EmbeddingSpace::enumerate(t.a, t.c);
    auto ab = EmbeddingSpace::enumerate(t.a, t.b);
    if (ac->size() >= 1 && ac->size() <= max_embeddings_ac && ab->size() >= 2) return t;
  }
}

// Random measure supported on a random subset of the space, with small
// integer weights normalized to mass one. Exact by construction.
inline crl::WeightedEmbeddingMeasure random_measure(const crl::SpaceRef& space,
                                                    std::mt19937_64& rng) {
  const int k = space->size();
  if (k == 0) throw std::invalid_argument("random_measure: empty space");
  std::vector<long> raw(static_cast<std::size_t>(k), 0);
  long total = 0;
  for (int i = 0; i < k; ++i) {
    if (rng() % 2) {
      raw[static_cast<std::size_t>(i)] = 1 + static_cast<long>(rng() % 9);
      total += raw[static_cast<std::size_t>(i)];
    }
  }
  if (total == 0) {
    int i = static_cast<int>(rng() % static_cast<std::uint64_t>(k));
    raw[static_cast<std::size_t>(i)] = 1;
    total = 1;
  }
  std::vector<std::pair<int, crl::Rat>> atoms;
  for (int i = 0; i < k; ++i)
    if (raw[static_cast<std::size_t>(i)])
      atoms.emplace_back(i, crl::rat(raw[static_cast<std::size_t>(i)], total));
  return crl::WeightedEmbeddingMeasure(space, std::move(atoms));
}

// Random coloring: grid values under the truncated-rho Lipschitz filter,
// built greedily coordinate by coordinate (always satisfiable: constants
// are colorings).
inline crl::Coloring random_coloring(const crl::SpaceRef& space, std::mt19937_64& rng, int g = 8) {
  const int k = space->size();
  std::vector<crl::Rat> vals(static_cast<std::size_t>(k), crl::Rat(0));
  for (int i = 0; i < k; ++i) {
    std::vector<crl::Rat> options;
    for (int v = 0; v <= g; ++v) {
      crl::Rat cand = crl::rat(v, g);
      bool ok = true;
      for (int p = 0; p < i && ok; ++p) {
        crl::Rat gap = vals[static_cast<std::size_t>(p)] - cand;
        if (gap < 0) gap = -gap;
        if (gap > space->rho_truncated(p, i)) ok = false;
      }
      if (ok) options.push_back(cand);
    }
    vals[static_cast<std::size_t>(i)] =
        options[static_cast<std::size_t>(rng() % options.size())];
  }
  return crl::Coloring(space, std::move(vals));
}

}  // namespace testsupport
