#pragma once
// Ramsey values of a triple (A,B,C), witness decisions, candidate search,
// the N-coloring stabilization construction, and verifiable certificates.
//
// V_uniform(A,B,C) = min over nu in Delta(Emb(B,C)) of the max over unordered
// pairs alpha, alpha' in Emb(A,B) of W1(nu o delta_alpha, nu o delta_alpha'),
// computed as one exact LP (weights lambda, one coupling block per pair, and
// the bound t). V_adaptive lets the measure depend on the coloring; it is a
// max of a non-concave function, so the workbench ships certified lower
// bounds: the returned coloring is feasible and its inner value is an exact
// LP optimum with a dual domination certificate.

#include "crl/transport.hpp"

#include <cstdint>
#include <future>
#include <optional>
#include <random>
#include <set>
#include <thread>

namespace crl::ramsey {

struct RamseyInstance {
  StructureRef a, b, c;
  Rat epsilon;  // in (0, 1]
};

struct PairBound {
  int alpha = 0, alpha_prime = 0;  // indices into Emb(A,B)
  OscillationBound bound;
};

struct WitnessCertificate {
  std::string mode;  // uniform | point | adaptive-lower-bound
  StructureRef a, b, c;
  WeightedEmbeddingMeasure nu;  // on Emb(B,C)
  std::vector<PairBound> pairs;
  Rat value;
  // adaptive-lower-bound extras
  std::optional<Coloring> kappa;  // on Emb(A,C)
  struct DualTerm {
    int alpha = 0, alpha_prime = 0;  // indices into Emb(A,B)
    int sign = 1;
    Rat weight;
  };
  std::vector<DualTerm> dual;
};

namespace detail {

struct TripleSpaces {
  StructureRef a, b, c;
  SpaceRef ab, bc, ac;
  // comp[j][i] = index in ac of bc[j] composed after ab[i]
  std::vector<std::vector<int>> comp;
};

inline TripleSpaces enumerate_triple(StructureRef a, StructureRef b, StructureRef c) {
  if (a->signature != b->signature || b->signature != c->signature)
    throw std::invalid_argument("triple (A,B,C): signature mismatch");
  TripleSpaces t;
  t.a = std::move(a);
  t.b = std::move(b);
  t.c = std::move(c);
  t.ab = EmbeddingSpace::enumerate(t.a, t.b);
  t.bc = EmbeddingSpace::enumerate(t.b, t.c);
  t.ac = EmbeddingSpace::enumerate(t.a, t.c);
  t.comp.assign(static_cast<std::size_t>(t.bc->size()),
                std::vector<int>(static_cast<std::size_t>(t.ab->size()), -1));
  std::vector<int> m(static_cast<std::size_t>(t.a->size));
  for (int j = 0; j < t.bc->size(); ++j) {
    const auto& outer = t.bc->at(j).map();
    for (int i = 0; i < t.ab->size(); ++i) {
      const auto& inner = t.ab->at(i).map();
      for (std::size_t p = 0; p < m.size(); ++p)
        m[p] = outer[static_cast<std::size_t>(inner[p])];
      int idx = t.ac->index_of_map(m);
      if (idx < 0) throw std::logic_error("triple: composite embedding missing from Emb(A,C)");
      t.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = idx;
    }
  }
  return t;
}

inline std::vector<std::pair<int, int>> unordered_pairs(int k) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) out.emplace_back(i, j);
  return out;
}

}  // namespace detail

struct UniformValue {
  Rat value;
  WitnessCertificate certificate;
};

// The single-LP computation of V_uniform. Point mode (|Emb(A,B)| < 2) short
// circuits to value 0 with a Dirac witness.
inline UniformValue value_uniform(StructureRef a, StructureRef b, StructureRef c) {
  detail::TripleSpaces ts = detail::enumerate_triple(std::move(a), std::move(b), std::move(c));
  if (ts.ab->size() == 0) throw std::invalid_argument("empty embedding space Emb(A,B)");
  if (ts.bc->size() == 0) throw std::invalid_argument("empty embedding space Emb(B,C)");
  const int J = ts.bc->size();

  if (ts.ab->size() < 2) {
    WitnessCertificate cert{"point", ts.a, ts.b, ts.c,
                            WeightedEmbeddingMeasure::dirac(ts.bc, 0), {}, Rat(0),
                            std::nullopt, {}};
    return UniformValue{Rat(0), std::move(cert)};
  }

  const auto pairs = detail::unordered_pairs(ts.ab->size());
  const int P = static_cast<int>(pairs.size());

  // Per pair: the two pushforward supports in Emb(A,C) and the preimage
  // lists mapping lambda indices onto them.
  struct Block {
    std::vector<int> left, right;           // support indices in ac
    std::vector<std::vector<int>> pre_l, pre_r;  // lambda preimages per support point
    int offset = 0;                          // first pi variable
  };
  std::vector<Block> blocks(static_cast<std::size_t>(P));
  int nv = J + 1;  // lambda then t
  for (int p = 0; p < P; ++p) {
    Block& blk = blocks[static_cast<std::size_t>(p)];
    auto [i1, i2] = pairs[static_cast<std::size_t>(p)];
    std::set<int> sl, sr;
    for (int j = 0; j < J; ++j) {
      sl.insert(ts.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i1)]);
      sr.insert(ts.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i2)]);
    }
    blk.left.assign(sl.begin(), sl.end());
    blk.right.assign(sr.begin(), sr.end());
    blk.pre_l.resize(blk.left.size());
    blk.pre_r.resize(blk.right.size());
    for (int j = 0; j < J; ++j) {
      int el = ts.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i1)];
      int er = ts.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(i2)];
      auto li = std::lower_bound(blk.left.begin(), blk.left.end(), el) - blk.left.begin();
      auto ri = std::lower_bound(blk.right.begin(), blk.right.end(), er) - blk.right.begin();
      blk.pre_l[static_cast<std::size_t>(li)].push_back(j);
      blk.pre_r[static_cast<std::size_t>(ri)].push_back(j);
    }
    blk.offset = nv;
    nv += static_cast<int>(blk.left.size() * blk.right.size());
  }

  lp::RationalLP prog;
  prog.sense = lp::Sense::minimize;
  prog.objective.assign(static_cast<std::size_t>(nv), Rat(0));
  prog.objective[static_cast<std::size_t>(J)] = Rat(1);  // min t
  auto zero_row = [&] { return std::vector<Rat>(static_cast<std::size_t>(nv), Rat(0)); };
  {
    lp::Constraint simplex;
    simplex.row = zero_row();
    for (int j = 0; j < J; ++j) simplex.row[static_cast<std::size_t>(j)] = Rat(1);
    simplex.rel = lp::Rel::eq;
    simplex.rhs = Rat(1);
    prog.constraints.push_back(std::move(simplex));
  }
  for (const Block& blk : blocks) {
    const int R = static_cast<int>(blk.left.size());
    const int S = static_cast<int>(blk.right.size());
    for (int u = 0; u < R; ++u) {
      lp::Constraint c;
      c.row = zero_row();
      for (int v = 0; v < S; ++v) c.row[static_cast<std::size_t>(blk.offset + u * S + v)] = Rat(1);
      for (int j : blk.pre_l[static_cast<std::size_t>(u)]) c.row[static_cast<std::size_t>(j)] -= 1;
      c.rel = lp::Rel::eq;
      c.rhs = Rat(0);
      prog.constraints.push_back(std::move(c));
    }
    for (int v = 0; v < S; ++v) {
      lp::Constraint c;
      c.row = zero_row();
      for (int u = 0; u < R; ++u) c.row[static_cast<std::size_t>(blk.offset + u * S + v)] = Rat(1);
      for (int j : blk.pre_r[static_cast<std::size_t>(v)]) c.row[static_cast<std::size_t>(j)] -= 1;
      c.rel = lp::Rel::eq;
      c.rhs = Rat(0);
      prog.constraints.push_back(std::move(c));
    }
    lp::Constraint cost;
    cost.row = zero_row();
    for (int u = 0; u < R; ++u)
      for (int v = 0; v < S; ++v)
        cost.row[static_cast<std::size_t>(blk.offset + u * S + v)] =
            ts.ac->rho_truncated(blk.left[static_cast<std::size_t>(u)],
                                 blk.right[static_cast<std::size_t>(v)]);
    cost.row[static_cast<std::size_t>(J)] = Rat(-1);
    cost.rel = lp::Rel::le;
    cost.rhs = Rat(0);
    prog.constraints.push_back(std::move(cost));
  }

  lp::Solution sol = lp::solve_lp(prog);
  if (sol.status != lp::Status::optimal)
    throw std::logic_error("value_uniform: LP must be feasible and bounded");

  std::vector<std::pair<int, Rat>> atoms;
  for (int j = 0; j < J; ++j)
    if (sgn(sol.primal[static_cast<std::size_t>(j)]) > 0)
      atoms.emplace_back(j, sol.primal[static_cast<std::size_t>(j)]);
  WeightedEmbeddingMeasure nu = WeightedEmbeddingMeasure::from_atoms(ts.bc, atoms);

  // Independent per-pair replay at the optimal lambda; the max must hit t*.
  std::vector<PairBound> pbs;
  Rat maxval(0);
  for (const auto& [i1, i2] : pairs) {
    auto push1 = compose_measures(WeightedEmbeddingMeasure::dirac(ts.ab, i1), nu, ts.ac);
    auto push2 = compose_measures(WeightedEmbeddingMeasure::dirac(ts.ab, i2), nu, ts.ac);
    OscillationBound ob = kantorovich(push1, push2);
    if (ob.value > maxval) maxval = ob.value;
    pbs.push_back(PairBound{i1, i2, std::move(ob)});
  }
  if (maxval != sol.objective)
    throw std::logic_error("value_uniform: pair replay disagrees with LP optimum");

  WitnessCertificate cert{"uniform", ts.a, ts.b, ts.c, std::move(nu), std::move(pbs), maxval,
                          std::nullopt, {}};
  return UniformValue{maxval, std::move(cert)};
}

// ---------------------------------------------------------------------------
// Adaptive lower bounds

struct SearchBudget {
  int restarts = 200;
  std::uint64_t seed = 0x5eed0b5e55ull;
};

struct AdaptiveLower {
  Rat value;  // certified lower bound on V_adaptive
  WitnessCertificate certificate;
};

namespace detail {

struct InnerResult {
  Rat value;
  std::vector<Rat> lambda;
  std::vector<Rat> qplus, qminus;  // dual weights per pair, >= 0, total <= 1
};

// g(kappa) = min over lambda in the simplex of max over pairs |w_p . lambda|,
// where w[p][j] is the kappa-difference of the pair-p pushforwards of atom j.
inline InnerResult adaptive_inner(const std::vector<std::vector<Rat>>& w) {
  const int P = static_cast<int>(w.size());
  const int J = P ? static_cast<int>(w[0].size()) : 0;
  lp::RationalLP prog;
  prog.sense = lp::Sense::minimize;
  prog.objective.assign(static_cast<std::size_t>(J + 1), Rat(0));
  prog.objective[static_cast<std::size_t>(J)] = Rat(1);
  {
    lp::Constraint simplex;
    simplex.row.assign(static_cast<std::size_t>(J + 1), Rat(0));
    for (int j = 0; j < J; ++j) simplex.row[static_cast<std::size_t>(j)] = Rat(1);
    simplex.rel = lp::Rel::eq;
    simplex.rhs = Rat(1);
    prog.constraints.push_back(std::move(simplex));
  }
  for (int p = 0; p < P; ++p) {
    for (int s = 0; s < 2; ++s) {
      lp::Constraint c;
      c.row.assign(static_cast<std::size_t>(J + 1), Rat(0));
      for (int j = 0; j < J; ++j)
        c.row[static_cast<std::size_t>(j)] = s ? Rat(-w[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)])
                                               : w[static_cast<std::size_t>(p)][static_cast<std::size_t>(j)];
      c.row[static_cast<std::size_t>(J)] = Rat(-1);
      c.rel = lp::Rel::le;
      c.rhs = Rat(0);
      prog.constraints.push_back(std::move(c));
    }
  }
  lp::Solution sol = lp::solve_lp(prog);
  if (sol.status != lp::Status::optimal)
    throw std::logic_error("adaptive inner LP must be feasible and bounded");
  InnerResult out;
  out.value = sol.objective;
  out.lambda.assign(sol.primal.begin(), sol.primal.begin() + J);
  out.qplus.resize(static_cast<std::size_t>(P));
  out.qminus.resize(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) {
    out.qplus[static_cast<std::size_t>(p)] = -sol.dual[static_cast<std::size_t>(1 + 2 * p)];
    out.qminus[static_cast<std::size_t>(p)] = -sol.dual[static_cast<std::size_t>(2 + 2 * p)];
  }
  return out;
}

inline std::vector<std::vector<Rat>> pair_differences(const TripleSpaces& ts,
                                                      const std::vector<std::pair<int, int>>& pairs,
                                                      const std::vector<Rat>& kappa) {
  const int J = ts.bc->size();
  std::vector<std::vector<Rat>> w(pairs.size(), std::vector<Rat>(static_cast<std::size_t>(J)));
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (int j = 0; j < J; ++j)
      w[p][static_cast<std::size_t>(j)] =
          kappa[static_cast<std::size_t>(ts.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(pairs[p].first)])] -
          kappa[static_cast<std::size_t>(ts.comp[static_cast<std::size_t>(j)][static_cast<std::size_t>(pairs[p].second)])];
  return w;
}

}  // namespace detail

// Certified lower bound on V_adaptive: random vertices of the Lipschitz
// polytope, refined by single-coordinate ascent over a small candidate set,
// each evaluation an exact inner LP. The best coloring ships with its
// best-response measure and an exact dual domination certificate.
inline AdaptiveLower value_adaptive_lower(StructureRef a, StructureRef b, StructureRef c,
                                          const SearchBudget& budget = {}) {
  detail::TripleSpaces ts = detail::enumerate_triple(std::move(a), std::move(b), std::move(c));
  if (ts.ab->size() == 0) throw std::invalid_argument("empty embedding space Emb(A,B)");
  if (ts.bc->size() == 0) throw std::invalid_argument("empty embedding space Emb(B,C)");
  const int E = ts.ac->size();
  const auto pairs = detail::unordered_pairs(ts.ab->size());

  auto finish = [&](std::vector<Rat> kappa, const detail::InnerResult& inner) {
    // Exactness of the bound for this coloring, both directions.
    auto w = detail::pair_differences(ts, pairs, kappa);
    Rat reached(0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      Rat dot(0);
      for (std::size_t j = 0; j < inner.lambda.size(); ++j) dot += w[p][j] * inner.lambda[j];
      if (dot < 0) dot = -dot;
      if (dot > reached) reached = dot;
    }
    if (reached != inner.value)
      throw std::logic_error("adaptive: best response does not reach the inner optimum");
    Rat qsum(0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (inner.qplus[p] < 0 || inner.qminus[p] < 0)
        throw std::logic_error("adaptive: negative dual weight");
      qsum += inner.qplus[p] + inner.qminus[p];
    }
    if (qsum > 1) throw std::logic_error("adaptive: dual weights exceed unit mass");
    for (std::size_t j = 0; j < inner.lambda.size(); ++j) {
      Rat dom(0);
      for (std::size_t p = 0; p < pairs.size(); ++p)
        dom += (inner.qplus[p] - inner.qminus[p]) * w[p][j];
      if (dom < inner.value)
        throw std::logic_error("adaptive: dual domination fails");
    }

    std::vector<std::pair<int, Rat>> atoms;
    for (std::size_t j = 0; j < inner.lambda.size(); ++j)
      if (sgn(inner.lambda[j]) > 0) atoms.emplace_back(static_cast<int>(j), inner.lambda[j]);
    WitnessCertificate cert{"adaptive-lower-bound", ts.a, ts.b, ts.c,
                            WeightedEmbeddingMeasure::from_atoms(ts.bc, atoms), {}, inner.value,
                            Coloring(ts.ac, std::move(kappa)), {}};
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (sgn(inner.qplus[p]) > 0)
        cert.dual.push_back({pairs[p].first, pairs[p].second, +1, inner.qplus[p]});
      if (sgn(inner.qminus[p]) > 0)
        cert.dual.push_back({pairs[p].first, pairs[p].second, -1, inner.qminus[p]});
    }
    return AdaptiveLower{inner.value, std::move(cert)};
  };

  std::vector<Rat> zero(static_cast<std::size_t>(E), Rat(0));
  if (pairs.empty() || E == 0)
    return finish(zero, detail::adaptive_inner(detail::pair_differences(ts, pairs, zero)));

  // Lipschitz polytope rows: only pairs with truncated rho below 1 constrain
  // anything beyond the [0,1] box.
  std::vector<std::tuple<int, int, Rat>> lip;
  for (int e = 0; e < E; ++e)
    for (int f = e + 1; f < E; ++f) {
      Rat r = ts.ac->rho_truncated(e, f);
      if (r < 1) lip.emplace_back(e, f, r);
    }

  std::mt19937_64 rng(budget.seed);
  auto rand_small = [&](int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
  };

  auto eval = [&](const std::vector<Rat>& kappa) {
    return detail::adaptive_inner(detail::pair_differences(ts, pairs, kappa));
  };

  std::vector<Rat> best_kappa = zero;
  detail::InnerResult best = eval(best_kappa);
  std::set<std::vector<Rat>> seen;
  seen.insert(best_kappa);

  const std::vector<Rat> grid_candidates = {Rat(0), rat(1, 4), rat(1, 2), rat(3, 4), Rat(1)};

  for (int restart = 0; restart < budget.restarts; ++restart) {
    // Random vertex of the polytope.
    lp::RationalLP vlp;
    vlp.sense = lp::Sense::maximize;
    vlp.objective.resize(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) vlp.objective[static_cast<std::size_t>(e)] = Rat(rand_small(-9, 9));
    vlp.bounds.assign(static_cast<std::size_t>(E), lp::VarBounds{Rat(0), Rat(1)});
    for (const auto& [e, f, r] : lip) {
      lp::Constraint c1;
      c1.row.assign(static_cast<std::size_t>(E), Rat(0));
      c1.row[static_cast<std::size_t>(e)] = Rat(1);
      c1.row[static_cast<std::size_t>(f)] = Rat(-1);
      c1.rel = lp::Rel::le;
      c1.rhs = r;
      lp::Constraint c2 = c1;
      c2.row[static_cast<std::size_t>(e)] = Rat(-1);
      c2.row[static_cast<std::size_t>(f)] = Rat(1);
      vlp.constraints.push_back(std::move(c1));
      vlp.constraints.push_back(std::move(c2));
    }
    lp::Solution vs = lp::solve_lp(vlp);
    if (vs.status != lp::Status::optimal)
      throw std::logic_error("adaptive: vertex LP must be feasible and bounded");
    std::vector<Rat> kappa = vs.primal;

    detail::InnerResult cur;
    bool have_cur = false;
    if (seen.insert(kappa).second) {
      cur = eval(kappa);
      have_cur = true;
      if (cur.value > best.value) {
        best = cur;
        best_kappa = kappa;
      }
    } else {
      continue;  // vertex already explored together with its ascent
    }

    // Single-coordinate ascent: move one value to an end of its feasible
    // interval or to a quarter point inside it, keep strict improvements.
    bool improved = true;
    int guard = 0;
    while (improved && ++guard <= 64) {
      improved = false;
      for (int e = 0; e < E; ++e) {
        Rat lo(0), hi(1);
        for (const auto& [x, y, r] : lip) {
          if (x == e) {
            if (kappa[static_cast<std::size_t>(y)] - r > lo) lo = kappa[static_cast<std::size_t>(y)] - r;
            if (kappa[static_cast<std::size_t>(y)] + r < hi) hi = kappa[static_cast<std::size_t>(y)] + r;
          } else if (y == e) {
            if (kappa[static_cast<std::size_t>(x)] - r > lo) lo = kappa[static_cast<std::size_t>(x)] - r;
            if (kappa[static_cast<std::size_t>(x)] + r < hi) hi = kappa[static_cast<std::size_t>(x)] + r;
          }
        }
        std::vector<Rat> cands;
        cands.push_back(lo);
        cands.push_back(hi);
        for (const Rat& q : grid_candidates)
          if (lo < q && q < hi) cands.push_back(q);
        for (const Rat& cand : cands) {
          if (cand == kappa[static_cast<std::size_t>(e)]) continue;
          std::vector<Rat> trial = kappa;
          trial[static_cast<std::size_t>(e)] = cand;
          if (!seen.insert(trial).second) continue;
          detail::InnerResult r2 = eval(trial);
          if (!have_cur || r2.value > cur.value) {
            cur = r2;
            have_cur = true;
            kappa = std::move(trial);
            improved = true;
            if (cur.value > best.value) {
              best = cur;
              best_kappa = kappa;
            }
            break;
          }
        }
      }
    }
  }

  return finish(best_kappa, best);
}

// ---------------------------------------------------------------------------
// Decision and search

enum class Verdict { yes, no, degenerate };

// Distinguishes the two ways an instance can degenerate: no pairs to color
// (the property holds vacuously) versus no measure to witness it.
enum class DegenerateKind { none, vacuous_pairs, no_measure };

struct Decision {
  Verdict verdict = Verdict::degenerate;
  DegenerateKind degenerate_kind = DegenerateKind::none;
  bool one_sided = false;  // adaptive YES certifies only the absence of a found failure
  std::string note;
  std::optional<Rat> value;
  std::optional<WitnessCertificate> certificate;
};

inline Decision decide_witness(const RamseyInstance& inst, const std::string& mode,
                               const SearchBudget& budget = {}) {
  if (inst.epsilon <= 0 || inst.epsilon > 1)
    throw std::invalid_argument("epsilon must lie in (0,1]");
  if (mode != "uniform" && mode != "adaptive")
    throw std::invalid_argument("decide_witness: mode must be uniform or adaptive");
  if (inst.a->signature != inst.b->signature || inst.b->signature != inst.c->signature)
    throw std::invalid_argument("triple (A,B,C): signature mismatch");
  Decision d;
  auto ab = EmbeddingSpace::enumerate(inst.a, inst.b);
  if (ab->size() == 0) {
    d.verdict = Verdict::degenerate;
    d.degenerate_kind = DegenerateKind::vacuous_pairs;
    d.note = "Emb(A,B) is empty: the property is vacuous over no pairs";
    return d;
  }
  auto bc = EmbeddingSpace::enumerate(inst.b, inst.c);
  if (bc->size() == 0) {
    d.verdict = Verdict::degenerate;
    d.degenerate_kind = DegenerateKind::no_measure;
    d.note = "Emb(B,C) is empty: no witnessing measure exists";
    return d;
  }
  if (mode == "uniform") {
    UniformValue uv = value_uniform(inst.a, inst.b, inst.c);
    d.value = uv.value;
    d.verdict = uv.value <= inst.epsilon ? Verdict::yes : Verdict::no;
    d.certificate = std::move(uv.certificate);
  } else {
    AdaptiveLower al = value_adaptive_lower(inst.a, inst.b, inst.c, budget);
    d.value = al.value;
    d.one_sided = true;
    if (al.value <= inst.epsilon) {
      d.verdict = Verdict::yes;
      d.note = "one-sided: no coloring exceeding epsilon was found within budget";
    } else {
      d.verdict = Verdict::no;
      d.note = "conclusive: the certified coloring forces oscillation above epsilon";
    }
    d.certificate = std::move(al.certificate);
  }
  return d;
}

struct SearchOutcome {
  enum class Status { found, exhausted, vacuous } status = Status::exhausted;
  int index = -1;  // into the candidate list
  std::optional<UniformValue> result;
  // one entry per inspected candidate: exact value, or no value when the
  // candidate admits no measure (Emb(B,C) empty)
  std::vector<std::optional<Rat>> trail;
};

inline int resolve_jobs(std::optional<int> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("CRL_JOBS")) {
    int j = std::atoi(env);
    if (j > 0) return j;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// Scan candidates in order, returning the first C whose uniform value is at
// most epsilon. Candidates are evaluated in parallel waves but the winner is
// always the lowest index; the trail covers every candidate up to it.
inline SearchOutcome search_witness(StructureRef a, StructureRef b, const Rat& epsilon,
                                    const std::vector<StructureRef>& candidates,
                                    std::optional<int> jobs = std::nullopt) {
  SearchOutcome out;
  auto ab = EmbeddingSpace::enumerate(a, b);
  if (ab->size() == 0) {
    out.status = SearchOutcome::Status::vacuous;
    return out;
  }
  const int J = resolve_jobs(jobs);
  const int n = static_cast<int>(candidates.size());
  auto eval_one = [&](int i) -> std::optional<UniformValue> {
    auto bc = EmbeddingSpace::enumerate(b, candidates[static_cast<std::size_t>(i)]);
    if (bc->size() == 0) return std::nullopt;
    return value_uniform(a, b, candidates[static_cast<std::size_t>(i)]);
  };
  for (int base = 0; base < n; base += J) {
    const int hi = std::min(n, base + J);
    std::vector<std::future<std::optional<UniformValue>>> wave;
    for (int i = base; i < hi; ++i)
      wave.push_back(std::async(J > 1 ? std::launch::async : std::launch::deferred, eval_one, i));
    for (int i = base; i < hi; ++i) {
      std::optional<UniformValue> r = wave[static_cast<std::size_t>(i - base)].get();
      out.trail.push_back(r ? std::optional<Rat>(r->value) : std::nullopt);
      if (r && r->value <= epsilon && out.status != SearchOutcome::Status::found) {
        out.status = SearchOutcome::Status::found;
        out.index = i;
        out.result = std::move(r);
      }
    }
    if (out.status == SearchOutcome::Status::found) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stabilization of many colorings down a witness chain

struct StabilizeStep {
  StructureRef next;
  std::optional<WeightedEmbeddingMeasure> nu;  // on Emb(C_j, C_{j+1}); computed if absent
};

struct StabilizeReport {
  WeightedEmbeddingMeasure mu;   // on Emb(B, C_N)
  std::vector<Rat> step_values;  // certified uniform value of each step
  std::vector<Rat> oscillations; // exact final oscillation per coloring
  bool pass(const Rat& epsilon) const {
    for (const auto& o : oscillations)
      if (o > epsilon) return false;
    return true;
  }
};

// Downward induction: mu_N = delta_id on Emb(C_N, C_N), mu_j = mu_{j+1}
// composed after nu_j. Each coloring is lifted level by level
// (lift_j(alpha) = kappa(mu_{j+1} o delta_alpha)); lifts stay 1-Lipschitz, so
// each step's value bounds the next lift's oscillation, and the final
// per-coloring oscillation is recomputed exactly from the composed measure.
inline StabilizeReport stabilize_many(StructureRef a, StructureRef b,
                                      const std::vector<StabilizeStep>& steps,
                                      const std::vector<Coloring>& colorings) {
  if (steps.empty()) throw std::invalid_argument("stabilize_many: empty chain");
  const int N = static_cast<int>(steps.size());
  std::vector<StructureRef> chain;
  chain.push_back(b);
  for (const auto& s : steps) chain.push_back(s.next);

  // Step measures and their certified values.
  std::vector<WeightedEmbeddingMeasure> nus;
  std::vector<Rat> step_values;
  std::vector<SpaceRef> step_space(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) {
    const StructureRef& cj = chain[static_cast<std::size_t>(j)];
    const StructureRef& cj1 = chain[static_cast<std::size_t>(j) + 1];
    if (steps[static_cast<std::size_t>(j)].nu) {
      const WeightedEmbeddingMeasure& nu = *steps[static_cast<std::size_t>(j)].nu;
      if (nu.space()->source() != cj || nu.space()->target() != cj1)
        throw std::invalid_argument("stabilize_many: chain mismatch at step " + std::to_string(j));
      step_space[static_cast<std::size_t>(j)] = nu.space();
      PushforwardFamily fam = pushforward_family(nu, a);
      Rat v(0);
      for (std::size_t u = 0; u < fam.members.size(); ++u)
        for (std::size_t w = u + 1; w < fam.members.size(); ++w) {
          Rat d = kantorovich(fam.members[u], fam.members[w]).value;
          if (d > v) v = d;
        }
      nus.push_back(nu);
      step_values.push_back(v);
    } else {
      UniformValue uv = [&] {
        try {
          return value_uniform(a, cj, cj1);
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument("stabilize_many: chain mismatch at step " +
                                      std::to_string(j) + ": " + e.what());
        }
      }();
      step_space[static_cast<std::size_t>(j)] = uv.certificate.nu.space();
      nus.push_back(uv.certificate.nu);
      step_values.push_back(uv.value);
    }
  }

  // Composed suffix measures mu_j on Emb(C_j, C_N).
  const StructureRef& cn = chain.back();
  std::vector<WeightedEmbeddingMeasure> mu;  // index j holds mu_j, built backwards
  SpaceRef end_space = EmbeddingSpace::enumerate(cn, cn);
  std::vector<int> id_map(static_cast<std::size_t>(cn->size));
  for (int i = 0; i < cn->size; ++i) id_map[static_cast<std::size_t>(i)] = i;
  int id_idx = end_space->index_of_map(id_map);
  if (id_idx < 0) throw std::logic_error("stabilize_many: identity missing from Emb(C_N,C_N)");
  mu.resize(static_cast<std::size_t>(N) + 1,
            WeightedEmbeddingMeasure::dirac(end_space, id_idx));
  for (int j = N - 1; j >= 0; --j)
    mu[static_cast<std::size_t>(j)] = compose_measures(nus[static_cast<std::size_t>(j)],
                                                       mu[static_cast<std::size_t>(j) + 1]);

  // Colorings live on Emb(A, C_N); reuse the caller's space.
  SpaceRef acn;
  for (const auto& kappa : colorings) {
    if (kappa.space()->source() != a || kappa.space()->target() != cn)
      throw std::invalid_argument("stabilize_many: coloring not on Emb(A, C_N)");
    acn = kappa.space();
  }
  if (!acn) acn = EmbeddingSpace::enumerate(a, cn);

  // Lift each coloring down the chain; every lift must oscillate within the
  // step value, which is the induction the composed measure relies on.
  std::vector<SpaceRef> ac(static_cast<std::size_t>(N) + 1);
  ac[static_cast<std::size_t>(N)] = acn;
  for (int j = 0; j < N; ++j)
    ac[static_cast<std::size_t>(j)] = EmbeddingSpace::enumerate(a, chain[static_cast<std::size_t>(j)]);
  std::vector<Rat> oscillations;
  for (const auto& kappa : colorings) {
    std::vector<Rat> lifted = kappa.values();
    for (int j = N - 1; j >= 0; --j) {
      Coloring level(ac[static_cast<std::size_t>(j) + 1], lifted);
      std::vector<Rat> down(static_cast<std::size_t>(ac[static_cast<std::size_t>(j)]->size()));
      for (int alpha = 0; alpha < ac[static_cast<std::size_t>(j)]->size(); ++alpha) {
        auto push = compose_measures(
            WeightedEmbeddingMeasure::dirac(ac[static_cast<std::size_t>(j)], alpha),
            nus[static_cast<std::size_t>(j)], ac[static_cast<std::size_t>(j) + 1]);
        down[static_cast<std::size_t>(alpha)] = evaluate_coloring(level, push);
      }
      for (std::size_t u = 0; u < down.size(); ++u)
        for (std::size_t w = u + 1; w < down.size(); ++w) {
          Rat d = down[u] - down[w];
          if (d < 0) d = -d;
          if (d > step_values[static_cast<std::size_t>(j)])
            throw std::logic_error("stabilize_many: lift oscillation exceeds step value");
        }
      lifted = std::move(down);
    }
    // lifted now sits on Emb(A, C_0 = B); cross-check against the composed
    // measure's pushforward family.
    PushforwardFamily fam = pushforward_family(mu[0], a, ac[0], acn);
    Rat osc(0);
    for (std::size_t u = 0; u < fam.members.size(); ++u) {
      Rat direct = evaluate_coloring(kappa, fam.members[u]);
      if (direct != lifted[u])
        throw std::logic_error("stabilize_many: lift disagrees with composed pushforward");
      for (std::size_t w = u + 1; w < fam.members.size(); ++w) {
        Rat d = direct - evaluate_coloring(kappa, fam.members[w]);
        if (d < 0) d = -d;
        if (d > osc) osc = d;
      }
    }
    oscillations.push_back(osc);
  }

  return StabilizeReport{mu[0], std::move(step_values), std::move(oscillations)};
}

}  // namespace crl::ramsey
