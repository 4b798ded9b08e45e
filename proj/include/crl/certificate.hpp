#pragma once
// Self-contained witness certificates: a text format carrying the structures,
// the measure, and enough exact rational data that an independent checker can
// replay every claim with plain arithmetic and embedding enumeration, no LP
// solver involved.
//
// Uniform certificates pin each pair value from both sides: the coupling's
// cost bounds the transport distance from above, the potential's gap bounds
// it from below, and both must equal the declared value. Adaptive
// certificates carry the coloring, the best-response measure, and the dual
// weights whose domination inequality forces every measure to oscillate at
// least as much.
//
// All point maps in this format are 0-based lists "p_1 .. p_k" giving images
// of the source points in enumeration order; their lengths are fixed by the
// embedded structures, so the token stream is self-delimiting.

#include "crl/ramsey.hpp"

#include <array>
#include <sstream>
#include <unordered_map>

namespace crl::ramsey {

struct CertCoupling {
  Rat mass;
  std::vector<int> left, right;  // maps A -> C
};

struct CertPair {
  std::vector<int> alpha, alpha_prime;  // maps A -> B
  Rat value;
  std::vector<CertCoupling> coupling;
  std::vector<std::pair<std::vector<int>, Rat>> potential;  // map A -> C, value
};

struct CertDualTerm {
  int sign = 1;
  Rat weight;
  std::vector<int> alpha, alpha_prime;
};

struct CertDoc {
  std::string mode;
  Rat value;
  std::string hash_a, hash_b, hash_c;
  MetricStructure a, b, c;
  std::vector<std::pair<std::vector<int>, Rat>> nu;     // map B -> C, weight
  std::vector<CertPair> pairs;
  std::vector<std::pair<std::vector<int>, Rat>> kappa;  // map A -> C, value
  std::vector<CertDualTerm> dual;
};

inline CertDoc doc_from_witness(const WitnessCertificate& w) {
  CertDoc doc;
  doc.mode = w.mode;
  doc.value = w.value;
  doc.a = *w.a;
  doc.b = *w.b;
  doc.c = *w.c;
  doc.hash_a = structure_hash(doc.a);
  doc.hash_b = structure_hash(doc.b);
  doc.hash_c = structure_hash(doc.c);
  const SpaceRef& bc = w.nu.space();
  for (const auto& [idx, wt] : w.nu.atoms()) doc.nu.emplace_back(bc->at(idx).map(), wt);
  for (const PairBound& pb : w.pairs) {
    const OscillationBound& ob = pb.bound;
    CertPair cp;
    cp.value = ob.value;
    for (const auto& [i, j, m] : ob.coupling)
      cp.coupling.push_back({m, ob.mu.space()->at(i).map(), ob.mu.space()->at(j).map()});
    for (int e = 0; e < ob.mu.space()->size(); ++e)
      cp.potential.emplace_back(ob.mu.space()->at(e).map(),
                                ob.potential.values()[static_cast<std::size_t>(e)]);
    doc.pairs.push_back(std::move(cp));
  }
  // alpha indices refer to Emb(A,B); recover the maps.
  if (!w.pairs.empty() || !w.dual.empty() || w.kappa) {
    StructureRef a_ref = w.a, b_ref = w.b;
    auto ab_space = EmbeddingSpace::enumerate(a_ref, b_ref);
    for (std::size_t p = 0; p < w.pairs.size(); ++p) {
      doc.pairs[p].alpha = ab_space->at(w.pairs[p].alpha).map();
      doc.pairs[p].alpha_prime = ab_space->at(w.pairs[p].alpha_prime).map();
    }
    for (const auto& t : w.dual)
      doc.dual.push_back({t.sign, t.weight, ab_space->at(t.alpha).map(),
                          ab_space->at(t.alpha_prime).map()});
  }
  if (w.kappa) {
    const SpaceRef& ac_space = w.kappa->space();
    for (int e = 0; e < ac_space->size(); ++e)
      doc.kappa.emplace_back(ac_space->at(e).map(),
                             w.kappa->values()[static_cast<std::size_t>(e)]);
  }
  return doc;
}

namespace detail {

inline void write_map(std::ostream& out, const std::vector<int>& m) {
  for (int p : m) out << " " << p;
}

inline std::vector<int> read_map(crl::detail::TokenReader& tok, int len, int target_size,
                                 const char* what) {
  std::vector<int> m(static_cast<std::size_t>(len));
  for (int i = 0; i < len; ++i) {
    int p = tok.next_int(what);
    if (p < 0 || p >= target_size)
      throw ParseError(std::string(what) + ": point " + std::to_string(p) + " out of range");
    m[static_cast<std::size_t>(i)] = p;
  }
  return m;
}

struct MapHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::uint64_t h = 14695981039346656037ull;
    for (int x : v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

using MapDict = std::unordered_map<std::vector<int>, Rat, MapHash>;

}  // namespace detail

inline std::string serialize_certificate(const CertDoc& doc) {
  std::ostringstream out;
  out << "crl-cert v1\n";
  out << "mode " << doc.mode << "\n";
  out << "value " << rat_str(doc.value) << "\n";
  out << "structure A " << doc.hash_a << "\n" << serialize_structure(doc.a);
  out << "structure B " << doc.hash_b << "\n" << serialize_structure(doc.b);
  out << "structure C " << doc.hash_c << "\n" << serialize_structure(doc.c);
  out << "nu " << doc.nu.size() << "\n";
  for (const auto& [m, wt] : doc.nu) {
    out << "atom " << rat_str(wt);
    detail::write_map(out, m);
    out << "\n";
  }
  out << "pairs " << doc.pairs.size() << "\n";
  for (const CertPair& cp : doc.pairs) {
    out << "pair\nalpha";
    detail::write_map(out, cp.alpha);
    out << "\nalpha-prime";
    detail::write_map(out, cp.alpha_prime);
    out << "\npair-value " << rat_str(cp.value) << "\n";
    out << "coupling " << cp.coupling.size() << "\n";
    for (const CertCoupling& row : cp.coupling) {
      out << "mass " << rat_str(row.mass);
      detail::write_map(out, row.left);
      detail::write_map(out, row.right);
      out << "\n";
    }
    out << "potential " << cp.potential.size() << "\n";
    for (const auto& [m, v] : cp.potential) {
      out << "phi " << rat_str(v);
      detail::write_map(out, m);
      out << "\n";
    }
  }
  out << "kappa " << doc.kappa.size() << "\n";
  for (const auto& [m, v] : doc.kappa) {
    out << "phi " << rat_str(v);
    detail::write_map(out, m);
    out << "\n";
  }
  out << "dual " << doc.dual.size() << "\n";
  for (const CertDualTerm& t : doc.dual) {
    out << "term " << (t.sign > 0 ? "+1" : "-1") << " " << rat_str(t.weight);
    detail::write_map(out, t.alpha);
    detail::write_map(out, t.alpha_prime);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

inline CertDoc parse_certificate(std::istream& in) {
  return [&in]() -> CertDoc {
    crl::detail::TokenReader tok(in);
    CertDoc doc;
    tok.expect("crl-cert");
    tok.expect("v1");
    tok.expect("mode");
    doc.mode = tok.next("mode");
    if (doc.mode != "uniform" && doc.mode != "point" && doc.mode != "adaptive-lower-bound")
      throw ParseError("unknown certificate mode '" + doc.mode + "'");
    tok.expect("value");
    doc.value = tok.next_rat("certificate value");
    tok.expect("structure");
    tok.expect("A");
    doc.hash_a = tok.next("structure A hash");
    doc.a = parse_structure(in);
    tok.expect("structure");
    tok.expect("B");
    doc.hash_b = tok.next("structure B hash");
    doc.b = parse_structure(in);
    tok.expect("structure");
    tok.expect("C");
    doc.hash_c = tok.next("structure C hash");
    doc.c = parse_structure(in);
    const int na = doc.a.size, nb = doc.b.size, nc = doc.c.size;
    tok.expect("nu");
    int natoms = tok.next_int("atom count");
    if (natoms < 0) throw ParseError("negative atom count");
    for (int i = 0; i < natoms; ++i) {
      tok.expect("atom");
      Rat wt = tok.next_rat("atom weight");
      doc.nu.emplace_back(detail::read_map(tok, nb, nc, "atom map"), wt);
    }
    tok.expect("pairs");
    int npairs = tok.next_int("pair count");
    if (npairs < 0) throw ParseError("negative pair count");
    for (int p = 0; p < npairs; ++p) {
      tok.expect("pair");
      CertPair cp;
      tok.expect("alpha");
      cp.alpha = detail::read_map(tok, na, nb, "alpha map");
      tok.expect("alpha-prime");
      cp.alpha_prime = detail::read_map(tok, na, nb, "alpha-prime map");
      tok.expect("pair-value");
      cp.value = tok.next_rat("pair value");
      tok.expect("coupling");
      int nrows = tok.next_int("coupling row count");
      if (nrows < 0) throw ParseError("negative coupling row count");
      for (int r = 0; r < nrows; ++r) {
        tok.expect("mass");
        CertCoupling row;
        row.mass = tok.next_rat("coupling mass");
        row.left = detail::read_map(tok, na, nc, "coupling left map");
        row.right = detail::read_map(tok, na, nc, "coupling right map");
        cp.coupling.push_back(std::move(row));
      }
      tok.expect("potential");
      int npts = tok.next_int("potential point count");
      if (npts < 0) throw ParseError("negative potential point count");
      for (int q = 0; q < npts; ++q) {
        tok.expect("phi");
        Rat v = tok.next_rat("potential value");
        cp.potential.emplace_back(detail::read_map(tok, na, nc, "potential map"), v);
      }
      doc.pairs.push_back(std::move(cp));
    }
    tok.expect("kappa");
    int nk = tok.next_int("kappa point count");
    if (nk < 0) throw ParseError("negative kappa point count");
    for (int q = 0; q < nk; ++q) {
      tok.expect("phi");
      Rat v = tok.next_rat("kappa value");
      doc.kappa.emplace_back(detail::read_map(tok, na, nc, "kappa map"), v);
    }
    tok.expect("dual");
    int nd = tok.next_int("dual term count");
    if (nd < 0) throw ParseError("negative dual term count");
    for (int t = 0; t < nd; ++t) {
      tok.expect("term");
      std::string sg = tok.next("dual sign");
      CertDualTerm dt;
      if (sg == "+1")
        dt.sign = 1;
      else if (sg == "-1")
        dt.sign = -1;
      else
        throw ParseError("dual sign must be +1 or -1, got '" + sg + "'");
      dt.weight = tok.next_rat("dual weight");
      dt.alpha = detail::read_map(tok, na, nb, "dual alpha map");
      dt.alpha_prime = detail::read_map(tok, na, nb, "dual alpha-prime map");
      doc.dual.push_back(std::move(dt));
    }
    tok.expect("end");
    return doc;
  }();
}

inline CertDoc parse_certificate_text(const std::string& text) {
  std::istringstream in(text);
  CertDoc doc = parse_certificate(in);
  std::string rest;
  if (in >> rest) throw ParseError("trailing content after certificate: '" + rest + "'");
  return doc;
}

struct VerifyResult {
  bool ok = false;
  std::string failure_class;  // empty when ok
  std::string detail;
};

// Replays every claim of the certificate with exact arithmetic. Returns the
// first failure, tagged with a machine-readable class.
inline VerifyResult verify_certificate(const CertDoc& doc) {
  auto fail = [](std::string cls, std::string det) {
    return VerifyResult{false, std::move(cls), std::move(det)};
  };

  // Structures: internally consistent, matching hashes, one signature.
  const std::array<std::pair<const MetricStructure*, const char*>, 3> parts = {
      {{&doc.a, "A"}, {&doc.b, "B"}, {&doc.c, "C"}}};
  for (const auto& [s, name] : parts) {
    ValidationReport rep = validate_structure(*s);
    if (!rep.pass()) return fail("structure", std::string(name) + ": " + rep.to_string());
  }
  if (structure_hash(doc.a) != doc.hash_a) return fail("hash", "structure A hash mismatch");
  if (structure_hash(doc.b) != doc.hash_b) return fail("hash", "structure B hash mismatch");
  if (structure_hash(doc.c) != doc.hash_c) return fail("hash", "structure C hash mismatch");
  if (doc.a.signature != doc.b.signature || doc.b.signature != doc.c.signature)
    return fail("structure", "signature mismatch across A, B, C");

  StructureRef a = share(doc.a), b = share(doc.b), c = share(doc.c);
  auto ab = EmbeddingSpace::enumerate(a, b);
  auto bc = EmbeddingSpace::enumerate(b, c);
  auto ac = EmbeddingSpace::enumerate(a, c);

  // Truncated sup-distance between two maps A -> C, straight off the metric.
  auto rho_bar = [&](const std::vector<int>& m1, const std::vector<int>& m2) {
    Rat r(0);
    for (std::size_t p = 0; p < m1.size(); ++p) {
      Rat d = doc.c.d(m1[p], m2[p]);
      if (d > r) r = d;
    }
    return r > 1 ? Rat(1) : r;
  };

  // The measure: valid embeddings, distinct, positive weights, total mass 1.
  detail::MapDict nu;
  Rat mass(0);
  for (const auto& [m, wt] : doc.nu) {
    if (!is_embedding_map(doc.b, doc.c, m))
      return fail("measure", "atom map is not an embedding of B into C");
    if (wt <= 0) return fail("measure", "atom weight " + rat_str(wt) + " not positive");
    if (!nu.emplace(m, wt).second) return fail("measure", "duplicate atom map");
    mass += wt;
  }
  if (mass != 1) return fail("measure", "atom weights sum to " + rat_str(mass) + ", not 1");
  if (doc.nu.empty()) return fail("measure", "measure has no atoms");

  auto compose_map = [](const std::vector<int>& outer, const std::vector<int>& inner) {
    std::vector<int> m(inner.size());
    for (std::size_t p = 0; p < inner.size(); ++p)
      m[p] = outer[static_cast<std::size_t>(inner[p])];
    return m;
  };

  // Pushforward of nu along alpha as a map-indexed dictionary on Emb(A,C).
  auto pushforward = [&](const std::vector<int>& alpha) {
    detail::MapDict out;
    for (const auto& [m, wt] : doc.nu) out[compose_map(m, alpha)] += wt;
    return out;
  };

  if (doc.mode == "uniform" || doc.mode == "point") {
    if (!doc.kappa.empty() || !doc.dual.empty())
      return fail("format", doc.mode + " certificate carries adaptive sections");
    if (doc.mode == "point") {
      if (ab->size() > 1)
        return fail("pair-coverage", "point mode but Emb(A,B) has " +
                                         std::to_string(ab->size()) + " elements");
      if (!doc.pairs.empty()) return fail("pair-coverage", "point certificate lists pairs");
      if (doc.value != 0) return fail("value", "point certificate must declare value 0");
      return VerifyResult{true, "", ""};
    }

    // Every unordered pair of Emb(A,B), exactly once.
    std::set<std::pair<int, int>> covered;
    Rat maxval(0);
    for (const CertPair& cp : doc.pairs) {
      int i1 = ab->index_of_map(cp.alpha);
      int i2 = ab->index_of_map(cp.alpha_prime);
      if (i1 < 0 || i2 < 0)
        return fail("pair-coverage", "pair references a map outside Emb(A,B)");
      if (i1 == i2) return fail("pair-coverage", "pair with equal embeddings");
      if (i1 > i2) std::swap(i1, i2);
      if (!covered.emplace(i1, i2).second)
        return fail("pair-coverage", "duplicate pair");

      detail::MapDict mu = pushforward(cp.alpha);
      detail::MapDict mu_prime = pushforward(cp.alpha_prime);

      // Coupling rows: positive masses whose marginals are exactly mu and
      // mu_prime, and whose cost equals the declared pair value.
      detail::MapDict row_l, row_r;
      Rat cost(0);
      for (const CertCoupling& row : cp.coupling) {
        if (row.mass <= 0) return fail("pair-marginal", "coupling mass not positive");
        row_l[row.left] += row.mass;
        row_r[row.right] += row.mass;
        cost += row.mass * rho_bar(row.left, row.right);
      }
      auto marginals_match = [](const detail::MapDict& got, const detail::MapDict& want) {
        if (got.size() != want.size()) return false;
        for (const auto& [m, wt] : want) {
          auto it = got.find(m);
          if (it == got.end() || it->second != wt) return false;
        }
        return true;
      };
      if (!marginals_match(row_l, mu))
        return fail("pair-marginal", "left marginal differs from the pushforward of nu");
      if (!marginals_match(row_r, mu_prime))
        return fail("pair-marginal", "right marginal differs from the pushforward of nu");
      if (cost != cp.value)
        return fail("pair-cost", "coupling cost " + rat_str(cost) +
                                     " differs from pair value " + rat_str(cp.value));

      // Potential: total on Emb(A,C), range [0,1], 1-Lipschitz, and its gap
      // on (mu, mu_prime) reaches the pair value.
      detail::MapDict phi;
      for (const auto& [m, v] : cp.potential) {
        if (!is_embedding_map(doc.a, doc.c, m))
          return fail("potential-range", "potential point is not an embedding of A into C");
        if (v < 0 || v > 1)
          return fail("potential-range", "potential value " + rat_str(v) + " outside [0,1]");
        if (!phi.emplace(m, v).second)
          return fail("potential-range", "duplicate potential point");
      }
      if (static_cast<int>(phi.size()) != ac->size())
        return fail("potential-range", "potential does not cover Emb(A,C)");
      for (const auto& [m1, v1] : phi)
        for (const auto& [m2, v2] : phi) {
          Rat diff = v1 - v2;
          if (diff < 0) diff = -diff;
          if (diff > rho_bar(m1, m2))
            return fail("potential-lipschitz", "potential violates 1-Lipschitz bound");
        }
      Rat gap(0);
      for (const auto& [m, wt] : mu) {
        auto it = phi.find(m);
        if (it == phi.end()) return fail("potential-range", "potential misses a support point");
        gap += wt * it->second;
      }
      for (const auto& [m, wt] : mu_prime) {
        auto it = phi.find(m);
        if (it == phi.end()) return fail("potential-range", "potential misses a support point");
        gap -= wt * it->second;
      }
      if (gap < 0) gap = -gap;
      if (gap != cp.value)
        return fail("potential-gap", "potential gap " + rat_str(gap) +
                                         " differs from pair value " + rat_str(cp.value));
      if (cp.value > maxval) maxval = cp.value;
    }
    const int k = ab->size();
    if (static_cast<int>(covered.size()) != k * (k - 1) / 2)
      return fail("pair-coverage", "certificate covers " + std::to_string(covered.size()) +
                                       " pairs, space has " + std::to_string(k * (k - 1) / 2));
    if (maxval != doc.value)
      return fail("value", "max pair value " + rat_str(maxval) +
                               " differs from declared value " + rat_str(doc.value));
    return VerifyResult{true, "", ""};
  }

  // adaptive-lower-bound
  if (!doc.pairs.empty())
    return fail("format", "adaptive certificate must not carry pair sections");

  // kappa: a genuine coloring, total on Emb(A,C).
  detail::MapDict kappa;
  for (const auto& [m, v] : doc.kappa) {
    if (!is_embedding_map(doc.a, doc.c, m))
      return fail("kappa", "kappa point is not an embedding of A into C");
    if (v < 0 || v > 1) return fail("kappa", "kappa value " + rat_str(v) + " outside [0,1]");
    if (!kappa.emplace(m, v).second) return fail("kappa", "duplicate kappa point");
  }
  if (static_cast<int>(kappa.size()) != ac->size())
    return fail("kappa", "kappa does not cover Emb(A,C)");
  for (const auto& [m1, v1] : kappa)
    for (const auto& [m2, v2] : kappa) {
      Rat diff = v1 - v2;
      if (diff < 0) diff = -diff;
      if (diff > rho_bar(m1, m2)) return fail("kappa", "kappa violates 1-Lipschitz bound");
    }

  auto kappa_at = [&](const std::vector<int>& m) -> const Rat& {
    auto it = kappa.find(m);
    if (it == kappa.end())
      throw std::logic_error("verified-total kappa misses a composite map");
    return it->second;
  };
  // Linear extension of kappa to the pushforward of nu along alpha.
  auto kappa_push = [&](int alpha_idx) {
    Rat v(0);
    const auto& alpha = ab->at(alpha_idx).map();
    for (const auto& [m, wt] : doc.nu) v += wt * kappa_at(compose_map(m, alpha));
    return v;
  };

  // The declared value is the exact oscillation of kappa over the family.
  Rat reached(0);
  std::vector<Rat> pushvals(static_cast<std::size_t>(ab->size()));
  for (int i = 0; i < ab->size(); ++i) pushvals[static_cast<std::size_t>(i)] = kappa_push(i);
  for (std::size_t u = 0; u < pushvals.size(); ++u)
    for (std::size_t w = u + 1; w < pushvals.size(); ++w) {
      Rat d = pushvals[u] - pushvals[w];
      if (d < 0) d = -d;
      if (d > reached) reached = d;
    }
  if (reached != doc.value)
    return fail("value", "kappa oscillation " + rat_str(reached) +
                             " differs from declared value " + rat_str(doc.value));

  // Dual domination: nonnegative weights with total at most 1 such that for
  // every atom of Emb(B,C), the weighted pair differences reach the value.
  Rat total(0);
  struct TermIdx {
    int i1, i2, sign;
    Rat weight;
  };
  std::vector<TermIdx> terms;
  for (const CertDualTerm& t : doc.dual) {
    int i1 = ab->index_of_map(t.alpha);
    int i2 = ab->index_of_map(t.alpha_prime);
    if (i1 < 0 || i2 < 0) return fail("adaptive-dual", "dual term outside Emb(A,B)");
    if (i1 == i2) return fail("adaptive-dual", "dual term with equal embeddings");
    if (t.weight <= 0) return fail("adaptive-dual", "dual weight not positive");
    terms.push_back({i1, i2, t.sign, t.weight});
    total += t.weight;
  }
  if (total > 1)
    return fail("adaptive-dual", "dual weights sum to " + rat_str(total) + " > 1");
  for (int j = 0; j < bc->size(); ++j) {
    const auto& beta = bc->at(j).map();
    Rat dom(0);
    for (const TermIdx& t : terms) {
      Rat diff = kappa_at(compose_map(beta, ab->at(t.i1).map())) -
                 kappa_at(compose_map(beta, ab->at(t.i2).map()));
      Rat contrib = t.weight * diff;
      dom += t.sign > 0 ? contrib : Rat(-contrib);
    }
    if (dom < doc.value)
      return fail("adaptive-dual", "domination fails at an atom of Emb(B,C): " + rat_str(dom) +
                                       " < " + rat_str(doc.value));
  }
  return VerifyResult{true, "", ""};
}

inline VerifyResult verify_certificate_text(const std::string& text) {
  try {
    return verify_certificate(parse_certificate_text(text));
  } catch (const ParseError& e) {
    return VerifyResult{false, "format", e.what()};
  }
}

}  // namespace crl::ramsey
