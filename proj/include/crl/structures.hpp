#pragma once
// Finite metric structures over relational signatures with [0,1]-valued
// 1-Lipschitz predicates: validation with witnessing tuples, built-in class
// presets, metric truncation, and the crl-structure v1 text format.

#include "crl/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <istream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace crl {

struct RelationSymbol {
  std::string name;
  int arity = 1;
  bool operator==(const RelationSymbol&) const = default;
};

struct Signature {
  std::vector<RelationSymbol> relations;

  bool operator==(const Signature&) const = default;

  int index_of(std::string_view name) const {
    for (std::size_t i = 0; i < relations.size(); ++i)
      if (relations[i].name == name) return static_cast<int>(i);
    return -1;
  }

  // Names must be unique, nonempty, whitespace-free single tokens
  // (the text format is token based); arity at least 1.
  void check() const {
    for (std::size_t i = 0; i < relations.size(); ++i) {
      const auto& r = relations[i];
      if (r.name.empty()) throw std::invalid_argument("relation symbol with empty name");
      for (char c : r.name)
        if (std::isspace(static_cast<unsigned char>(c)))
          throw std::invalid_argument("relation name '" + r.name + "' contains whitespace");
      if (r.arity < 1)
        throw std::invalid_argument("relation '" + r.name + "' has arity < 1");
      for (std::size_t j = i + 1; j < relations.size(); ++j)
        if (relations[j].name == r.name)
          throw std::invalid_argument("duplicate relation name '" + r.name + "'");
    }
  }
};

// Universe points are 0..size-1 internally; the text format is 1-based.
// dist is a full size*size matrix; predicates holds one row-major table of
// size^arity entries per relation symbol, tuple (t0,..,tr-1) at index
// ((t0*n + t1)*n + ...).
struct MetricStructure {
  Signature signature;
  int size = 0;
  std::vector<Rat> dist;
  std::vector<std::vector<Rat>> predicates;

  bool operator==(const MetricStructure&) const = default;

  const Rat& d(int i, int j) const { return dist[static_cast<std::size_t>(i) * size + j]; }

  void set_distance(int i, int j, const Rat& v) {
    dist[static_cast<std::size_t>(i) * size + j] = v;
    dist[static_cast<std::size_t>(j) * size + i] = v;
  }

  std::size_t tuple_index(int rel, const std::vector<int>& tuple) const {
    std::size_t idx = 0;
    (void)rel;
    for (int t : tuple) idx = idx * static_cast<std::size_t>(size) + static_cast<std::size_t>(t);
    return idx;
  }

  const Rat& predicate(int rel, const std::vector<int>& tuple) const {
    return predicates[static_cast<std::size_t>(rel)][tuple_index(rel, tuple)];
  }

  Rat& predicate_slot(int rel, const std::vector<int>& tuple) {
    return predicates[static_cast<std::size_t>(rel)][tuple_index(rel, tuple)];
  }
};

inline MetricStructure make_structure(Signature sig, int size) {
  sig.check();
  if (size < 1) throw std::invalid_argument("structure needs at least one point");
  MetricStructure s;
  s.signature = std::move(sig);
  s.size = size;
  s.dist.assign(static_cast<std::size_t>(size) * size, Rat(0));
  for (const auto& rel : s.signature.relations) {
    std::size_t cells = 1;
    for (int i = 0; i < rel.arity; ++i) cells *= static_cast<std::size_t>(size);
    s.predicates.emplace_back(cells, Rat(0));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string kind;         // diagonal | symmetry | positivity | triangle |
                            // predicate-range | predicate-lipschitz | shape
  std::vector<int> points;  // witnessing points, 0-based
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool pass() const { return violations.empty(); }

  std::string to_string() const {
    if (pass()) return "valid\n";
    std::ostringstream out;
    for (const auto& v : violations) {
      out << v.kind << " [";
      for (std::size_t i = 0; i < v.points.size(); ++i)
        out << (i ? " " : "") << v.points[i] + 1;  // 1-based for display
      out << "] " << v.detail << "\n";
    }
    return out.str();
  }
};

namespace detail {
// Iterate all tuples in {0..n-1}^arity in row-major order.
inline bool next_tuple(std::vector<int>& t, int n) {
  for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
    if (++t[static_cast<std::size_t>(i)] < n) return true;
    t[static_cast<std::size_t>(i)] = 0;
  }
  return false;
}
}  // namespace detail

inline ValidationReport validate_structure(const MetricStructure& s) {
  ValidationReport rep;
  auto add = [&](std::string kind, std::vector<int> pts, std::string detail) {
    rep.violations.push_back({std::move(kind), std::move(pts), std::move(detail)});
  };
  s.signature.check();
  const int n = s.size;
  if (n < 1) {
    add("shape", {}, "structure has no points");
    return rep;
  }
  if (s.dist.size() != static_cast<std::size_t>(n) * n) {
    add("shape", {}, "distance matrix has wrong size");
    return rep;
  }
  if (s.predicates.size() != s.signature.relations.size()) {
    add("shape", {}, "predicate table count does not match signature");
    return rep;
  }
  for (std::size_t r = 0; r < s.predicates.size(); ++r) {
    std::size_t cells = 1;
    for (int i = 0; i < s.signature.relations[r].arity; ++i) cells *= static_cast<std::size_t>(n);
    if (s.predicates[r].size() != cells) {
      add("shape", {}, "predicate table for '" + s.signature.relations[r].name + "' has wrong size");
      return rep;
    }
  }

  for (int i = 0; i < n; ++i)
    if (s.d(i, i) != 0) add("diagonal", {i}, "d(x,x) = " + rat_str(s.d(i, i)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (s.d(i, j) != s.d(j, i))
        add("symmetry", {i, j}, rat_str(s.d(i, j)) + " vs " + rat_str(s.d(j, i)));
      if (s.d(i, j) <= 0)
        add("positivity", {i, j}, "d = " + rat_str(s.d(i, j)));
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (s.d(i, k) > s.d(i, j) + s.d(j, k))
          add("triangle", {i, j, k},
              rat_str(s.d(i, k)) + " > " + rat_str(s.d(i, j)) + " + " + rat_str(s.d(j, k)));

  for (std::size_t r = 0; r < s.predicates.size(); ++r) {
    const auto& rel = s.signature.relations[r];
    std::vector<int> t(static_cast<std::size_t>(rel.arity), 0);
    do {
      const Rat& v = s.predicate(static_cast<int>(r), t);
      if (v < 0 || v > 1)
        add("predicate-range", t, rel.name + " = " + rat_str(v));
    } while (detail::next_tuple(t, n));

    // 1-Lipschitz: |R(x) - R(y)| <= max_i d(x_i, y_i) for all tuple pairs.
    std::vector<int> x(static_cast<std::size_t>(rel.arity), 0);
    do {
      std::vector<int> y(static_cast<std::size_t>(rel.arity), 0);
      do {
        Rat gap = s.predicate(static_cast<int>(r), x) - s.predicate(static_cast<int>(r), y);
        if (gap < 0) gap = -gap;
        Rat move(0);
        for (std::size_t i = 0; i < x.size(); ++i) {
          const Rat& di = s.d(x[i], y[i]);
          if (di > move) move = di;
        }
        if (gap > move) {
          std::vector<int> pts = x;
          pts.insert(pts.end(), y.begin(), y.end());
          add("predicate-lipschitz", pts,
              rel.name + " jumps " + rat_str(gap) + " over move " + rat_str(move));
        }
      } while (detail::next_tuple(y, n));
    } while (detail::next_tuple(x, n));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Class presets

enum class PresetKind { pure_sets, linear_orders, graphs, two_level_ultrametric };

struct ClassPreset {
  PresetKind kind = PresetKind::pure_sets;
  int min_size = 1;
  int max_size = 64;

  std::string name() const {
    switch (kind) {
      case PresetKind::pure_sets: return "pure-sets";
      case PresetKind::linear_orders: return "linear-orders";
      case PresetKind::graphs: return "graphs";
      case PresetKind::two_level_ultrametric: return "two-level-ultrametric";
    }
    return "?";
  }

  static std::optional<ClassPreset> by_name(std::string_view n) {
    if (n == "pure-sets") return ClassPreset{PresetKind::pure_sets, 1, 64};
    if (n == "linear-orders") return ClassPreset{PresetKind::linear_orders, 1, 64};
    if (n == "graphs") return ClassPreset{PresetKind::graphs, 1, 64};
    if (n == "two-level-ultrametric") return ClassPreset{PresetKind::two_level_ultrametric, 1, 64};
    return std::nullopt;
  }
};

// Instance of a preset class at a given size. Distances are discrete
// (all 1) except the two-level ultrametric, which groups points into
// blocks of two at inner distance 1/2 with distance 1 across blocks.
// The graphs preset emits the canonical path graph on n points.
inline MetricStructure generate_preset(const ClassPreset& p, int n) {
  if (n < p.min_size || n > p.max_size)
    throw std::out_of_range("preset " + p.name() + " size " + std::to_string(n) +
                            " outside [" + std::to_string(p.min_size) + "," +
                            std::to_string(p.max_size) + "]");
  Signature sig;
  if (p.kind == PresetKind::linear_orders) sig.relations = {{"<", 2}};
  if (p.kind == PresetKind::graphs) sig.relations = {{"E", 2}};
  MetricStructure s = make_structure(sig, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Rat d(1);
      if (p.kind == PresetKind::two_level_ultrametric && i / 2 == j / 2) d = rat(1, 2);
      s.set_distance(i, j, d);
    }
  if (p.kind == PresetKind::linear_orders) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s.predicate_slot(0, {i, j}) = Rat(i < j ? 1 : 0);
  }
  if (p.kind == PresetKind::graphs) {
    for (int i = 0; i + 1 < n; ++i) {
      s.predicate_slot(0, {i, i + 1}) = Rat(1);
      s.predicate_slot(0, {i + 1, i}) = Rat(1);
    }
  }
  return s;
}

// Pointwise min(d, 1). Predicates are untouched; on the truncated structure
// they stay 1-Lipschitz because moves only shrink.
inline MetricStructure truncated_metric(const MetricStructure& s) {
  MetricStructure t = s;
  for (auto& v : t.dist)
    if (v > 1) v = Rat(1);
  return t;
}

// ---------------------------------------------------------------------------
// crl-structure v1 text format
//
//   crl-structure v1
//   signature <k>
//   rel <name> <arity>          (k lines)
//   points <n>
//   dist
//   <row i = 2..n: d(i,1) .. d(i,i-1)>
//   pred <name>
//   <n^arity lines: i1 .. ir value>   (points 1-based, each tuple once)
//
// Token based: any whitespace separates, line breaks are cosmetic.

namespace detail {

class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string t;
    if (!(in_ >> t)) throw ParseError(std::string("unexpected end of input, expected ") + what);
    return t;
  }

  std::optional<std::string> try_next() {
    std::string t;
    if (in_ >> t) return t;
    return std::nullopt;
  }

  int next_int(const char* what) {
    std::string t = next(what);
    try {
      std::size_t pos = 0;
      int v = std::stoi(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ParseError("expected integer for " + std::string(what) + ", got '" + t + "'");
    }
  }

  Rat next_rat(const char* what) { return parse_rational(next(what)); }

  void expect(std::string_view token) {
    std::string t = next(std::string(token).c_str());
    if (t != token)
      throw ParseError("expected '" + std::string(token) + "', got '" + t + "'");
  }

 private:
  std::istream& in_;
};

}  // namespace detail

inline std::string serialize_structure(const MetricStructure& s) {
  std::ostringstream out;
  out << "crl-structure v1\n";
  out << "signature " << s.signature.relations.size() << "\n";
  for (const auto& r : s.signature.relations)
    out << "rel " << r.name << " " << r.arity << "\n";
  out << "points " << s.size << "\n";
  out << "dist\n";
  for (int i = 1; i < s.size; ++i) {
    for (int j = 0; j < i; ++j) out << (j ? " " : "") << rat_str(s.d(i, j));
    out << "\n";
  }
  for (std::size_t r = 0; r < s.predicates.size(); ++r) {
    out << "pred " << s.signature.relations[r].name << "\n";
    std::vector<int> t(static_cast<std::size_t>(s.signature.relations[r].arity), 0);
    do {
      for (int p : t) out << p + 1 << " ";
      out << rat_str(s.predicate(static_cast<int>(r), t)) << "\n";
    } while (detail::next_tuple(t, s.size));
  }
  return out.str();
}

// Reads one structure from the stream, consuming exactly its own tokens
// (the section sizes are determined by the header), so structures can be
// embedded inside larger token streams.
inline MetricStructure parse_structure(std::istream& in) {
  detail::TokenReader tok(in);
  tok.expect("crl-structure");
  tok.expect("v1");
  tok.expect("signature");
  int nrel = tok.next_int("signature size");
  if (nrel < 0) throw ParseError("negative signature size");
  Signature sig;
  for (int r = 0; r < nrel; ++r) {
    tok.expect("rel");
    std::string name = tok.next("relation name");
    int arity = tok.next_int("relation arity");
    sig.relations.push_back({name, arity});
  }
  try {
    sig.check();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  tok.expect("points");
  int n = tok.next_int("point count");
  if (n < 1) throw ParseError("structure needs at least one point");
  MetricStructure s = make_structure(sig, n);
  tok.expect("dist");
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      Rat d = tok.next_rat("distance entry");
      s.set_distance(i, j, d);
    }
  std::vector<char> seen(sig.relations.size(), 0);
  for (std::size_t r0 = 0; r0 < sig.relations.size(); ++r0) {
    tok.expect("pred");
    std::string name = tok.next("relation name");
    int r = sig.index_of(name);
    if (r < 0) throw ParseError("pred section for unknown relation '" + name + "'");
    if (seen[static_cast<std::size_t>(r)])
      throw ParseError("duplicate pred section for '" + name + "'");
    seen[static_cast<std::size_t>(r)] = 1;
    const int arity = sig.relations[static_cast<std::size_t>(r)].arity;
    std::size_t cells = 1;
    for (int i = 0; i < arity; ++i) cells *= static_cast<std::size_t>(n);
    std::vector<char> covered(cells, 0);
    for (std::size_t c = 0; c < cells; ++c) {
      std::vector<int> t(static_cast<std::size_t>(arity));
      for (int i = 0; i < arity; ++i) {
        int p = tok.next_int("tuple point");
        if (p < 1 || p > n)
          throw ParseError("tuple point " + std::to_string(p) + " outside 1.." + std::to_string(n));
        t[static_cast<std::size_t>(i)] = p - 1;
      }
      std::size_t idx = s.tuple_index(r, t);
      if (covered[idx]) throw ParseError("tuple listed twice in pred '" + name + "'");
      covered[idx] = 1;
      s.predicates[static_cast<std::size_t>(r)][idx] = tok.next_rat("predicate value");
    }
  }
  return s;
}

inline MetricStructure parse_structure_text(const std::string& text) {
  std::istringstream in(text);
  MetricStructure s = parse_structure(in);
  std::string rest;
  if (in >> rest) throw ParseError("trailing content after structure: '" + rest + "'");
  return s;
}

// Identity of a structure: hash of its canonical serialization, so two
// files differing only in whitespace or pred-section order agree.
inline std::string structure_hash(const MetricStructure& s) {
  return hex64(fnv1a64(serialize_structure(s)));
}

}  // namespace crl
