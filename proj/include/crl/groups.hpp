#pragma once
// Group-side criterion: pseudometrics d_A from actions, the restriction map
// into embedding spaces, and the support-minimization value
//
//   W(F,S) = min over lambda in Delta(S) of max over h,h' in F of
//            W1(lambda . h, lambda . h')
//
// where lambda . h puts mass lambda_s at the right translate s*h. Groups are
// either explicit Cayley tables (axioms checked exhaustively) or built-in
// oracles for free and free-abelian groups with normal-form reduction. On a
// discrete metric W1 is total variation, so the LP uses one deviation
// variable per shared translate point instead of a full coupling block.

#include "crl/transport.hpp"

#include <cctype>
#include <future>
#include <map>
#include <variant>

namespace crl::groups {

// ---------------------------------------------------------------------------
// Finite groups by Cayley table

struct FiniteGroupTable {
  std::vector<std::string> names;
  std::vector<std::vector<int>> table;  // table[g][h] = g*h
  int identity = 0;
  std::map<std::string, int> index;

  int n() const { return static_cast<int>(names.size()); }

  int find(const std::string& name) const {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  }

  // Group axioms, checked exhaustively.
  void check() const {
    const int k = n();
    if (k < 1) throw std::invalid_argument("group: needs at least one element");
    if (static_cast<int>(table.size()) != k)
      throw std::invalid_argument("group: table has wrong number of rows");
    for (const auto& row : table) {
      if (static_cast<int>(row.size()) != k)
        throw std::invalid_argument("group: table row has wrong length");
      for (int v : row)
        if (v < 0 || v >= k) throw std::invalid_argument("group: table entry out of range");
    }
    if (identity < 0 || identity >= k)
      throw std::invalid_argument("group: identity index out of range");
    if (static_cast<int>(index.size()) != k)
      throw std::invalid_argument("group: duplicate element names");
    for (int g = 0; g < k; ++g)
      if (table[static_cast<std::size_t>(g)][static_cast<std::size_t>(identity)] != g ||
          table[static_cast<std::size_t>(identity)][static_cast<std::size_t>(g)] != g)
        throw std::invalid_argument("group: identity law fails at '" +
                                    names[static_cast<std::size_t>(g)] + "'");
    for (int g = 0; g < k; ++g) {
      bool has_inverse = false;
      for (int h = 0; h < k; ++h)
        if (table[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)] == identity &&
            table[static_cast<std::size_t>(h)][static_cast<std::size_t>(g)] == identity)
          has_inverse = true;
      if (!has_inverse)
        throw std::invalid_argument("group: no inverse for '" +
                                    names[static_cast<std::size_t>(g)] + "'");
    }
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int c = 0; c < k; ++c) {
          int ab_c = table[static_cast<std::size_t>(
              table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)])][
              static_cast<std::size_t>(c)];
          int a_bc = table[static_cast<std::size_t>(a)][static_cast<std::size_t>(
              table[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)])];
          if (ab_c != a_bc) throw std::invalid_argument("group: associativity fails");
        }
  }

  // S_n with elements named by their image words ("0123" is the identity on
  // four points) and composition (g*h)(x) = g(h(x)).
  static FiniteGroupTable symmetric_group(int n) {
    if (n < 1 || n > 8) throw std::invalid_argument("symmetric_group: n must be in 1..8");
    FiniteGroupTable g;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::vector<std::vector<int>> perms;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto name_of = [](const std::vector<int>& p) {
      std::string s;
      for (int x : p) s += static_cast<char>('0' + x);
      return s;
    };
    std::map<std::vector<int>, int> at;
    for (std::size_t i = 0; i < perms.size(); ++i) {
      g.names.push_back(name_of(perms[i]));
      at[perms[i]] = static_cast<int>(i);
      g.index[g.names.back()] = static_cast<int>(i);
    }
    g.identity = 0;
    g.table.assign(perms.size(), std::vector<int>(perms.size(), 0));
    for (std::size_t a = 0; a < perms.size(); ++a)
      for (std::size_t b = 0; b < perms.size(); ++b) {
        std::vector<int> comp(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x)
          comp[static_cast<std::size_t>(x)] =
              perms[a][static_cast<std::size_t>(perms[b][static_cast<std::size_t>(x)])];
        g.table[a][b] = at.at(comp);
      }
    g.check();
    return g;
  }

  // Permutation of 0..n-1 encoded in an S_n element name.
  static std::vector<int> permutation_of(const std::string& name) {
    std::vector<int> p;
    for (char ch : name) {
      if (ch < '0' || ch > '9')
        throw std::invalid_argument("not a permutation name: '" + name + "'");
      p.push_back(ch - '0');
    }
    return p;
  }
};

// Format:
//   crl-group v1
//   elements <n> <name ...>
//   identity <name>
//   table
//   <n rows of n names; row g lists g*h for each column h>
inline FiniteGroupTable parse_group_table(std::istream& in) {
  crl::detail::TokenReader tok(in);
  tok.expect("crl-group");
  tok.expect("v1");
  tok.expect("elements");
  int n = tok.next_int("element count");
  if (n < 1) throw ParseError("group needs at least one element");
  FiniteGroupTable g;
  for (int i = 0; i < n; ++i) {
    g.names.push_back(tok.next("element name"));
    if (!g.index.emplace(g.names.back(), i).second)
      throw ParseError("duplicate element name '" + g.names.back() + "'");
  }
  tok.expect("identity");
  std::string id = tok.next("identity name");
  g.identity = g.find(id);
  if (g.identity < 0) throw ParseError("identity '" + id + "' not among the elements");
  tok.expect("table");
  g.table.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::string cell = tok.next("table cell");
      int v = g.find(cell);
      if (v < 0) throw ParseError("table cell '" + cell + "' not among the elements");
      g.table[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = v;
    }
  try {
    g.check();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return g;
}

// ---------------------------------------------------------------------------
// Finitely generated oracles: free groups and free abelian groups

class FGGroupOracle {
 public:
  enum class Kind { free_group, free_abelian };

  FGGroupOracle(Kind kind, int rank) : kind_(kind), rank_(rank) {
    if (rank < 1 || rank > 26) throw std::invalid_argument("oracle rank must be in 1..26");
  }

  Kind kind() const { return kind_; }
  int rank() const { return rank_; }

  std::string identity() const {
    if (kind_ == Kind::free_group) return "e";
    std::string s = "0";
    for (int i = 1; i < rank_; ++i) s += ",0";
    return s;
  }

  // Normal form; throws on bad element syntax. Free groups: reduced words
  // over the first `rank` lowercase letters with uppercase inverses, "e" for
  // the empty word. Free abelian: comma-separated integer exponents.
  std::string reduce(const std::string& raw) const {
    if (kind_ == Kind::free_group) return render_word(parse_word(raw));
    return render_vec(parse_vec(raw));
  }

  std::string mul(const std::string& a, const std::string& b) const {
    if (kind_ == Kind::free_group) {
      std::vector<char> w = parse_word(a);
      for (char ch : parse_word(b)) push_reduced(w, ch);
      return render_word(w);
    }
    std::vector<long> va = parse_vec(a), vb = parse_vec(b);
    for (std::size_t i = 0; i < va.size(); ++i) va[i] += vb[i];
    return render_vec(va);
  }

  std::string inverse(const std::string& a) const {
    if (kind_ == Kind::free_group) {
      std::vector<char> w = parse_word(a);
      std::vector<char> out;
      for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(flip(*it));
      return render_word(out);
    }
    std::vector<long> v = parse_vec(a);
    for (auto& x : v) x = -x;
    return render_vec(v);
  }

  // Word-metric ball of the given radius around the identity, breadth-first
  // over generators and their inverses, deduplicated by normal form and
  // sorted by (length, normal form) so supports are deterministic.
  std::vector<std::string> ball(int radius) const {
    if (radius < 0) throw std::invalid_argument("ball radius must be nonnegative");
    std::vector<std::string> gens;
    if (kind_ == Kind::free_group) {
      for (int i = 0; i < rank_; ++i) {
        gens.push_back(std::string(1, static_cast<char>('a' + i)));
        gens.push_back(std::string(1, static_cast<char>('A' + i)));
      }
    } else {
      for (int i = 0; i < rank_; ++i) {
        std::vector<long> v(static_cast<std::size_t>(rank_), 0);
        v[static_cast<std::size_t>(i)] = 1;
        gens.push_back(render_vec(v));
        v[static_cast<std::size_t>(i)] = -1;
        gens.push_back(render_vec(v));
      }
    }
    std::map<std::string, int> depth;
    depth[identity()] = 0;
    std::vector<std::string> frontier = {identity()};
    for (int r = 1; r <= radius; ++r) {
      std::vector<std::string> next;
      for (const std::string& w : frontier)
        for (const std::string& g : gens) {
          std::string u = mul(w, g);
          if (depth.emplace(u, r).second) next.push_back(u);
        }
      frontier = std::move(next);
    }
    std::vector<std::string> out;
    for (const auto& [w, r] : depth) out.push_back(w);
    std::sort(out.begin(), out.end(), [this](const std::string& x, const std::string& y) {
      long lx = length_of(x), ly = length_of(y);
      if (lx != ly) return lx < ly;
      return x < y;
    });
    return out;
  }

  long length_of(const std::string& w) const {
    if (kind_ == Kind::free_group)
      return static_cast<long>(parse_word(w).size());
    long s = 0;
    for (long x : parse_vec(w)) s += x < 0 ? -x : x;
    return s;
  }

 private:
  Kind kind_;
  int rank_;

  static char flip(char c) {
    return static_cast<char>(std::isupper(static_cast<unsigned char>(c))
                                 ? std::tolower(static_cast<unsigned char>(c))
                                 : std::toupper(static_cast<unsigned char>(c)));
  }

  bool in_alphabet(char c) const {
    if (c >= 'a' && c < 'a' + rank_) return true;
    if (c >= 'A' && c < 'A' + rank_) return true;
    return false;
  }

  static void push_reduced(std::vector<char>& w, char c) {
    if (!w.empty() && w.back() == flip(c))
      w.pop_back();
    else
      w.push_back(c);
  }

  std::vector<char> parse_word(const std::string& raw) const {
    if (raw.empty()) throw std::invalid_argument("bad element syntax: empty word");
    std::vector<char> w;
    if (raw == "e") return w;
    for (char c : raw) {
      if (!in_alphabet(c))
        throw std::invalid_argument("bad element syntax: '" + raw + "' for rank " +
                                    std::to_string(rank_));
      push_reduced(w, c);
    }
    return w;
  }

  static std::string render_word(const std::vector<char>& w) {
    if (w.empty()) return "e";
    return std::string(w.begin(), w.end());
  }

  std::vector<long> parse_vec(const std::string& raw) const {
    std::vector<long> v;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = raw.find(',', pos);
      std::string part = raw.substr(pos, comma == std::string::npos ? comma : comma - pos);
      try {
        std::size_t used = 0;
        long x = std::stol(part, &used);
        if (used != part.size() || part.empty()) throw std::invalid_argument(part);
        v.push_back(x);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad element syntax: '" + raw + "' (expected " +
                                    std::to_string(rank_) + " comma-separated integers)");
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (static_cast<int>(v.size()) != rank_)
      throw std::invalid_argument("bad element syntax: '" + raw + "' has " +
                                  std::to_string(v.size()) + " coordinates, rank is " +
                                  std::to_string(rank_));
    return v;
  }

  static std::string render_vec(const std::vector<long>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v[i]);
    }
    return s;
  }
};

// ---------------------------------------------------------------------------
// One handle over both kinds

class GroupHandle {
 public:
  static GroupHandle from_table(FiniteGroupTable t) {
    t.check();
    return GroupHandle(std::move(t));
  }
  static GroupHandle from_oracle(FGGroupOracle o) { return GroupHandle(std::move(o)); }

  bool is_table() const { return std::holds_alternative<FiniteGroupTable>(g_); }
  const FiniteGroupTable& table() const { return std::get<FiniteGroupTable>(g_); }
  const FGGroupOracle& oracle() const { return std::get<FGGroupOracle>(g_); }

  std::string canon(const std::string& elt) const {
    if (is_table()) {
      if (table().find(elt) < 0)
        throw std::invalid_argument("not an element of the group: '" + elt + "'");
      return elt;
    }
    return oracle().reduce(elt);
  }

  std::string identity() const {
    if (is_table()) return table().names[static_cast<std::size_t>(table().identity)];
    return oracle().identity();
  }

  std::string mul(const std::string& a, const std::string& b) const {
    if (is_table()) {
      int i = table().find(a), j = table().find(b);
      if (i < 0 || j < 0) throw std::invalid_argument("not an element of the group");
      return table().names[static_cast<std::size_t>(
          table().table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])];
    }
    return oracle().mul(a, b);
  }

  std::string inverse(const std::string& a) const {
    if (is_table()) {
      int i = table().find(a);
      if (i < 0) throw std::invalid_argument("not an element of the group");
      for (int h = 0; h < table().n(); ++h)
        if (table().table[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)] ==
            table().identity)
          return table().names[static_cast<std::size_t>(h)];
      throw std::logic_error("checked group lost an inverse");
    }
    return oracle().inverse(a);
  }

  // Finite tables enumerate everything; oracles enumerate the word ball.
  std::vector<std::string> support(int radius) const {
    if (is_table()) return table().names;
    return oracle().ball(radius);
  }

 private:
  explicit GroupHandle(FiniteGroupTable t) : g_(std::move(t)) {}
  explicit GroupHandle(FGGroupOracle o) : g_(std::move(o)) {}
  std::variant<FiniteGroupTable, FGGroupOracle> g_;
};

// Either a Cayley-table document or an oracle spec line "free k" /
// "abelian k".
inline GroupHandle parse_group_spec(const std::string& text) {
  std::istringstream probe(text);
  std::string head;
  if (!(probe >> head)) throw ParseError("empty group spec");
  if (head == "crl-group") {
    std::istringstream in(text);
    return GroupHandle::from_table(parse_group_table(in));
  }
  if (head == "free" || head == "abelian") {
    int k = 0;
    if (!(probe >> k)) throw ParseError("group spec '" + head + "' needs a rank");
    std::string rest;
    if (probe >> rest) throw ParseError("trailing content in group spec: '" + rest + "'");
    try {
      return GroupHandle::from_oracle(FGGroupOracle(
          head == "free" ? FGGroupOracle::Kind::free_group : FGGroupOracle::Kind::free_abelian,
          k));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  throw ParseError("group spec must start with 'crl-group', 'free' or 'abelian', got '" +
                   head + "'");
}

// ---------------------------------------------------------------------------
// Actions, pseudometrics and the restriction map

struct GroupAction {
  StructureRef structure;
  std::map<std::string, std::vector<int>> maps;  // element -> isometric automorphism

  const std::vector<int>& map_of(const std::string& g) const {
    auto it = maps.find(g);
    if (it == maps.end())
      throw std::invalid_argument("action map missing for element '" + g + "'");
    return it->second;
  }

  void check() const {
    if (!structure) throw std::invalid_argument("action without a structure");
    for (const auto& [name, m] : maps)
      if (!is_embedding_map(*structure, *structure, m))
        throw std::invalid_argument("action map for '" + name +
                                    "' is not an isometric automorphism");
  }
};

// d_A(g,h) = sup over points of d(g(a), h(a)), exact and untruncated.
inline Rat pseudometric_dA(const MetricStructure& a, const std::vector<int>& g,
                           const std::vector<int>& h) {
  if (static_cast<int>(g.size()) != a.size || static_cast<int>(h.size()) != a.size)
    throw std::invalid_argument("pseudometric_dA: map size mismatch");
  if (!is_embedding_map(a, a, g) || !is_embedding_map(a, a, h))
    throw std::invalid_argument("pseudometric_dA: maps must be isometric automorphisms");
  Rat r(0);
  for (int p = 0; p < a.size; ++p) {
    Rat d = a.d(g[static_cast<std::size_t>(p)], h[static_cast<std::size_t>(p)]);
    if (d > r) r = d;
  }
  return r;
}

inline Rat pseudometric_dA(const GroupAction& act, const std::string& g, const std::string& h) {
  return pseudometric_dA(*act.structure, act.map_of(g), act.map_of(h));
}

// Phi_A: the automorphism g, viewed as an embedding of A into A.
inline Embedding restriction_map(const GroupAction& act, const std::string& g) {
  const std::vector<int>& m = act.map_of(g);
  if (!is_embedding_map(*act.structure, *act.structure, m))
    throw std::invalid_argument("restriction_map: '" + g + "' does not act isometrically");
  return Embedding(act.structure, act.structure, m);
}

// The S_n action on the pure set with n points.
inline GroupAction symmetric_action(int n, const FiniteGroupTable& sym) {
  GroupAction act;
  act.structure = share(generate_preset(ClassPreset{PresetKind::pure_sets, 1, 64}, n));
  for (const std::string& name : sym.names)
    act.maps[name] = FiniteGroupTable::permutation_of(name);
  act.check();
  return act;
}

// ---------------------------------------------------------------------------
// The criterion value

enum class GroupMetric { discrete, action_induced };

struct GroupCriterionInstance {
  GroupHandle group;
  std::vector<std::string> F;
  std::vector<std::string> S;
  GroupMetric metric = GroupMetric::discrete;
  std::optional<GroupAction> action;  // required for action_induced
};

struct GroupValue {
  Rat value;
  std::vector<std::pair<std::string, Rat>> lambda;  // aligned with canonical S
  std::string max_h, max_h_prime;                   // argmax pair, empty if |F| < 2
  std::vector<std::pair<std::string, Rat>> extremal;  // f on the max pair's translates
};

namespace detail {

inline std::vector<std::string> canon_list(const GroupHandle& g,
                                           const std::vector<std::string>& xs) {
  std::vector<std::string> out;
  for (const std::string& x : xs) {
    std::string c = g.canon(x);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  return out;
}

}  // namespace detail

inline GroupValue group_value(const GroupCriterionInstance& inst) {
  const GroupHandle& g = inst.group;
  std::vector<std::string> f = detail::canon_list(g, inst.F);
  std::vector<std::string> s = detail::canon_list(g, inst.S);
  if (s.empty()) throw std::invalid_argument("group_value: empty support S");
  if (inst.metric == GroupMetric::action_induced) {
    if (!inst.action) throw std::invalid_argument("group_value: action-induced mode needs an action");
    inst.action->check();
  }
  const int K = static_cast<int>(s.size());
  const int H = static_cast<int>(f.size());

  GroupValue out;
  if (H < 2) {
    out.value = Rat(0);
    for (const auto& x : s) out.lambda.emplace_back(x, x == s.front() ? Rat(1) : Rat(0));
    return out;
  }

  // Right translates: trans[h][k] = s_k * f_h.
  std::vector<std::vector<std::string>> trans(static_cast<std::size_t>(H),
                                              std::vector<std::string>(static_cast<std::size_t>(K)));
  for (int h = 0; h < H; ++h)
    for (int k = 0; k < K; ++k)
      trans[static_cast<std::size_t>(h)][static_cast<std::size_t>(k)] =
          g.mul(s[static_cast<std::size_t>(k)], f[static_cast<std::size_t>(h)]);

  // Truncated distance between translate points.
  auto dist = [&](const std::string& x, const std::string& y) -> Rat {
    if (inst.metric == GroupMetric::discrete) return x == y ? Rat(0) : Rat(1);
    if (x == y) return Rat(0);
    Rat d = pseudometric_dA(*inst.action, x, y);
    return d > 1 ? Rat(1) : d;
  };

  std::vector<std::pair<int, int>> pairs;
  for (int h1 = 0; h1 < H; ++h1)
    for (int h2 = h1 + 1; h2 < H; ++h2) pairs.emplace_back(h1, h2);
  const int P = static_cast<int>(pairs.size());

  lp::RationalLP prog;
  prog.sense = lp::Sense::minimize;
  int nv = K + 1;  // lambda then t
  std::vector<int> block_offset(static_cast<std::size_t>(P), 0);
  // Discrete mode: one deviation variable per translate point shared by both
  // sides of a pair; points owned by one side only contribute their lambda
  // weight directly. Action mode: full coupling blocks.
  struct SharedPoint {
    int left_k, right_k;  // lambda indices with s_l * h1 == s_r * h2
  };
  std::vector<std::vector<SharedPoint>> shared(static_cast<std::size_t>(P));
  std::vector<std::vector<int>> only_left(static_cast<std::size_t>(P)),
      only_right(static_cast<std::size_t>(P));
  if (inst.metric == GroupMetric::discrete) {
    for (int p = 0; p < P; ++p) {
      auto [h1, h2] = pairs[static_cast<std::size_t>(p)];
      std::map<std::string, int> right_at;
      for (int k = 0; k < K; ++k)
        right_at[trans[static_cast<std::size_t>(h2)][static_cast<std::size_t>(k)]] = k;
      std::map<std::string, int> left_at;
      for (int k = 0; k < K; ++k)
        left_at[trans[static_cast<std::size_t>(h1)][static_cast<std::size_t>(k)]] = k;
      for (int k = 0; k < K; ++k) {
        const std::string& x = trans[static_cast<std::size_t>(h1)][static_cast<std::size_t>(k)];
        auto it = right_at.find(x);
        if (it == right_at.end())
          only_left[static_cast<std::size_t>(p)].push_back(k);
        else
          shared[static_cast<std::size_t>(p)].push_back({k, it->second});
      }
      for (int k = 0; k < K; ++k)
        if (!left_at.count(trans[static_cast<std::size_t>(h2)][static_cast<std::size_t>(k)]))
          only_right[static_cast<std::size_t>(p)].push_back(k);
      block_offset[static_cast<std::size_t>(p)] = nv;
      nv += static_cast<int>(shared[static_cast<std::size_t>(p)].size());
    }
  } else {
    for (int p = 0; p < P; ++p) {
      block_offset[static_cast<std::size_t>(p)] = nv;
      nv += K * K;
    }
  }

  prog.objective.assign(static_cast<std::size_t>(nv), Rat(0));
  prog.objective[static_cast<std::size_t>(K)] = Rat(1);
  auto zero_row = [&] { return std::vector<Rat>(static_cast<std::size_t>(nv), Rat(0)); };
  {
    lp::Constraint simplex;
    simplex.row = zero_row();
    for (int k = 0; k < K; ++k) simplex.row[static_cast<std::size_t>(k)] = Rat(1);
    simplex.rel = lp::Rel::eq;
    simplex.rhs = Rat(1);
    prog.constraints.push_back(std::move(simplex));
  }
  if (inst.metric == GroupMetric::discrete) {
    for (int p = 0; p < P; ++p) {
      const auto& sh = shared[static_cast<std::size_t>(p)];
      for (std::size_t i = 0; i < sh.size(); ++i) {
        for (int sign = 0; sign < 2; ++sign) {
          lp::Constraint c;
          c.row = zero_row();
          c.row[static_cast<std::size_t>(sh[i].left_k)] = sign ? Rat(-1) : Rat(1);
          c.row[static_cast<std::size_t>(sh[i].right_k)] = sign ? Rat(1) : Rat(-1);
          c.row[static_cast<std::size_t>(block_offset[static_cast<std::size_t>(p)]) + i] = Rat(-1);
          c.rel = lp::Rel::le;
          c.rhs = Rat(0);
          prog.constraints.push_back(std::move(c));
        }
      }
      lp::Constraint cost;
      cost.row = zero_row();
      for (int k : only_left[static_cast<std::size_t>(p)]) cost.row[static_cast<std::size_t>(k)] += 1;
      for (int k : only_right[static_cast<std::size_t>(p)]) cost.row[static_cast<std::size_t>(k)] += 1;
      for (std::size_t i = 0; i < sh.size(); ++i)
        cost.row[static_cast<std::size_t>(block_offset[static_cast<std::size_t>(p)]) + i] = Rat(1);
      cost.row[static_cast<std::size_t>(K)] = Rat(-2);
      cost.rel = lp::Rel::le;
      cost.rhs = Rat(0);
      prog.constraints.push_back(std::move(cost));
    }
  } else {
    for (int p = 0; p < P; ++p) {
      auto [h1, h2] = pairs[static_cast<std::size_t>(p)];
      const int off = block_offset[static_cast<std::size_t>(p)];
      for (int i = 0; i < K; ++i) {
        lp::Constraint c;
        c.row = zero_row();
        for (int j = 0; j < K; ++j) c.row[static_cast<std::size_t>(off + i * K + j)] = Rat(1);
        c.row[static_cast<std::size_t>(i)] -= 1;
        c.rel = lp::Rel::eq;
        c.rhs = Rat(0);
        prog.constraints.push_back(std::move(c));
      }
      for (int j = 0; j < K; ++j) {
        lp::Constraint c;
        c.row = zero_row();
        for (int i = 0; i < K; ++i) c.row[static_cast<std::size_t>(off + i * K + j)] = Rat(1);
        c.row[static_cast<std::size_t>(j)] -= 1;
        c.rel = lp::Rel::eq;
        c.rhs = Rat(0);
        prog.constraints.push_back(std::move(c));
      }
      lp::Constraint cost;
      cost.row = zero_row();
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          cost.row[static_cast<std::size_t>(off + i * K + j)] =
              dist(trans[static_cast<std::size_t>(h1)][static_cast<std::size_t>(i)],
                   trans[static_cast<std::size_t>(h2)][static_cast<std::size_t>(j)]);
      cost.row[static_cast<std::size_t>(K)] = Rat(-1);
      cost.rel = lp::Rel::le;
      cost.rhs = Rat(0);
      prog.constraints.push_back(std::move(cost));
    }
  }

  lp::Solution sol = lp::solve_lp(prog);
  if (sol.status != lp::Status::optimal)
    throw std::logic_error("group_value: LP must be feasible and bounded");
  std::vector<Rat> lambda(sol.primal.begin(), sol.primal.begin() + K);

  // Replay each pair at the optimal lambda; the max must equal the LP value.
  // Discrete mode: total variation, extremal f an indicator. Action mode:
  // exact transport on the translate points with a shifted potential.
  Rat best(0);
  int best_pair = -1;
  std::vector<std::pair<std::string, Rat>> best_f;
  for (int p = 0; p < P; ++p) {
    auto [h1, h2] = pairs[static_cast<std::size_t>(p)];
    std::map<std::string, Rat> mu1, mu2;
    for (int k = 0; k < K; ++k) {
      mu1[trans[static_cast<std::size_t>(h1)][static_cast<std::size_t>(k)]] +=
          lambda[static_cast<std::size_t>(k)];
      mu2[trans[static_cast<std::size_t>(h2)][static_cast<std::size_t>(k)]] +=
          lambda[static_cast<std::size_t>(k)];
    }
    std::vector<std::string> points;
    for (const auto& [x, w] : mu1) points.push_back(x);
    for (const auto& [x, w] : mu2)
      if (!mu1.count(x)) points.push_back(x);
    std::sort(points.begin(), points.end());
    Rat v(0);
    std::vector<std::pair<std::string, Rat>> fvals;
    if (inst.metric == GroupMetric::discrete) {
      for (const std::string& x : points) {
        Rat d1 = mu1.count(x) ? mu1[x] : Rat(0);
        Rat d2 = mu2.count(x) ? mu2[x] : Rat(0);
        Rat diff = d1 - d2;
        if (diff > 0) v += diff;
        fvals.emplace_back(x, diff > 0 ? Rat(1) : Rat(0));
      }
    } else {
      // Dense transport between the two translate distributions.
      std::vector<std::string> sup1, sup2;
      std::vector<Rat> w1, w2;
      for (const auto& [x, w] : mu1)
        if (sgn(w) > 0) {
          sup1.push_back(x);
          w1.push_back(w);
        }
      for (const auto& [x, w] : mu2)
        if (sgn(w) > 0) {
          sup2.push_back(x);
          w2.push_back(w);
        }
      std::vector<std::vector<Rat>> cost(sup1.size(), std::vector<Rat>(sup2.size()));
      for (std::size_t i = 0; i < sup1.size(); ++i)
        for (std::size_t j = 0; j < sup2.size(); ++j) cost[i][j] = dist(sup1[i], sup2[j]);
      lp::TransportResult tr = lp::solve_transport(cost, w1, w2);
      v = tr.value;
      // McShane extension of the dual potential over all translate points,
      // shifted into [0,1].
      std::vector<Rat> fx;
      Rat fmin;
      bool first = true;
      for (const std::string& x : points) {
        Rat val;
        bool vfirst = true;
        for (std::size_t j = 0; j < sup2.size(); ++j) {
          Rat cand = dist(x, sup2[j]) - tr.potential_demand[j];
          if (vfirst || cand < val) {
            val = cand;
            vfirst = false;
          }
        }
        fx.push_back(val);
        if (first || val < fmin) {
          fmin = val;
          first = false;
        }
      }
      for (std::size_t i = 0; i < points.size(); ++i) fvals.emplace_back(points[i], fx[i] - fmin);
      // The shifted potential must reproduce the transport value exactly.
      Rat gap(0);
      for (const auto& [x, fv] : fvals) {
        if (mu1.count(x)) gap += mu1[x] * fv;
        if (mu2.count(x)) gap -= mu2[x] * fv;
      }
      if (gap < 0) gap = -gap;
      if (gap != v) throw std::logic_error("group_value: potential misses the transport value");
    }
    if (best_pair < 0 || v > best) {
      best = v;
      best_pair = p;
      best_f = std::move(fvals);
    }
  }
  if (best != sol.objective)
    throw std::logic_error("group_value: pair replay disagrees with LP optimum");

  out.value = best;
  for (int k = 0; k < K; ++k)
    out.lambda.emplace_back(s[static_cast<std::size_t>(k)], lambda[static_cast<std::size_t>(k)]);
  out.max_h = f[static_cast<std::size_t>(pairs[static_cast<std::size_t>(best_pair)].first)];
  out.max_h_prime = f[static_cast<std::size_t>(pairs[static_cast<std::size_t>(best_pair)].second)];
  out.extremal = std::move(best_f);
  return out;
}

// W(F, Ball(r)) for r = 1..radius_max under the discrete metric; supports
// nest, so the sequence must be nonincreasing and that is checked on every
// run. Radii are evaluated in parallel waves.
inline std::vector<std::pair<int, Rat>> decay_profile(const GroupHandle& group,
                                                      const std::vector<std::string>& F,
                                                      int radius_max,
                                                      std::optional<int> jobs = std::nullopt) {
  if (group.is_table())
    throw std::invalid_argument("decay_profile: needs an oracle group with word balls");
  if (radius_max < 1) throw std::invalid_argument("decay_profile: radius must be at least 1");
  int J = 1;
  if (jobs && *jobs > 0) J = *jobs;
  auto eval = [&](int r) {
    GroupCriterionInstance inst{group, F, group.support(r), GroupMetric::discrete, std::nullopt};
    return group_value(inst).value;
  };
  std::vector<Rat> vals(static_cast<std::size_t>(radius_max));
  for (int base = 1; base <= radius_max; base += J) {
    const int hi = std::min(radius_max, base + J - 1);
    std::vector<std::future<Rat>> wave;
    for (int r = base; r <= hi; ++r)
      wave.push_back(std::async(J > 1 ? std::launch::async : std::launch::deferred, eval, r));
    for (int r = base; r <= hi; ++r)
      vals[static_cast<std::size_t>(r - 1)] = wave[static_cast<std::size_t>(r - base)].get();
  }
  std::vector<std::pair<int, Rat>> out;
  for (int r = 1; r <= radius_max; ++r) {
    if (r > 1 && vals[static_cast<std::size_t>(r - 1)] > vals[static_cast<std::size_t>(r - 2)])
      throw std::logic_error("decay_profile: value increased with the support");
    out.emplace_back(r, vals[static_cast<std::size_t>(r - 1)]);
  }
  return out;
}

// Inf-convolution f_k(x) = min over y of f(y) + k d(x,y): the largest
// k-Lipschitz function under f. Fixed points are exactly the k-Lipschitz
// tables.
inline std::vector<Rat> lipschitz_approximation(const std::vector<Rat>& f,
                                                const std::vector<std::vector<Rat>>& d,
                                                const Rat& k) {
  const std::size_t n = f.size();
  if (d.size() != n) throw std::invalid_argument("lipschitz_approximation: table size mismatch");
  for (const auto& row : d)
    if (row.size() != n) throw std::invalid_argument("lipschitz_approximation: metric not square");
  if (k < 0) throw std::invalid_argument("lipschitz_approximation: k must be nonnegative");
  for (const Rat& v : f)
    if (v < 0 || v > 1)
      throw std::invalid_argument("lipschitz_approximation: values must lie in [0,1]");
  std::vector<Rat> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    Rat best = f[x];  // y = x contributes f(x) + 0
    for (std::size_t y = 0; y < n; ++y) {
      Rat cand = f[y] + k * d[x][y];
      if (cand < best) best = cand;
    }
    out[x] = best;
  }
  return out;
}

}  // namespace crl::groups
