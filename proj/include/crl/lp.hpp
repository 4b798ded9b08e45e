#pragma once
// Exact rational linear programming. Two-phase dense-tableau simplex with
// Bland's anti-cycling rule, dual vectors recovered from the identity-start
// columns, Farkas certificates on infeasibility, improving rays on
// unboundedness, and a transportation-problem wrapper. Every optimal solve
// checks exact strong duality before returning.

#include "crl/rational.hpp"

#include <optional>
#include <sstream>
#include <tuple>
#include <vector>

namespace crl::lp {

enum class Rel { le, eq, ge };
enum class Sense { minimize, maximize };
enum class Status { optimal, infeasible, unbounded };

struct Constraint {
  std::vector<Rat> row;
  Rel rel = Rel::le;
  Rat rhs = Rat(0);
};

// Default variable domain is x >= 0.
struct VarBounds {
  std::optional<Rat> lower = Rat(0);
  std::optional<Rat> upper = std::nullopt;
};

struct RationalLP {
  Sense sense = Sense::minimize;
  std::vector<Rat> objective;
  std::vector<Constraint> constraints;
  std::vector<VarBounds> bounds;  // empty means default for every variable

  int num_vars() const { return static_cast<int>(objective.size()); }

  void check_well_formed() const {
    const std::size_t n = objective.size();
    for (const auto& c : constraints)
      if (c.row.size() != n)
        throw std::invalid_argument("LP constraint row has wrong length");
    if (!bounds.empty() && bounds.size() != n)
      throw std::invalid_argument("LP bounds vector has wrong length");
    for (const auto& b : bounds)
      if (b.lower && b.upper && *b.lower > *b.upper)
        throw std::invalid_argument("LP variable with empty bound interval");
  }
};

// Duals are reported for the solved row system: the user's constraint rows in
// original order and relations, followed by one `y <= U - L` row per variable
// with a finite translated upper bound, in variable order. The convention is
// the minimization form: y <= 0 on <= rows, y >= 0 on >= rows, free on
// equalities, and min-form objective == dual_objective() exactly.
struct Solution {
  Status status = Status::optimal;
  std::vector<Rat> primal;   // original variables
  Rat objective = Rat(0);    // in the original sense
  std::vector<Rat> dual;
  std::vector<Rel> dual_rel;
  std::vector<Rat> dual_rhs;
  Rat objective_shift = Rat(0);  // constant from bound substitution, min form
  int user_rows = 0;
  std::vector<Rat> farkas;         // over solved rows, nonempty iff infeasible
  std::vector<Rat> unbounded_ray;  // over original variables, nonempty iff unbounded

  Rat min_form_objective(Sense sense) const {
    return sense == Sense::maximize ? Rat(-objective) : objective;
  }

  Rat dual_objective() const {
    Rat v = objective_shift;
    for (std::size_t i = 0; i < dual.size(); ++i) v += dual[i] * dual_rhs[i];
    return v;
  }
};

namespace detail {

// Dense simplex tableau over the standard form min c y, A y = b, y >= 0
// with b normalized nonnegative and an identity-start column per row.
struct Tableau {
  int m = 0, n = 0;          // rows, columns (rhs excluded)
  std::vector<Rat> a;        // m x (n+1), column n holds the rhs
  std::vector<Rat> cost;     // n
  std::vector<Rat> red;      // n reduced costs
  Rat zval = Rat(0);         // current objective value
  std::vector<int> basis;    // m, basic column per row
  std::vector<char> enterable;  // n, eligible to enter the basis
  std::vector<char> art;        // n, artificial column flags
  bool purge_artificials = false;  // phase 2: evict zero-valued basic artificials

  Rat& at(int i, int j) { return a[static_cast<std::size_t>(i) * (n + 1) + j]; }
  const Rat& at(int i, int j) const { return a[static_cast<std::size_t>(i) * (n + 1) + j]; }
  Rat& rhs(int i) { return at(i, n); }
  const Rat& rhs(int i) const { return at(i, n); }

  void recompute_reduced() {
    red.assign(static_cast<std::size_t>(n), Rat(0));
    zval = 0;
    for (int i = 0; i < m; ++i) {
      const Rat& cb = cost[static_cast<std::size_t>(basis[i])];
      if (cb == 0) continue;
      zval += cb * rhs(i);
      for (int j = 0; j < n; ++j) {
        const Rat& aij = at(i, j);
        if (sgn(aij) != 0) red[static_cast<std::size_t>(j)] -= cb * aij;
      }
    }
    for (int j = 0; j < n; ++j) red[static_cast<std::size_t>(j)] += cost[static_cast<std::size_t>(j)];
  }

  void pivot(int lrow, int ecol) {
    Rat piv = at(lrow, ecol);
    if (piv != 1) {
      Rat inv = 1 / piv;
      for (int j = 0; j <= n; ++j) {
        Rat& v = at(lrow, j);
        if (sgn(v) != 0) v *= inv;
      }
    }
    for (int i = 0; i < m; ++i) {
      if (i == lrow) continue;
      Rat f = at(i, ecol);
      if (sgn(f) == 0) continue;
      for (int j = 0; j <= n; ++j) {
        const Rat& pv = at(lrow, j);
        if (sgn(pv) != 0) at(i, j) -= f * pv;
      }
    }
    {
      Rat f = red[static_cast<std::size_t>(ecol)];
      if (sgn(f) != 0) {
        for (int j = 0; j < n; ++j) {
          const Rat& pv = at(lrow, j);
          if (sgn(pv) != 0) red[static_cast<std::size_t>(j)] -= f * pv;
        }
        zval += f * rhs(lrow);
      }
    }
    basis[static_cast<std::size_t>(lrow)] = ecol;
  }

  // One Bland step: entering = lowest-index enterable column with negative
  // reduced cost, leaving = min-ratio row breaking ties by lowest basic
  // column index. Returns the entering column on an unbounded direction.
  enum class Step { optimal, moved, unbounded };
  Step bland_step(int* unbounded_col) {
    int ecol = -1;
    for (int j = 0; j < n; ++j)
      if (enterable[static_cast<std::size_t>(j)] && sgn(red[static_cast<std::size_t>(j)]) < 0) {
        ecol = j;
        break;
      }
    if (ecol < 0) return Step::optimal;
    if (purge_artificials) {
      // A basic artificial sits at value 0 after phase 1. Any nonzero entry in
      // the entering column would move it, so evict it with a degenerate pivot
      // first; it is barred from re-entering, so this happens finitely often.
      for (int i = 0; i < m; ++i) {
        if (art[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] &&
            sgn(at(i, ecol)) != 0) {
          pivot(i, ecol);
          return Step::moved;
        }
      }
    }
    int lrow = -1;
    Rat best;
    for (int i = 0; i < m; ++i) {
      if (purge_artificials && art[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])])
        continue;
      const Rat& aie = at(i, ecol);
      if (sgn(aie) <= 0) continue;
      Rat ratio = rhs(i) / aie;
      if (lrow < 0 || ratio < best ||
          (ratio == best && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(lrow)])) {
        lrow = i;
        best = ratio;
      }
    }
    if (lrow < 0) {
      *unbounded_col = ecol;
      return Step::unbounded;
    }
    pivot(lrow, ecol);
    return Step::moved;
  }
};

}  // namespace detail

inline Solution solve_lp(const RationalLP& user) {
  user.check_well_formed();
  const int n = user.num_vars();
  const int rows = static_cast<int>(user.constraints.size());

  // Bound substitution to y >= 0 variables.
  // kind 0: x = L + y. kind 1: x = U - y. kind 2: x = y+ - y- (two columns).
  struct VarMap {
    int kind = 0;
    int col = 0, col2 = 0;
    Rat base = Rat(0);  // L or U
  };
  std::vector<VarMap> vmap(static_cast<std::size_t>(n));
  std::vector<std::pair<int, Rat>> ubrows;  // (internal column, U - L)
  int ncols = 0;
  Rat shift(0);
  std::vector<Rat> min_cost;  // per original variable, min form
  {
    min_cost.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      Rat c = user.objective[static_cast<std::size_t>(j)];
      if (user.sense == Sense::maximize) c = -c;
      min_cost.push_back(c);
    }
  }
  for (int j = 0; j < n; ++j) {
    VarBounds b = user.bounds.empty() ? VarBounds{} : user.bounds[static_cast<std::size_t>(j)];
    VarMap& vm = vmap[static_cast<std::size_t>(j)];
    if (b.lower) {
      vm.kind = 0;
      vm.col = ncols++;
      vm.base = *b.lower;
      shift += min_cost[static_cast<std::size_t>(j)] * vm.base;
      if (b.upper) ubrows.emplace_back(vm.col, *b.upper - *b.lower);
    } else if (b.upper) {
      vm.kind = 1;
      vm.col = ncols++;
      vm.base = *b.upper;
      shift += min_cost[static_cast<std::size_t>(j)] * vm.base;
    } else {
      vm.kind = 2;
      vm.col = ncols++;
      vm.col2 = ncols++;
    }
  }

  // Solved row system: user rows then upper-bound rows, user-facing signs.
  const int nsolved = rows + static_cast<int>(ubrows.size());
  std::vector<std::vector<Rat>> srow(static_cast<std::size_t>(nsolved),
                                     std::vector<Rat>(static_cast<std::size_t>(ncols), Rat(0)));
  std::vector<Rat> srhs(static_cast<std::size_t>(nsolved), Rat(0));
  std::vector<Rel> srel(static_cast<std::size_t>(nsolved), Rel::le);
  for (int i = 0; i < rows; ++i) {
    const Constraint& c = user.constraints[static_cast<std::size_t>(i)];
    srel[static_cast<std::size_t>(i)] = c.rel;
    Rat b = c.rhs;
    for (int j = 0; j < n; ++j) {
      const Rat& aij = c.row[static_cast<std::size_t>(j)];
      if (sgn(aij) == 0) continue;
      const VarMap& vm = vmap[static_cast<std::size_t>(j)];
      switch (vm.kind) {
        case 0:
          srow[static_cast<std::size_t>(i)][static_cast<std::size_t>(vm.col)] += aij;
          b -= aij * vm.base;
          break;
        case 1:
          srow[static_cast<std::size_t>(i)][static_cast<std::size_t>(vm.col)] -= aij;
          b -= aij * vm.base;
          break;
        case 2:
          srow[static_cast<std::size_t>(i)][static_cast<std::size_t>(vm.col)] += aij;
          srow[static_cast<std::size_t>(i)][static_cast<std::size_t>(vm.col2)] -= aij;
          break;
      }
    }
    srhs[static_cast<std::size_t>(i)] = b;
  }
  for (std::size_t k = 0; k < ubrows.size(); ++k) {
    std::size_t i = static_cast<std::size_t>(rows) + k;
    srow[i][static_cast<std::size_t>(ubrows[k].first)] = Rat(1);
    srhs[i] = ubrows[k].second;
    srel[i] = Rel::le;
  }

  // Internal min-form costs over the y columns.
  std::vector<Rat> ycost(static_cast<std::size_t>(ncols), Rat(0));
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = vmap[static_cast<std::size_t>(j)];
    const Rat& c = min_cost[static_cast<std::size_t>(j)];
    switch (vm.kind) {
      case 0: ycost[static_cast<std::size_t>(vm.col)] += c; break;
      case 1: ycost[static_cast<std::size_t>(vm.col)] -= c; break;
      case 2:
        ycost[static_cast<std::size_t>(vm.col)] += c;
        ycost[static_cast<std::size_t>(vm.col2)] -= c;
        break;
    }
  }

  // Row sign normalization and slack/surplus/artificial layout.
  std::vector<char> flipped(static_cast<std::size_t>(nsolved), 0);
  std::vector<Rel> nrel(srel);
  for (int i = 0; i < nsolved; ++i) {
    if (sgn(srhs[static_cast<std::size_t>(i)]) < 0) {
      flipped[static_cast<std::size_t>(i)] = 1;
      srhs[static_cast<std::size_t>(i)] = -srhs[static_cast<std::size_t>(i)];
      for (auto& v : srow[static_cast<std::size_t>(i)]) v = -v;
      if (nrel[static_cast<std::size_t>(i)] == Rel::le) nrel[static_cast<std::size_t>(i)] = Rel::ge;
      else if (nrel[static_cast<std::size_t>(i)] == Rel::ge) nrel[static_cast<std::size_t>(i)] = Rel::le;
    }
  }
  int nslack = 0, nart = 0;
  for (int i = 0; i < nsolved; ++i) {
    if (nrel[static_cast<std::size_t>(i)] != Rel::eq) ++nslack;
    if (nrel[static_cast<std::size_t>(i)] != Rel::le) ++nart;
  }

  detail::Tableau t;
  t.m = nsolved;
  t.n = ncols + nslack + nart;
  t.a.assign(static_cast<std::size_t>(t.m) * (t.n + 1), Rat(0));
  t.basis.assign(static_cast<std::size_t>(t.m), -1);
  t.enterable.assign(static_cast<std::size_t>(t.n), 1);
  t.art.assign(static_cast<std::size_t>(t.n), 0);
  std::vector<int> idcol(static_cast<std::size_t>(t.m), -1);
  std::vector<char>& is_art = t.art;
  {
    int scol = ncols, acol = ncols + nslack;
    for (int i = 0; i < t.m; ++i) {
      for (int j = 0; j < ncols; ++j) t.at(i, j) = srow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      t.rhs(i) = srhs[static_cast<std::size_t>(i)];
      switch (nrel[static_cast<std::size_t>(i)]) {
        case Rel::le:
          t.at(i, scol) = Rat(1);
          idcol[static_cast<std::size_t>(i)] = scol;
          t.basis[static_cast<std::size_t>(i)] = scol;
          ++scol;
          break;
        case Rel::ge:
          t.at(i, scol) = Rat(-1);
          ++scol;
          [[fallthrough]];
        case Rel::eq:
          t.at(i, acol) = Rat(1);
          is_art[static_cast<std::size_t>(acol)] = 1;
          idcol[static_cast<std::size_t>(i)] = acol;
          t.basis[static_cast<std::size_t>(i)] = acol;
          ++acol;
          break;
      }
    }
  }

  Solution sol;
  sol.user_rows = rows;
  sol.dual_rel.assign(srel.begin(), srel.end());
  sol.dual_rhs.resize(static_cast<std::size_t>(nsolved));
  for (int i = 0; i < nsolved; ++i)
    sol.dual_rhs[static_cast<std::size_t>(i)] =
        flipped[static_cast<std::size_t>(i)] ? Rat(-srhs[static_cast<std::size_t>(i)]) : srhs[static_cast<std::size_t>(i)];
  sol.objective_shift = shift;

  // Phase 1: minimize the artificial mass.
  t.cost.assign(static_cast<std::size_t>(t.n), Rat(0));
  for (int j = 0; j < t.n; ++j)
    if (is_art[static_cast<std::size_t>(j)]) t.cost[static_cast<std::size_t>(j)] = Rat(1);
  t.recompute_reduced();
  int ucol = -1;
  while (true) {
    auto s = t.bland_step(&ucol);
    if (s == detail::Tableau::Step::optimal) break;
    if (s == detail::Tableau::Step::unbounded)
      throw std::logic_error("simplex: phase 1 cannot be unbounded");
  }
  if (sgn(t.zval) > 0) {
    sol.status = Status::infeasible;
    sol.farkas.resize(static_cast<std::size_t>(nsolved));
    for (int i = 0; i < nsolved; ++i) {
      int c = idcol[static_cast<std::size_t>(i)];
      Rat y = t.cost[static_cast<std::size_t>(c)] - t.red[static_cast<std::size_t>(c)];
      sol.farkas[static_cast<std::size_t>(i)] = flipped[static_cast<std::size_t>(i)] ? Rat(-y) : y;
    }
    return sol;
  }

  // Phase 2: original min-form costs, artificials barred from entering and
  // evicted lazily if the entering column would move them. Rows whose
  // artificial is never touched are redundant and keep it basic at 0.
  t.cost = ycost;
  t.cost.resize(static_cast<std::size_t>(t.n), Rat(0));
  for (int j = 0; j < t.n; ++j)
    if (is_art[static_cast<std::size_t>(j)]) t.enterable[static_cast<std::size_t>(j)] = 0;
  t.purge_artificials = true;
  t.recompute_reduced();
  while (true) {
    auto s = t.bland_step(&ucol);
    if (s == detail::Tableau::Step::optimal) break;
    if (s == detail::Tableau::Step::unbounded) {
      sol.status = Status::unbounded;
      // Improving direction: entering column 1, basic columns -a[i][e].
      std::vector<Rat> ydir(static_cast<std::size_t>(ncols), Rat(0));
      if (ucol < ncols) ydir[static_cast<std::size_t>(ucol)] = Rat(1);
      for (int i = 0; i < t.m; ++i) {
        int b = t.basis[static_cast<std::size_t>(i)];
        if (b < ncols) ydir[static_cast<std::size_t>(b)] = -t.at(i, ucol);
      }
      sol.unbounded_ray.assign(static_cast<std::size_t>(n), Rat(0));
      for (int j = 0; j < n; ++j) {
        const VarMap& vm = vmap[static_cast<std::size_t>(j)];
        switch (vm.kind) {
          case 0: sol.unbounded_ray[static_cast<std::size_t>(j)] = ydir[static_cast<std::size_t>(vm.col)]; break;
          case 1: sol.unbounded_ray[static_cast<std::size_t>(j)] = -ydir[static_cast<std::size_t>(vm.col)]; break;
          case 2:
            sol.unbounded_ray[static_cast<std::size_t>(j)] =
                ydir[static_cast<std::size_t>(vm.col)] - ydir[static_cast<std::size_t>(vm.col2)];
            break;
        }
      }
      return sol;
    }
  }

  // Optimal: read off primal, duals, objective.
  std::vector<Rat> yval(static_cast<std::size_t>(ncols), Rat(0));
  for (int i = 0; i < t.m; ++i) {
    int b = t.basis[static_cast<std::size_t>(i)];
    if (b < ncols) yval[static_cast<std::size_t>(b)] = t.rhs(i);
  }
  sol.primal.assign(static_cast<std::size_t>(n), Rat(0));
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = vmap[static_cast<std::size_t>(j)];
    switch (vm.kind) {
      case 0: sol.primal[static_cast<std::size_t>(j)] = vm.base + yval[static_cast<std::size_t>(vm.col)]; break;
      case 1: sol.primal[static_cast<std::size_t>(j)] = vm.base - yval[static_cast<std::size_t>(vm.col)]; break;
      case 2:
        sol.primal[static_cast<std::size_t>(j)] =
            yval[static_cast<std::size_t>(vm.col)] - yval[static_cast<std::size_t>(vm.col2)];
        break;
    }
  }
  Rat min_obj = t.zval + shift;
  sol.objective = user.sense == Sense::maximize ? Rat(-min_obj) : min_obj;
  sol.dual.resize(static_cast<std::size_t>(nsolved));
  for (int i = 0; i < nsolved; ++i) {
    int c = idcol[static_cast<std::size_t>(i)];
    Rat y = -t.red[static_cast<std::size_t>(c)];  // phase 2 cost of slack/artificial is 0
    sol.dual[static_cast<std::size_t>(i)] = flipped[static_cast<std::size_t>(i)] ? Rat(-y) : y;
  }
  if (sol.min_form_objective(user.sense) != sol.dual_objective())
    throw std::logic_error("simplex: strong duality violated (internal error)");
  sol.status = Status::optimal;
  return sol;
}

// ---------------------------------------------------------------------------
// Transportation problems

struct TransportResult {
  Rat value;
  std::vector<std::tuple<int, int, Rat>> plan;  // (supply index, demand index, mass > 0)
  std::vector<Rat> potential_supply;            // f
  std::vector<Rat> potential_demand;            // g: f_i + g_j <= cost_ij, f.s + g.d == value
};

inline TransportResult solve_transport(const std::vector<std::vector<Rat>>& cost,
                                       const std::vector<Rat>& supply,
                                       const std::vector<Rat>& demand) {
  const int ns = static_cast<int>(supply.size());
  const int nd = static_cast<int>(demand.size());
  if (ns == 0 || nd == 0) throw std::invalid_argument("transport: empty marginals");
  if (static_cast<int>(cost.size()) != ns)
    throw std::invalid_argument("transport: cost matrix has wrong row count");
  for (const auto& r : cost)
    if (static_cast<int>(r.size()) != nd)
      throw std::invalid_argument("transport: cost matrix has wrong column count");
  Rat stot(0), dtot(0);
  for (const auto& v : supply) {
    if (v < 0) throw std::invalid_argument("transport: negative supply");
    stot += v;
  }
  for (const auto& v : demand) {
    if (v < 0) throw std::invalid_argument("transport: negative demand");
    dtot += v;
  }
  if (stot != dtot) throw std::invalid_argument("transport: supply and demand masses differ");

  RationalLP lp;
  lp.sense = Sense::minimize;
  lp.objective.reserve(static_cast<std::size_t>(ns) * nd);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nd; ++j) lp.objective.push_back(cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  const int nv = ns * nd;
  for (int i = 0; i < ns; ++i) {
    Constraint c;
    c.row.assign(static_cast<std::size_t>(nv), Rat(0));
    for (int j = 0; j < nd; ++j) c.row[static_cast<std::size_t>(i * nd + j)] = Rat(1);
    c.rel = Rel::eq;
    c.rhs = supply[static_cast<std::size_t>(i)];
    lp.constraints.push_back(std::move(c));
  }
  for (int j = 0; j < nd; ++j) {
    Constraint c;
    c.row.assign(static_cast<std::size_t>(nv), Rat(0));
    for (int i = 0; i < ns; ++i) c.row[static_cast<std::size_t>(i * nd + j)] = Rat(1);
    c.rel = Rel::eq;
    c.rhs = demand[static_cast<std::size_t>(j)];
    lp.constraints.push_back(std::move(c));
  }
  Solution s = solve_lp(lp);
  if (s.status != Status::optimal)
    throw std::logic_error("transport: balanced instance did not solve to optimality");
  TransportResult out;
  out.value = s.objective;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nd; ++j) {
      const Rat& m = s.primal[static_cast<std::size_t>(i * nd + j)];
      if (sgn(m) > 0) out.plan.emplace_back(i, j, m);
    }
  out.potential_supply.assign(s.dual.begin(), s.dual.begin() + ns);
  out.potential_demand.assign(s.dual.begin() + ns, s.dual.begin() + ns + nd);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < nd; ++j)
      if (out.potential_supply[static_cast<std::size_t>(i)] + out.potential_demand[static_cast<std::size_t>(j)] >
          cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        throw std::logic_error("transport: dual potentials violate feasibility (internal error)");
  return out;
}

inline std::string dump_lp(const RationalLP& lp) {
  std::ostringstream out;
  out << (lp.sense == Sense::minimize ? "min" : "max");
  for (const auto& c : lp.objective) out << " " << rat_str(c);
  out << "\n";
  for (const auto& c : lp.constraints) {
    for (std::size_t j = 0; j < c.row.size(); ++j) out << (j ? " " : "") << rat_str(c.row[j]);
    out << (c.rel == Rel::le ? " <= " : c.rel == Rel::eq ? " == " : " >= ") << rat_str(c.rhs)
        << "\n";
  }
  if (!lp.bounds.empty()) {
    for (std::size_t j = 0; j < lp.bounds.size(); ++j) {
      out << "x" << j << " in ["
          << (lp.bounds[j].lower ? rat_str(*lp.bounds[j].lower) : std::string("-inf")) << ", "
          << (lp.bounds[j].upper ? rat_str(*lp.bounds[j].upper) : std::string("inf")) << "]\n";
    }
  }
  return out.str();
}

}  // namespace crl::lp
