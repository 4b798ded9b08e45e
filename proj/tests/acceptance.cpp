// Acceptance run: eight end-to-end checks, one PASS/FAIL line each, nonzero
// exit if any fail. Tolerances and runtime budgets are pinned below; every
// equality without a named tolerance is exact rational equality.

#include "crl/certificate.hpp"
#include "crl/groups.hpp"

#include "support/helpers.hpp"
#include "support/oracles.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace crl;
using namespace crl::ramsey;
using testsupport::contains;
using testsupport::preset;
using testsupport::run_cli;
using testsupport::write_scratch;

namespace {

// Pinned tolerances and budgets.
const Rat kGridTol = rat(1, 32);          // lambda-grid vs exact value
constexpr double kOracleTol = 0.125;      // 1/16-grid oracle vs adaptive bound (1/8)
constexpr double kFloatSlack = 1e-9;      // double-arithmetic slack on the oracle only
constexpr long long kMsPureSets = 5000;   // per size
constexpr long long kMsLinearOrders = 30000;
constexpr long long kMsSandwich = 300000;
constexpr long long kMsGroups = 120000;
constexpr int kSandwichInstances = 50;
constexpr int kSandwichRestarts = 60;
constexpr int kMeasurePairs = 100;

using Clock = std::chrono::steady_clock;

long long elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

// Each criterion returns an empty string on success or the failure reason.
int run_criterion(int idx, const std::string& label,
                  const std::function<std::string()>& body) {
  auto t0 = Clock::now();
  std::string why;
  try {
    why = body();
  } catch (const std::exception& e) {
    why = std::string("exception: ") + e.what();
  }
  std::cout << (why.empty() ? "PASS" : "FAIL") << " criterion " << idx << " [" << label << "]";
  if (!why.empty()) std::cout << ": " << why;
  std::cout << " (" << elapsed_ms(t0) << " ms)" << std::endl;
  return why.empty() ? 0 : 1;
}

std::string structure_file(const std::string& name, const StructureRef& s) {
  return write_scratch(name, serialize_structure(*s));
}

// --------------------------------------------------------------------------
// 1. Pure-sets symmetry: value_uniform(1pt, kpt, kpt) = 0 exactly, k = 2,3,4.

std::string criterion_pure_sets() {
  for (int k : {2, 3, 4}) {
    auto t0 = Clock::now();
    UniformValue uv = value_uniform(preset("pure-sets", 1), preset("pure-sets", k),
                                    preset("pure-sets", k));
    long long ms = elapsed_ms(t0);
    if (uv.value != 0)
      return "k=" + std::to_string(k) + ": value " + rat_str(uv.value) + ", expected 0";
    if (ms >= kMsPureSets)
      return "k=" + std::to_string(k) + ": took " + std::to_string(ms) + " ms (budget " +
             std::to_string(kMsPureSets) + ")";
  }
  return "";
}

// --------------------------------------------------------------------------
// 2. Linear orders: value = 1/(n-1) for n = 2..6; lambda-grid cross-check at
//    n = 3 within 1/32; the search subcommand halts at size 5 for eps = 1/4.

std::string criterion_linear_orders() {
  auto t0 = Clock::now();
  for (int n = 2; n <= 6; ++n) {
    Rat v = value_uniform(preset("linear-orders", 1), preset("linear-orders", 2),
                          preset("linear-orders", n))
                .value;
    Rat expect = rat(1, n - 1);
    if (v != expect)
      return "n=" + std::to_string(n) + ": value " + rat_str(v) + ", expected " +
             rat_str(expect);
  }
  Rat exact = rat(1, 2);
  Rat grid = testsupport::lambda_grid_uniform_value(preset("linear-orders", 1),
                                                    preset("linear-orders", 2),
                                                    preset("linear-orders", 3), 64);
  Rat gap = grid >= exact ? Rat(grid - exact) : Rat(exact - grid);
  if (gap > kGridTol)
    return "lambda grid at n=3 gave " + rat_str(grid) + ", off the exact 1/2 by " +
           rat_str(gap) + " > 1/32";

  std::string a1 = structure_file("acc-lo1.structure", preset("linear-orders", 1));
  std::string b2 = structure_file("acc-lo2.structure", preset("linear-orders", 2));
  auto found = run_cli("search " + a1 + " " + b2 +
                       " --eps 1/4 --preset linear-orders --max-size 8 --jobs 1");
  if (found.exit_code != 0) return "search subcommand exited " + std::to_string(found.exit_code);
  if (!contains(found.output, "witness size 5"))
    return "search did not report witness size 5:\n" + found.output;
  if (contains(found.output, "candidate size 6"))
    return "search kept scanning past the size-5 witness";

  long long ms = elapsed_ms(t0);
  if (ms >= kMsLinearOrders)
    return "took " + std::to_string(ms) + " ms (budget " + std::to_string(kMsLinearOrders) + ")";
  return "";
}

// --------------------------------------------------------------------------
// 3. Sandwich + oracle on 50 random discrete instances with |Emb(A,C)| <= 5:
//    adaptive lower bound <= uniform value exactly, and the exhaustive
//    1/16-grid adaptive value lies within 1/8 of the returned bound.

std::string criterion_sandwich() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(0xACCE57ull);
  SearchBudget budget;
  budget.restarts = kSandwichRestarts;
  for (int i = 0; i < kSandwichInstances; ++i) {
    auto t = testsupport::random_discrete_triple(rng, 5);
    Rat uniform = value_uniform(t.a, t.b, t.c).value;
    Rat adaptive = value_adaptive_lower(t.a, t.b, t.c, budget).value;
    if (adaptive > uniform)
      return "instance " + std::to_string(i) + ": adaptive " + rat_str(adaptive) +
             " exceeds uniform " + rat_str(uniform);
    double oracle = testsupport::adaptive_grid_value(t.a, t.b, t.c, 16);
    double gap = std::fabs(oracle - adaptive.get_d());
    if (gap > kOracleTol + kFloatSlack)
      return "instance " + std::to_string(i) + ": grid oracle " + std::to_string(oracle) +
             " vs bound " + rat_str(adaptive) + " differ by " + std::to_string(gap) + " > 1/8";
  }
  long long ms = elapsed_ms(t0);
  if (ms >= kMsSandwich)
    return "took " + std::to_string(ms) + " ms (budget " + std::to_string(kMsSandwich) + ")";
  return "";
}

// --------------------------------------------------------------------------
// 4. Kantorovich correctness on 100 random measure pairs: primal cost equals
//    the dual potential gap exactly, the discrete fast path matches total
//    variation, and the metric axioms hold exactly.

std::string criterion_kantorovich() {
  auto discrete_space = EmbeddingSpace::enumerate(preset("linear-orders", 1),
                                                  preset("linear-orders", 4));
  auto graded_space = EmbeddingSpace::enumerate(preset("two-level-ultrametric", 1),
                                                preset("two-level-ultrametric", 6));
  std::mt19937_64 rng(41);
  for (int i = 0; i < kMeasurePairs; ++i) {
    const auto& space = i % 2 == 0 ? discrete_space : graded_space;
    auto mu = testsupport::random_measure(space, rng);
    auto nu = testsupport::random_measure(space, rng);
    auto xi = testsupport::random_measure(space, rng);
    OscillationBound ob = kantorovich(mu, nu);

    Rat primal(0);
    for (const auto& [r, c, m] : ob.coupling) primal += m * space->rho(r, c);
    if (primal != ob.value)
      return "pair " + std::to_string(i) + ": coupling cost " + rat_str(primal) +
             " differs from value " + rat_str(ob.value);
    Rat dual = evaluate_coloring(ob.potential, mu) - evaluate_coloring(ob.potential, nu);
    if (dual != ob.value)
      return "pair " + std::to_string(i) + ": dual gap " + rat_str(dual) +
             " differs from value " + rat_str(ob.value);

    if (space->discrete_truncated()) {
      Rat tv = total_variation(mu, nu);
      if (tv != ob.value)
        return "pair " + std::to_string(i) + ": total variation " + rat_str(tv) +
               " differs from transport value " + rat_str(ob.value);
    }

    Rat back = kantorovich(nu, mu).value;
    if (back != ob.value) return "pair " + std::to_string(i) + ": asymmetric";
    Rat self = kantorovich(mu, mu).value;
    if (self != 0) return "pair " + std::to_string(i) + ": d(mu,mu) != 0";
    if (mu == nu ? ob.value != 0 : ob.value == 0)
      return "pair " + std::to_string(i) + ": vanishing exactly on equal measures fails";
    Rat via = kantorovich(mu, xi).value + kantorovich(xi, nu).value;
    if (ob.value > via)
      return "pair " + std::to_string(i) + ": triangle inequality fails by " +
             rat_str(Rat(ob.value - via));
  }
  return "";
}

// --------------------------------------------------------------------------
// 5. Stabilization: a length-2 pure-sets chain drives three simultaneous
//    random colorings to oscillation 0.

std::string criterion_stabilize() {
  auto a = preset("pure-sets", 1);
  auto b = preset("pure-sets", 2);
  auto c1 = preset("pure-sets", 3);
  auto c2 = preset("pure-sets", 4);
  auto ac2 = EmbeddingSpace::enumerate(a, c2);
  std::mt19937_64 rng(5150);
  std::vector<Coloring> colorings;
  for (int i = 0; i < 3; ++i) colorings.push_back(testsupport::random_coloring(ac2, rng));
  StabilizeReport rep = stabilize_many(a, b, {{c1, std::nullopt}, {c2, std::nullopt}}, colorings);
  if (rep.oscillations.size() != 3) return "expected 3 oscillation entries";
  for (std::size_t i = 0; i < rep.oscillations.size(); ++i)
    if (rep.oscillations[i] != 0)
      return "coloring " + std::to_string(i) + ": oscillation " +
             rat_str(rep.oscillations[i]) + ", expected 0";
  return "";
}

// --------------------------------------------------------------------------
// 6. Group criterion: S3 full support gives 0; Z decays as 1/3,1/5,1/7,1/9;
//    F2 is strictly positive, nonincreasing, and replays pinned fixtures.

std::string criterion_groups() {
  auto t0 = Clock::now();
  groups::GroupHandle s3 = groups::GroupHandle::from_table(
      groups::FiniteGroupTable::symmetric_group(3));
  groups::GroupValue gv = groups::group_value(
      {s3, s3.support(0), s3.support(0), groups::GroupMetric::discrete, std::nullopt});
  if (gv.value != 0) return "S3 with S = G: value " + rat_str(gv.value) + ", expected 0";

  groups::GroupHandle z = groups::parse_group_spec("abelian 1");
  auto zprof = groups::decay_profile(z, {"0", "1"}, 4);
  for (int r = 1; r <= 4; ++r) {
    Rat expect = rat(1, 2 * r + 1);
    if (zprof[static_cast<std::size_t>(r - 1)].second != expect)
      return "Z at radius " + std::to_string(r) + ": " +
             rat_str(zprof[static_cast<std::size_t>(r - 1)].second) + ", expected " +
             rat_str(expect);
  }

  groups::GroupHandle f2 = groups::parse_group_spec("free 2");
  auto fprof = groups::decay_profile(f2, {"e", "a", "b"}, 3, 2);
  const Rat fixtures[3] = {rat(2, 3), rat(6, 11), rat(18, 35)};
  Rat prev(2);
  for (int r = 1; r <= 3; ++r) {
    const Rat& v = fprof[static_cast<std::size_t>(r - 1)].second;
    if (v <= 0) return "F2 at radius " + std::to_string(r) + " is not strictly positive";
    if (v > prev) return "F2 profile increased at radius " + std::to_string(r);
    if (v != fixtures[r - 1])
      return "F2 at radius " + std::to_string(r) + ": " + rat_str(v) + ", fixture " +
             rat_str(fixtures[r - 1]);
    prev = v;
  }
  long long ms = elapsed_ms(t0);
  if (ms >= kMsGroups)
    return "took " + std::to_string(ms) + " ms (budget " + std::to_string(kMsGroups) + ")";
  return "";
}

// --------------------------------------------------------------------------
// 7. Certificates: everything emitted passes the verify subcommand; three
//    single-field corruptions are rejected, each in its own failure class.

std::string criterion_certificates() {
  std::vector<std::string> certs;
  int emitted = 0;

  auto emit = [&](const std::string& tag, const StructureRef& a, const StructureRef& b,
                  const StructureRef& c, const std::string& extra) -> std::string {
    std::string fa = structure_file("acc7-" + tag + "-a.structure", a);
    std::string fb = structure_file("acc7-" + tag + "-b.structure", b);
    std::string fc = structure_file("acc7-" + tag + "-c.structure", c);
    std::string cert = (testsupport::scratch_dir() / ("acc7-" + tag + ".cert")).string();
    auto r = run_cli("value " + fa + " " + fb + " " + fc + " --eps 1 " + extra + " --cert " +
                     cert);
    if (r.exit_code != 0) return "";
    ++emitted;
    certs.push_back(cert);
    return cert;
  };

  for (int n = 2; n <= 4; ++n)
    if (emit("lo" + std::to_string(n), preset("linear-orders", 1), preset("linear-orders", 2),
             preset("linear-orders", n), "").empty())
      return "uniform emission failed for linear orders size " + std::to_string(n);
  if (emit("ps", preset("pure-sets", 1), preset("pure-sets", 2), preset("pure-sets", 2), "")
          .empty())
    return "uniform emission failed for pure sets";

  std::mt19937_64 rng(0xCE27ull);
  for (int i = 0; i < 10; ++i) {
    auto t = testsupport::random_discrete_triple(rng, 5);
    std::string tag = "rnd" + std::to_string(i);
    std::string mode = i % 2 == 0 ? "" : "--mode adaptive --restarts 40";
    if (emit(tag, t.a, t.b, t.c, mode).empty())
      return "emission failed for random instance " + std::to_string(i);
  }

  for (const std::string& cert : certs) {
    auto r = run_cli("verify " + cert);
    if (r.exit_code != 0 || !contains(r.output, "certificate ok"))
      return "emitted certificate failed verification: " + cert + "\n" + r.output;
  }
  if (emitted != 14) return "expected 14 emitted certificates, got " + std::to_string(emitted);

  // Single-field corruptions of one uniform certificate, reserialized with
  // exactly that field changed.
  CertDoc base = parse_certificate_text(testsupport::read_file(certs[1]));  // lo3, value 1/2
  struct Tamper {
    const char* label;
    const char* expect;
    std::function<bool(CertDoc&)> apply;
  };
  const Tamper tampers[3] = {
      {"measure weight", "[measure]",
       [](CertDoc& d) {
         d.nu[0].second += rat(1, 1000);
         return true;
       }},
      {"coupling entry", "[pair-marginal]",
       [](CertDoc& d) {
         if (d.pairs.empty() || d.pairs[0].coupling.empty()) return false;
         d.pairs[0].coupling[0].mass += rat(1, 1000);
         return true;
       }},
      {"potential value", "[potential-gap]",
       [](CertDoc& d) {
         if (d.pairs.empty()) return false;
         std::map<std::vector<int>, Rat> net;
         for (const CertCoupling& row : d.pairs[0].coupling) {
           net[row.left] += row.mass;
           net[row.right] -= row.mass;
         }
         for (auto& [m, v] : d.pairs[0].potential) {
           auto it = net.find(m);
           if (it == net.end() || it->second == 0) continue;
           v += v == 1 ? rat(-1, 1000) : rat(1, 1000);
           return true;
         }
         return false;
       }},
  };
  for (int i = 0; i < 3; ++i) {
    CertDoc doc = base;
    if (!tampers[i].apply(doc))
      return std::string("could not stage the ") + tampers[i].label + " corruption";
    std::string path = write_scratch("acc7-tamper" + std::to_string(i) + ".cert",
                                     serialize_certificate(doc));
    auto r = run_cli("verify " + path);
    if (r.exit_code != 2)
      return std::string(tampers[i].label) + " corruption: verify exited " +
             std::to_string(r.exit_code) + ", expected 2";
    if (!contains(r.output, tampers[i].expect))
      return std::string(tampers[i].label) + " corruption landed outside " + tampers[i].expect +
             ":\n" + r.output;
  }
  return "";
}

// --------------------------------------------------------------------------
// 8. Restriction isometry: on S4 acting on the 4-point pure set, the action
//    pseudometric equals the embedding-space metric on all pairs.

std::string criterion_restriction_isometry() {
  groups::FiniteGroupTable s4 = groups::FiniteGroupTable::symmetric_group(4);
  groups::GroupAction act = groups::symmetric_action(4, s4);
  auto aa = EmbeddingSpace::enumerate(act.structure, act.structure);
  if (aa->size() != 24) return "Emb(A,A) has " + std::to_string(aa->size()) + " members";
  std::vector<int> at(s4.names.size());
  for (std::size_t i = 0; i < s4.names.size(); ++i) {
    at[i] = aa->index_of(groups::restriction_map(act, s4.names[i]));
    if (at[i] < 0) return "restriction of '" + s4.names[i] + "' is not in Emb(A,A)";
  }
  for (std::size_t i = 0; i < s4.names.size(); ++i)
    for (std::size_t j = 0; j < s4.names.size(); ++j) {
      Rat left = groups::pseudometric_dA(act, s4.names[i], s4.names[j]);
      Rat right = aa->rho(at[i], at[j]);
      if (left != right)
        return "pair (" + s4.names[i] + ", " + s4.names[j] + "): d_A " + rat_str(left) +
               " vs rho " + rat_str(right);
    }
  return "";
}

}  // namespace

int main() {
  int failures = 0;
  failures += run_criterion(1, "pure-sets symmetry", criterion_pure_sets);
  failures += run_criterion(2, "linear orders", criterion_linear_orders);
  failures += run_criterion(3, "sandwich + oracle", criterion_sandwich);
  failures += run_criterion(4, "kantorovich correctness", criterion_kantorovich);
  failures += run_criterion(5, "stabilization", criterion_stabilize);
  failures += run_criterion(6, "group criterion", criterion_groups);
  failures += run_criterion(7, "certificates", criterion_certificates);
  failures += run_criterion(8, "restriction isometry", criterion_restriction_isometry);
  if (failures) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
