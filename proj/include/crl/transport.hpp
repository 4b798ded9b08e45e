#pragma once
// Oscillation bounds between measures on one embedding space: the exact
// Kantorovich (W1) distance under the truncated metric min(rho, 1), an
// optimal coupling, and an extremal 1-Lipschitz [0,1] coloring achieving
// the same gap, built by extending the LP dual potential to the whole
// space and shifting its minimum to 0. Total variation is provided for
// discrete spaces, where it coincides with W1.

#include "crl/lp.hpp"
#include "crl/measures.hpp"

namespace crl {

struct OscillationBound {
  WeightedEmbeddingMeasure mu, mu_prime;
  Rat value;
  std::vector<std::tuple<int, int, Rat>> coupling;  // space indices, mass > 0
  Coloring potential;  // kappa with kappa(mu) - kappa(mu_prime) == value
};

// W1(mu, mu') for the truncated metric. The returned potential certifies the
// value from below (it is a feasible coloring attaining the gap) while the
// coupling certifies it from above; both are exact.
inline OscillationBound kantorovich(const WeightedEmbeddingMeasure& mu,
                                    const WeightedEmbeddingMeasure& mu_prime) {
  if (mu.space() != mu_prime.space())
    throw std::invalid_argument("kantorovich: measures live on different spaces");
  const SpaceRef& space = mu.space();

  std::vector<int> s1, s2;
  std::vector<Rat> w1, w2;
  for (const auto& [idx, w] : mu.atoms()) {
    s1.push_back(idx);
    w1.push_back(w);
  }
  for (const auto& [idx, w] : mu_prime.atoms()) {
    s2.push_back(idx);
    w2.push_back(w);
  }
  std::vector<std::vector<Rat>> cost(s1.size(), std::vector<Rat>(s2.size()));
  for (std::size_t i = 0; i < s1.size(); ++i)
    for (std::size_t j = 0; j < s2.size(); ++j)
      cost[i][j] = space->rho_truncated(s1[i], s2[j]);

  lp::TransportResult tr = lp::solve_transport(cost, w1, w2);

  // McShane extension of the demand-side potential: phi(z) = min over the
  // support of mu' of cost(z, y) - g(y) is 1-Lipschitz, matches -g on that
  // support up to dual slack, and keeps the optimal gap. Shifting its
  // minimum to 0 lands it in [0,1] because the cost is capped at 1.
  const int k = space->size();
  std::vector<Rat> phi(static_cast<std::size_t>(k));
  for (int z = 0; z < k; ++z) {
    Rat best;
    bool first = true;
    for (std::size_t y = 0; y < s2.size(); ++y) {
      Rat v = space->rho_truncated(z, s2[y]) - tr.potential_demand[y];
      if (first || v < best) {
        best = v;
        first = false;
      }
    }
    phi[static_cast<std::size_t>(z)] = best;
  }
  Rat lo = phi[0];
  for (const auto& v : phi)
    if (v < lo) lo = v;
  for (auto& v : phi) v -= lo;
  Coloring potential(space, std::move(phi));

  Rat gap = evaluate_coloring(potential, mu) - evaluate_coloring(potential, mu_prime);
  if (gap != tr.value)
    throw std::logic_error("kantorovich: extremal coloring misses the optimal value");

  std::vector<std::tuple<int, int, Rat>> coupling;
  for (const auto& [i, j, m] : tr.plan)
    coupling.emplace_back(s1[static_cast<std::size_t>(i)], s2[static_cast<std::size_t>(j)], m);
  return OscillationBound{mu, mu_prime, tr.value, std::move(coupling), std::move(potential)};
}

// (1/2) sum |mu - mu'| over atoms. Only defined on discrete spaces (all
// distinct embeddings at truncated distance 1), where it equals W1.
inline Rat total_variation(const WeightedEmbeddingMeasure& mu,
                           const WeightedEmbeddingMeasure& mu_prime) {
  if (mu.space() != mu_prime.space())
    throw std::invalid_argument("total_variation: measures live on different spaces");
  if (!mu.space()->discrete_truncated())
    throw std::domain_error("total_variation: metric not discrete");
  Rat twice(0);
  auto a = mu.atoms().begin(), ae = mu.atoms().end();
  auto b = mu_prime.atoms().begin(), be = mu_prime.atoms().end();
  while (a != ae || b != be) {
    if (b == be || (a != ae && a->first < b->first)) {
      twice += a->second;
      ++a;
    } else if (a == ae || b->first < a->first) {
      twice += b->second;
      ++b;
    } else {
      Rat diff = a->second - b->second;
      if (diff < 0) diff = -diff;
      twice += diff;
      ++a;
      ++b;
    }
  }
  return twice / 2;
}

}  // namespace crl
