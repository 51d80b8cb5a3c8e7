// Test-only oracles, independent of the implementation paths they check:
// brute-force random-cluster enumeration (BFS connectivity, no union-find),
// exact inverse-CDF Gibbs sampling from full enumeration, and the binomial
// Rademacher MGF.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <vector>

#include "rfim/disorder.hpp"
#include "rfim/lattice.hpp"
#include "rfim/rng.hpp"
#include "rfim/spin.hpp"

namespace rfim::oracle {

struct TinyGraph {
  int sites = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> boundary;  // used by the wired convention

  static TinyGraph from_lattice(const Lattice& lat) {
    TinyGraph g;
    g.sites = lat.num_sites();
    for (int e = 0; e < lat.num_edges(); ++e) g.edges.emplace_back(lat.edge_u(e), lat.edge_v(e));
    g.boundary = lat.boundary_sites();
    return g;
  }
};

// Component labels by BFS over open edges; wired merges everything touching
// the boundary.
inline std::vector<int> bfs_labels(const TinyGraph& g, std::uint64_t mask, bool wired,
                                   int* k_out) {
  std::vector<std::vector<int>> adj(g.sites);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    if (mask >> e & 1) {
      adj[g.edges[e].first].push_back(g.edges[e].second);
      adj[g.edges[e].second].push_back(g.edges[e].first);
    }
  }
  std::vector<int> label(g.sites, -1);
  int k = 0;
  for (int s = 0; s < g.sites; ++s) {
    if (label[s] >= 0) continue;
    label[s] = s;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (label[v] < 0) {
          label[v] = s;
          q.push(v);
        }
    }
    ++k;
  }
  if (wired) {
    // Components touching the boundary count as one.
    std::vector<char> touches(g.sites, 0);
    for (int b : g.boundary) touches[label[b]] = 1;
    int boundary_comps = 0;
    for (int s = 0; s < g.sites; ++s)
      if (label[s] == s && touches[s]) ++boundary_comps;
    if (boundary_comps > 0) k -= boundary_comps - 1;
    int first = -1;
    for (int s = 0; s < g.sites; ++s) {
      if (touches[label[s]]) {
        if (first < 0) first = label[s];
        label[s] = first;
      }
    }
  }
  if (k_out) *k_out = k;
  return label;
}

// Full 2^|E| enumeration of the random-cluster model (cluster weight 2).
class RcEnumeration {
 public:
  RcEnumeration(TinyGraph graph, double p, bool wired) : g_(std::move(graph)) {
    if (g_.edges.size() > 24) throw std::invalid_argument("rc oracle: too many edges");
    const std::uint64_t total = 1ULL << g_.edges.size();
    prob_.resize(total);
    labels_.resize(total);
    double zsum = 0.0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      int open = 0;
      for (std::size_t e = 0; e < g_.edges.size(); ++e) open += (mask >> e) & 1;
      int k = 0;
      labels_[mask] = bfs_labels(g_, mask, wired, &k);
      const double w = std::pow(p, open) *
                       std::pow(1.0 - p, static_cast<double>(g_.edges.size()) - open) *
                       std::pow(2.0, k);
      prob_[mask] = w;
      zsum += w;
    }
    for (double& w : prob_) w /= zsum;
  }

  double connect_prob(int x, int y) const {
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
      if (labels_[mask][x] == labels_[mask][y]) acc += prob_[mask];
    return acc;
  }

  double boundary_connect_prob(int x) const {
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask) {
      for (int b : g_.boundary)
        if (labels_[mask][x] == labels_[mask][b]) {
          acc += prob_[mask];
          break;
        }
    }
    return acc;
  }

  double edge_open_prob(int e) const {
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask)
      if (mask >> e & 1) acc += prob_[mask];
    return acc;
  }

  // Probability that every cluster contains an even number of {x,y,w,z}; this
  // equals the four-point spin correlation under the coupling.
  double even_pattern_prob(int x, int y, int w, int z) const {
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask) {
      const auto& lb = labels_[mask];
      std::map<int, int> count;
      ++count[lb[x]];
      ++count[lb[y]];
      ++count[lb[w]];
      ++count[lb[z]];
      bool even = true;
      for (const auto& [l, c] : count)
        if (c % 2) even = false;
      if (even) acc += prob_[mask];
    }
    return acc;
  }

  // Distribution of the component count (diagnostic for the wired merge).
  std::map<int, double> k_distribution() const {
    std::map<int, double> dist;
    for (std::uint64_t mask = 0; mask < prob_.size(); ++mask) {
      int k = 0;
      std::map<int, int> seen;
      for (int l : labels_[mask]) seen[l] = 1;
      k = static_cast<int>(seen.size());
      dist[k] += prob_[mask];
    }
    return dist;
  }

 private:
  TinyGraph g_;
  std::vector<double> prob_;
  std::vector<std::vector<int>> labels_;
};

// Exact single-edge random-cluster open probability: p/(p + 2(1-p)).
inline double single_edge_open_prob(double p) { return p / (p + 2.0 * (1.0 - p)); }

// Exact Gibbs states with inverse-CDF sampling (for stationarity tests).
class ExactGibbs {
 public:
  ExactGibbs(const ModelParams& params, const DisorderField& field) : lat_(*field.lattice) {
    const int S = lat_.num_sites();
    if (S > 16) throw std::invalid_argument("exact gibbs oracle: too many sites");
    const std::uint64_t total = 1ULL << S;
    cdf_.resize(total);
    double zsum = 0.0;
    double max_arg = -1e300;
    std::vector<double> args(total);
    for (std::uint64_t s = 0; s < total; ++s) {
      SpinConfig c = config_of(s);
      args[s] = -params.beta * energy(params, field, c);
      max_arg = std::max(max_arg, args[s]);
    }
    for (std::uint64_t s = 0; s < total; ++s) {
      zsum += std::exp(args[s] - max_arg);
      cdf_[s] = zsum;
    }
    for (double& c : cdf_) c /= zsum;
  }

  SpinConfig draw(RngStream& rng) const {
    const double u = rng.next_unit();
    std::uint64_t lo = 0, hi = cdf_.size() - 1;
    while (lo < hi) {
      const std::uint64_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return config_of(lo);
  }

 private:
  SpinConfig config_of(std::uint64_t s) const {
    SpinConfig c{&lat_, std::vector<std::int8_t>(lat_.num_sites())};
    for (int i = 0; i < lat_.num_sites(); ++i)
      c.spins[i] = (s >> i & 1) ? 1 : -1;
    return c;
  }
  const Lattice& lat_;
  std::vector<double> cdf_;
};

// E exp(sum_i J_i / sqrt(N)) for i.i.d. Rademacher J via the binomial law.
inline double rademacher_mgf_all_ones(int n) {
  // sum = n - 2k with probability C(n,k) 2^{-n}
  std::vector<double> logc(n + 1);
  logc[0] = 0.0;
  for (int k = 1; k <= n; ++k)
    logc[k] = logc[k - 1] + std::log(static_cast<double>(n - k + 1) / k);
  double acc = 0.0;
  for (int k = 0; k <= n; ++k)
    acc += std::exp(logc[k] - n * std::log(2.0) +
                    (n - 2.0 * k) / std::sqrt(static_cast<double>(n)));
  return acc;
}

}  // namespace rfim::oracle
