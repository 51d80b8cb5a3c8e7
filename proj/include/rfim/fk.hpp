// FK-Ising (random-cluster, cluster weight 2) model: weights, Edwards-Sokal
// sampling under free/wired boundary conditions, connectivity queries, cluster
// coloring, good-block diagnostics and the connectivity estimate of q.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rfim/lattice.hpp"
#include "rfim/rng.hpp"
#include "rfim/spin.hpp"
#include "rfim/union_find.hpp"

namespace rfim {

enum class BoundaryCondition { Free, Wired };

struct BondConfig {
  const Lattice* lattice = nullptr;
  std::vector<std::uint8_t> bonds;  // one per edge, 0 closed / 1 open
  BoundaryCondition bc = BoundaryCondition::Free;
};

struct ClusterPartition {
  const Lattice* lattice = nullptr;
  BoundaryCondition bc = BoundaryCondition::Free;
  std::vector<int> label;               // root site index per site
  int component_count = 0;              // k(w), respecting the wired merge
  std::vector<std::uint8_t> label_touches_boundary;  // indexed by site, valid at roots

  bool connected(int x, int y) const { return label[x] == label[y]; }
  bool connected_to_boundary(int x) const { return label_touches_boundary[label[x]] != 0; }
};

// p = 1 - e^{-2 beta}; requires beta > 0.
double beta_to_p(double beta);

// Critical inverse temperature of the 2D Ising model, asinh(1)/2.
double beta_critical_2d();

// Exact 2D spontaneous magnetization (1 - sinh(2 beta)^{-4})^{1/8}; the
// independent oracle for sqrt(q) at d=2. Requires beta > beta_critical_2d().
double onsager_sqrt_q(double beta);

// log of p^{E(w)} (1-p)^{|E|-E(w)} 2^{k(w)} with k per the boundary condition.
double rc_log_weight(const BondConfig& omega, double p);

ClusterPartition cluster_partition(const BondConfig& omega);

// Independent uniform +-1 per component (free boundary condition only).
SpinConfig color_clusters(const BondConfig& omega, RngStream& rng);

enum class FourPointPattern { AllConnected, PairXY_WZ, PairXW_YZ, PairXZ_YW, Other };

// Pattern of {x,y,w,z} under the partition; the even-pattern probabilities sum
// to the four-point spin correlation. Requires distinct sites.
FourPointPattern four_point_classify(const ClusterPartition& part, int x, int y, int w, int z);

// A block is good when one open cluster inside it touches all 2d faces and
// every other open cluster inside it has l_inf diameter < k (the surrogate for
// "no stray open path of length k"). Requires a fully interior block.
bool is_good_block(const BondConfig& omega, const Block& block);

// Edwards-Sokal alternation whose bond marginal is the random-cluster measure.
// Wired is realized by conditioning the coupled spins to agree on the boundary.
class RcSampler {
 public:
  RcSampler(const Lattice& lat, double p, BoundaryCondition bc, std::uint64_t key);

  void update();
  const BondConfig& bonds() const { return bonds_; }
  const ClusterPartition& partition() const { return partition_; }  // of current bonds

 private:
  const Lattice* lat_;
  double p_;
  BoundaryCondition bc_;
  RngStream rng_;
  std::vector<std::int8_t> spins_;
  BondConfig bonds_;
  ClusterPartition partition_;
  UnionFind uf_;
  std::vector<std::int8_t> color_;
};

// Edge-ordered bit-vector serialization.
void write_bonds_binary(std::ostream& os, const BondConfig& omega);
BondConfig read_bonds_binary(std::istream& is, const Lattice& lat, BoundaryCondition bc);

struct SqrtQEstimate {
  int n = 0;
  double p_hat = 0.0;   // P(0 <-> boundary of B_n), free bc
  double se = 0.0;
  int samples = 0;
};

struct SqrtQSchedule {
  int burn_in = 1000;
  int thinning = 2;
  int samples = 10000;
};

// Per-n Monte Carlo estimates of P(0 <-> dB_n); q_hat = (value at largest n)^2.
// Meaningful for supercritical p (the caller's responsibility).
std::vector<SqrtQEstimate> estimate_sqrt_q(int d, double p, std::span<const int> n_list,
                                           const SqrtQSchedule& schedule, std::uint64_t seed);

}  // namespace rfim
