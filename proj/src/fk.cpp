#include "rfim/fk.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rfim {

void write_bonds_binary(std::ostream& os, const BondConfig& omega) {
  const int e = static_cast<int>(omega.bonds.size());
  std::vector<std::uint8_t> bits((e + 7) / 8, 0);
  for (int i = 0; i < e; ++i)
    if (omega.bonds[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  const std::int32_t count = e;
  os.write(reinterpret_cast<const char*>(&count), sizeof(count));
  os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
}

BondConfig read_bonds_binary(std::istream& is, const Lattice& lat, BoundaryCondition bc) {
  std::int32_t count = 0;
  is.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!is || count != lat.num_edges()) throw std::runtime_error("bonds: edge count mismatch");
  std::vector<std::uint8_t> bits((count + 7) / 8);
  is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  if (!is) throw std::runtime_error("bonds: truncated bit vector");
  BondConfig omega{&lat, std::vector<std::uint8_t>(count, 0), bc};
  for (int i = 0; i < count; ++i)
    omega.bonds[i] = (bits[i / 8] >> (i % 8)) & 1;
  return omega;
}

double beta_to_p(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("beta_to_p: beta must be > 0");
  return 1.0 - std::exp(-2.0 * beta);
}

double beta_critical_2d() { return 0.5 * std::asinh(1.0); }

double onsager_sqrt_q(double beta) {
  if (!(beta > beta_critical_2d()))
    throw std::invalid_argument("onsager_sqrt_q: beta must exceed the 2D critical value");
  const double s = std::sinh(2.0 * beta);
  return std::pow(1.0 - 1.0 / (s * s * s * s), 0.125);
}

double rc_log_weight(const BondConfig& omega, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("rc_log_weight: p must be in (0,1)");
  long open = 0;
  for (std::uint8_t b : omega.bonds) open += b;
  const long total = static_cast<long>(omega.bonds.size());
  const int k = cluster_partition(omega).component_count;
  return open * std::log(p) + (total - open) * std::log1p(-p) + k * std::log(2.0);
}

ClusterPartition cluster_partition(const BondConfig& omega) {
  const Lattice& lat = *omega.lattice;
  UnionFind uf(lat.num_sites());
  for (int e = 0; e < lat.num_edges(); ++e)
    if (omega.bonds[e]) uf.unite(lat.edge_u(e), lat.edge_v(e));

  ClusterPartition part;
  part.lattice = omega.lattice;
  part.bc = omega.bc;
  part.label.resize(lat.num_sites());
  part.label_touches_boundary.assign(lat.num_sites(), 0);
  for (int s : lat.boundary_sites()) part.label_touches_boundary[uf.find(s)] = 1;

  if (omega.bc == BoundaryCondition::Wired) {
    // All boundary-touching components merge into one for k(w).
    int merged = 0;
    bool any = false;
    for (int s = 0; s < lat.num_sites(); ++s) {
      if (uf.find(s) == s && part.label_touches_boundary[s]) {
        if (any) ++merged;
        any = true;
      }
    }
    part.component_count = uf.components() - merged;
    // Labels: all boundary-touching sites share the smallest boundary root.
    int boundary_label = -1;
    for (int s = 0; s < lat.num_sites(); ++s) {
      int r = uf.find(s);
      if (part.label_touches_boundary[r]) {
        if (boundary_label < 0) boundary_label = r;
        part.label[s] = boundary_label;
      } else {
        part.label[s] = r;
      }
    }
    if (boundary_label >= 0) part.label_touches_boundary[boundary_label] = 1;
  } else {
    part.component_count = uf.components();
    for (int s = 0; s < lat.num_sites(); ++s) part.label[s] = uf.find(s);
  }
  return part;
}

SpinConfig color_clusters(const BondConfig& omega, RngStream& rng) {
  if (omega.bc != BoundaryCondition::Wired) {
    const Lattice& lat = *omega.lattice;
    UnionFind uf(lat.num_sites());
    for (int e = 0; e < lat.num_edges(); ++e)
      if (omega.bonds[e]) uf.unite(lat.edge_u(e), lat.edge_v(e));
    std::vector<std::int8_t> color(lat.num_sites(), 0);
    SpinConfig config{omega.lattice, std::vector<std::int8_t>(lat.num_sites())};
    for (int s = 0; s < lat.num_sites(); ++s)
      if (uf.find(s) == s) color[s] = rng.next_bool() ? 1 : -1;
    for (int s = 0; s < lat.num_sites(); ++s) config.spins[s] = color[uf.find(s)];
    return config;
  }
  throw std::invalid_argument("color_clusters: spin assignment under wired bc is unsupported");
}

FourPointPattern four_point_classify(const ClusterPartition& part, int x, int y, int w, int z) {
  if (x == y || x == w || x == z || y == w || y == z || w == z)
    throw std::invalid_argument("four_point_classify: sites must be distinct");
  const int lx = part.label[x], ly = part.label[y], lw = part.label[w], lz = part.label[z];
  if (lx == ly && ly == lw && lw == lz) return FourPointPattern::AllConnected;
  if (lx == ly && lw == lz && lx != lw) return FourPointPattern::PairXY_WZ;
  if (lx == lw && ly == lz && lx != ly) return FourPointPattern::PairXW_YZ;
  if (lx == lz && ly == lw && lx != ly) return FourPointPattern::PairXZ_YW;
  return FourPointPattern::Other;
}

bool is_good_block(const BondConfig& omega, const Block& block) {
  if (!block.fully_inside) throw std::invalid_argument("is_good_block: block is clipped");
  const Lattice& lat = *omega.lattice;
  const int d = lat.dim();
  const int nb = static_cast<int>(block.sites.size());

  // Local union-find over block sites using edges internal to the block.
  std::vector<int> local(lat.num_sites(), -1);
  for (int i = 0; i < nb; ++i) local[block.sites[i]] = i;
  UnionFind uf(nb);
  for (int i = 0; i < nb; ++i) {
    const int s = block.sites[i];
    for (int axis = 0; axis < d; ++axis) {
      const int e = lat.edge_at(s, axis);
      if (e < 0 || !omega.bonds[e]) continue;
      const int t = lat.edge_v(e) == s ? lat.edge_u(e) : lat.edge_v(e);
      if (local[t] >= 0) uf.unite(i, local[t]);
    }
  }

  // Which clusters touch which faces.
  std::vector<unsigned> face_mask(nb, 0);
  for (std::size_t f = 0; f < block.faces.size(); ++f)
    for (int s : block.faces[f]) face_mask[uf.find(local[s])] |= (1u << f);
  const unsigned all_faces = (1u << (2 * d)) - 1;
  int giant = -1;
  for (int i = 0; i < nb; ++i) {
    if (uf.find(i) == i && face_mask[i] == all_faces) {
      giant = i;
      break;
    }
  }
  if (giant < 0) return false;

  // Every other cluster must have l_inf diameter < k.
  std::vector<int> lo(static_cast<std::size_t>(nb) * d), hi(static_cast<std::size_t>(nb) * d);
  std::vector<std::uint8_t> seen(nb, 0);
  for (int i = 0; i < nb; ++i) {
    const int r = uf.find(i);
    auto x = lat.coords_of(block.sites[i]);
    if (!seen[r]) {
      seen[r] = 1;
      for (int k = 0; k < d; ++k) lo[r * d + k] = hi[r * d + k] = x[k];
    } else {
      for (int k = 0; k < d; ++k) {
        lo[r * d + k] = std::min(lo[r * d + k], x[k]);
        hi[r * d + k] = std::max(hi[r * d + k], x[k]);
      }
    }
  }
  for (int r = 0; r < nb; ++r) {
    if (!seen[r] || r == giant || uf.find(r) != r) continue;
    for (int k = 0; k < d; ++k)
      if (hi[r * d + k] - lo[r * d + k] >= block.radius) return false;
  }
  return true;
}

RcSampler::RcSampler(const Lattice& lat, double p, BoundaryCondition bc, std::uint64_t key)
    : lat_(&lat), p_(p), bc_(bc), rng_(key), uf_(lat.num_sites()) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("RcSampler: p must be in (0,1)");
  spins_.assign(lat.num_sites(), 1);
  bonds_.lattice = &lat;
  bonds_.bc = bc;
  bonds_.bonds.assign(lat.num_edges(), 0);
  color_.assign(lat.num_sites(), 0);
}

void RcSampler::update() {
  const Lattice& lat = *lat_;
  // Bonds from spins: open aligned edges with probability p.
  for (int e = 0; e < lat.num_edges(); ++e) {
    bonds_.bonds[e] =
        (spins_[lat.edge_u(e)] == spins_[lat.edge_v(e)] && rng_.next_unit() < p_) ? 1 : 0;
  }
  // Spins from bonds: uniform color per cluster. Under wired, the boundary is
  // pre-merged so boundary spins stay equal, which keeps the conditioning exact.
  uf_.reset(lat.num_sites());
  for (int e = 0; e < lat.num_edges(); ++e)
    if (bonds_.bonds[e]) uf_.unite(lat.edge_u(e), lat.edge_v(e));
  if (bc_ == BoundaryCondition::Wired) {
    const auto& bd = lat.boundary_sites();
    for (std::size_t i = 1; i < bd.size(); ++i) uf_.unite(bd[0], bd[i]);
  }
  for (int s = 0; s < lat.num_sites(); ++s)
    if (uf_.find(s) == s) color_[s] = rng_.next_bool() ? 1 : -1;
  for (int s = 0; s < lat.num_sites(); ++s) spins_[s] = color_[uf_.find(s)];

  partition_ = cluster_partition(bonds_);
}

std::vector<SqrtQEstimate> estimate_sqrt_q(int d, double p, std::span<const int> n_list,
                                           const SqrtQSchedule& schedule, std::uint64_t seed) {
  if (d == 2 && p > 0.0 && p < 1.0 && p <= beta_to_p(beta_critical_2d()))
    std::fprintf(stderr,
                 "estimate_sqrt_q: p=%.4f is not above the self-dual point; the limit q is 0\n",
                 p);
  std::vector<SqrtQEstimate> out;
  for (int n : n_list) {
    const Lattice lat = Lattice::build(d, n);
    SqrtQEstimate est;
    est.n = n;
    est.samples = schedule.samples;
    if (p >= 1.0) {
      est.p_hat = 1.0;
      out.push_back(est);
      continue;
    }
    if (p <= 0.0) {
      est.p_hat = n == 0 ? 1.0 : 0.0;
      out.push_back(est);
      continue;
    }
    RcSampler sampler(lat, p, BoundaryCondition::Free, derive_key(seed, {rng_tag::kFk, static_cast<std::uint64_t>(n)}));
    for (int i = 0; i < schedule.burn_in; ++i) sampler.update();
    const int center = lat.site_of(std::vector<int>(d, 0));
    long hits = 0;
    std::vector<double> batch;
    const int batches = 32;
    const int per_batch = std::max(1, schedule.samples / batches);
    long batch_hits = 0;
    int in_batch = 0;
    for (int s = 0; s < schedule.samples; ++s) {
      for (int t = 0; t < schedule.thinning; ++t) sampler.update();
      const bool hit = n == 0 || sampler.partition().connected_to_boundary(center);
      hits += hit;
      batch_hits += hit;
      if (++in_batch == per_batch) {
        batch.push_back(static_cast<double>(batch_hits) / per_batch);
        batch_hits = 0;
        in_batch = 0;
      }
    }
    est.p_hat = static_cast<double>(hits) / schedule.samples;
    if (batch.size() > 1) {
      double mean = 0.0;
      for (double b : batch) mean += b;
      mean /= static_cast<double>(batch.size());
      double var = 0.0;
      for (double b : batch) var += (b - mean) * (b - mean);
      var /= static_cast<double>(batch.size() - 1);
      est.se = std::sqrt(var / static_cast<double>(batch.size()));
    }
    out.push_back(est);
  }
  return out;
}

}  // namespace rfim
