#include "rfim/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace rfim {

Lattice Lattice::build(int d, int n) {
  if (d < 2) throw std::invalid_argument("lattice: dimension must be >= 2, got " + std::to_string(d));
  if (n < 0) throw std::invalid_argument("lattice: radius must be >= 0, got " + std::to_string(n));

  Lattice lat;
  lat.dim_ = d;
  lat.radius_ = n;
  lat.side_ = 2 * n + 1;

  double sites_d = std::pow(static_cast<double>(lat.side_), d);
  if (sites_d > 1e9) throw std::invalid_argument("lattice: too many sites");
  const int num_sites = static_cast<int>(sites_d + 0.5);
  lat.num_sites_ = num_sites;

  lat.coords_.resize(static_cast<std::size_t>(num_sites) * d);
  lat.boundary_flag_.resize(num_sites);
  lat.parity_.resize(num_sites);

  // Lexicographic site enumeration: coordinate 0 most significant.
  std::vector<int> x(d, -n);
  for (int s = 0; s < num_sites; ++s) {
    int abs_sum = 0;
    bool bd = false;
    for (int k = 0; k < d; ++k) {
      lat.coords_[static_cast<std::size_t>(s) * d + k] = x[k];
      abs_sum += std::abs(x[k]);
      if (std::abs(x[k]) == n) bd = true;
    }
    lat.parity_[s] = (abs_sum % 2 == 0) ? 1 : -1;
    lat.boundary_flag_[s] = bd ? 1 : 0;
    if (bd) lat.boundary_sites_.push_back(s);
    for (int k = d - 1; k >= 0; --k) {
      if (++x[k] <= n) break;
      x[k] = -n;
    }
  }

  // Strides for index arithmetic (axis 0 most significant).
  std::vector<int> stride(d, 1);
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * lat.side_;

  lat.edge_at_.assign(static_cast<std::size_t>(num_sites) * d, -1);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(d) * 2 * n * num_sites / std::max(1, lat.side_));
  for (int s = 0; s < num_sites; ++s) {
    for (int k = 0; k < d; ++k) {
      if (lat.coords_[static_cast<std::size_t>(s) * d + k] < n)
        edges.emplace_back(s, s + stride[k]);
    }
  }
  std::sort(edges.begin(), edges.end());
  lat.edge_u_.reserve(edges.size());
  lat.edge_v_.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    int u = edges[e].first, v = edges[e].second;
    lat.edge_u_.push_back(u);
    lat.edge_v_.push_back(v);
    for (int k = 0; k < d; ++k) {
      if (v - u == stride[k]) {
        lat.edge_at_[static_cast<std::size_t>(u) * d + k] = static_cast<int>(e);
        break;
      }
    }
  }

  // CSR adjacency.
  lat.neighbor_off_.assign(num_sites + 1, 0);
  for (const auto& [u, v] : edges) {
    ++lat.neighbor_off_[u + 1];
    ++lat.neighbor_off_[v + 1];
  }
  for (int s = 0; s < num_sites; ++s) lat.neighbor_off_[s + 1] += lat.neighbor_off_[s];
  lat.neighbor_flat_.resize(2 * edges.size());
  std::vector<int> fill(lat.neighbor_off_.begin(), lat.neighbor_off_.end() - 1);
  for (const auto& [u, v] : edges) {
    lat.neighbor_flat_[fill[u]++] = v;
    lat.neighbor_flat_[fill[v]++] = u;
  }
  return lat;
}

int Lattice::site_of(std::span<const int> x) const {
  int s = 0;
  for (int k = 0; k < dim_; ++k) s = s * side_ + (x[k] + radius_);
  return s;
}

bool Lattice::in_cube(std::span<const int> x) const {
  for (int k = 0; k < dim_; ++k)
    if (x[k] < -radius_ || x[k] > radius_) return false;
  return true;
}

std::vector<int> interior_window(const Lattice& lat, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("interior_window: eps must be in (0,1)");
  const int m = static_cast<int>(std::floor((1.0 - eps) * lat.radius()));
  std::vector<int> out;
  for (int s = 0; s < lat.num_sites(); ++s) {
    auto x = lat.coords_of(s);
    bool inside = true;
    for (int k = 0; k < lat.dim(); ++k)
      if (std::abs(x[k]) > m) { inside = false; break; }
    if (inside) out.push_back(s);
  }
  return out;
}

std::vector<Block> block_grid(const Lattice& lat, int k) {
  const int n = lat.radius(), d = lat.dim();
  if (k < 1 || k > n) throw std::invalid_argument("block_grid: need 1 <= k <= n");

  // Centers kZ^d with |z*k| <= n + k/2: every site has a center within k/2
  // per coordinate.
  const int z_max = (2 * n + k) / (2 * k);
  const int per_axis = 2 * z_max + 1;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= per_axis;

  std::vector<Block> blocks;
  blocks.reserve(total);
  std::vector<int> z(d, -z_max);
  std::vector<int> x(d);
  for (long b = 0; b < total; ++b) {
    Block blk;
    blk.radius = k;
    blk.center.resize(d);
    bool fully = true;
    for (int i = 0; i < d; ++i) {
      blk.center[i] = z[i] * k;
      if (std::abs(blk.center[i]) + k > n) fully = false;
    }
    blk.fully_inside = fully;

    // Enumerate B_k(center) clipped to B_n.
    std::vector<int> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
      lo[i] = std::max(blk.center[i] - k, -n);
      hi[i] = std::min(blk.center[i] + k, n);
    }
    blk.faces.assign(static_cast<std::size_t>(2) * d, {});
    for (int i = 0; i < d; ++i) x[i] = lo[i];
    bool done = false;
    while (!done) {
      int s = lat.site_of(x);
      blk.sites.push_back(s);
      for (int i = 0; i < d; ++i) {
        if (x[i] == blk.center[i] - k) blk.faces[2 * i].push_back(s);
        if (x[i] == blk.center[i] + k) blk.faces[2 * i + 1].push_back(s);
      }
      for (int i = d - 1; i >= 0; --i) {
        if (++x[i] <= hi[i]) break;
        x[i] = lo[i];
        if (i == 0) done = true;
      }
    }
    blocks.push_back(std::move(blk));

    for (int i = d - 1; i >= 0; --i) {
      if (++z[i] <= z_max) break;
      z[i] = -z_max;
    }
  }
  return blocks;
}

}  // namespace rfim
