// Geometry of the cube {-n,...,n}^d: sites, nearest-neighbor edges, boundary,
// interior windows and the overlapping block grid. Immutable after build.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rfim {

class Lattice {
 public:
  // Throws std::invalid_argument for d < 2 or n < 0.
  static Lattice build(int d, int n);

  int dim() const { return dim_; }
  int radius() const { return radius_; }
  int side() const { return side_; }
  int num_sites() const { return num_sites_; }
  int num_edges() const { return static_cast<int>(edge_u_.size()); }

  // Sites are ordered lexicographically on coordinates, edges lexicographically
  // on (min endpoint, max endpoint); both orderings are part of the contract.
  std::span<const int> coords_of(int site) const {
    return {coords_.data() + static_cast<std::size_t>(site) * dim_, static_cast<std::size_t>(dim_)};
  }
  int site_of(std::span<const int> x) const;
  bool in_cube(std::span<const int> x) const;

  int edge_u(int e) const { return edge_u_[e]; }
  int edge_v(int e) const { return edge_v_[e]; }

  // Edge leaving `site` in +direction along `axis`; -1 at the cube face.
  int edge_at(int site, int axis) const { return edge_at_[static_cast<std::size_t>(site) * dim_ + axis]; }

  std::span<const int> neighbors(int site) const {
    return {neighbor_flat_.data() + neighbor_off_[site],
            static_cast<std::size_t>(neighbor_off_[site + 1] - neighbor_off_[site])};
  }

  bool on_boundary(int site) const { return boundary_flag_[site] != 0; }
  const std::vector<int>& boundary_sites() const { return boundary_sites_; }

  // (-1)^{|i|_1}, the checkerboard parity used by the gauge transform.
  int parity(int site) const { return parity_[site]; }

 private:
  Lattice() = default;

  int dim_ = 0, radius_ = 0, side_ = 0, num_sites_ = 0;
  std::vector<int> coords_;         // num_sites * dim
  std::vector<int> edge_u_, edge_v_;
  std::vector<int> edge_at_;        // num_sites * dim, -1 where absent
  std::vector<int> neighbor_off_, neighbor_flat_;
  std::vector<std::uint8_t> boundary_flag_;
  std::vector<int> boundary_sites_;
  std::vector<std::int8_t> parity_;
};

// Sites of B_{floor((1-eps)n)}. Requires 0 < eps < 1.
std::vector<int> interior_window(const Lattice& lat, double eps);

// One block B_k(x) of the renormalization grid, clipped to the cube.
struct Block {
  std::vector<int> center;              // in kZ^d
  int radius = 0;
  std::vector<int> sites;               // site indices, ascending
  bool fully_inside = false;
  std::vector<std::vector<int>> faces;  // 2d faces: axis 0 -,+ then axis 1 -,+ ...
};

// Blocks B_k(x), x in kZ^d, whose centers are within rounding distance of the
// cube (every site of B_n lies within l_inf distance k/2 of some center).
// Requires 1 <= k <= n.
std::vector<Block> block_grid(const Lattice& lat, int k);

}  // namespace rfim
