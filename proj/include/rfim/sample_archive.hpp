// In-memory store for a stream of spin samples plus binary spool I/O. Spins are
// kept both as +-1 bytes (dot products, per-site sums) and as packed bits
// (overlaps via popcount); all contracts are stated on the +-1 values.
#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "rfim/lattice.hpp"
#include "rfim/spin.hpp"

namespace rfim {

struct SampleArchive {
  int dim = 0;
  int radius = 0;
  int num_sites = 0;
  int words = 0;  // 64-bit words per packed sample

  std::vector<std::int8_t> spins;    // size() * num_sites
  std::vector<std::uint64_t> packed; // size() * words, bit 1 = spin +1
  std::vector<double> mag;           // magnetization per sample
  std::vector<double> stag_mag;      // parity-weighted magnetization per sample

  void init(const Lattice& lat, int reserve_samples = 0);
  void append(const SpinConfig& config, const Lattice& lat);

  int size() const { return static_cast<int>(mag.size()); }
  const std::int8_t* row(int t) const {
    return spins.data() + static_cast<std::size_t>(t) * num_sites;
  }
  const std::uint64_t* packed_row(int t) const {
    return packed.data() + static_cast<std::size_t>(t) * words;
  }

  // (1/|B_n|) sum_i s^a_i s^b_i via xor-popcount on the packed rows.
  double overlap(int a, int b) const {
    const std::uint64_t* pa = packed_row(a);
    const std::uint64_t* pb = packed_row(b);
    int disagree = 0;
    for (int w = 0; w < words; ++w) disagree += std::popcount(pa[w] ^ pb[w]);
    return 1.0 - 2.0 * disagree / static_cast<double>(num_sites);
  }

  // Lag-1 autocorrelation of m^2 across stored (thinned) samples; used to
  // validate the sampling schedule.
  double lag1_autocorr_m2() const;

  void save(const std::string& path, const std::string& sidecar_json) const;
  static SampleArchive load(const std::string& path);
};

}  // namespace rfim
