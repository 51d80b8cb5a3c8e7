// Spin configurations and the exact observables of the model: energy,
// magnetization, overlap, the field log-weight, and the checkerboard gauge map.
// The field scale is hard-wired to |B_n|^{-1/2}.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "rfim/disorder.hpp"
#include "rfim/lattice.hpp"

namespace rfim {

enum class Interaction { Ferro, Antiferro };

struct ModelParams {
  double beta = 1.0;  // > 0
  double h = 0.0;
  Interaction interaction = Interaction::Ferro;
};

struct SpinConfig {
  const Lattice* lattice = nullptr;
  std::vector<std::int8_t> spins;  // exactly +-1, one per site

  static SpinConfig all_plus(const Lattice& lat) {
    return SpinConfig{&lat, std::vector<std::int8_t>(lat.num_sites(), 1)};
  }
};

// Ferro:     -sum_edges s_i s_j - (h/sqrt|B_n|) sum_i J_i s_i
// Antiferro: +sum_edges s_i s_j - (h/sqrt|B_n|) sum_i J_i s_i
double energy(const ModelParams& params, const DisorderField& disorder, const SpinConfig& config);

// Energy change for flipping one spin; matches a direct recomputation.
double flip_delta_energy(const ModelParams& params, const DisorderField& disorder,
                         const SpinConfig& config, int site);

double magnetization(const SpinConfig& config);

// (1/|B_n|) sum_i s^1_i s^2_i; requires a shared lattice.
double overlap(const SpinConfig& a, const SpinConfig& b);

// L(s) = beta*h*|B_n|^{-1/2} sum_i J_i s_i. Identically,
// energy(ferro,h) = energy(ferro,h=0) - L/beta.
double field_log_weight(const SpinConfig& config, const DisorderField& disorder, double beta,
                        double h);

// s_i -> (-1)^{|i|_1} s_i; an involution that preserves overlaps.
SpinConfig gauge_map(const SpinConfig& config);

// Flat +-1 vectors in site order.
void write_spins_csv(std::ostream& os, const SpinConfig& config);
SpinConfig read_spins_csv(std::istream& is, const Lattice& lat);
void write_spins_binary(std::ostream& os, const SpinConfig& config);
SpinConfig read_spins_binary(std::istream& is, const Lattice& lat);

}  // namespace rfim
