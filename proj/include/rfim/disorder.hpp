// Quenched disorder realizations (J_i): generation, the scaled field sum that
// drives the random overlap masses, and the checkerboard gauge flip.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfim/lattice.hpp"

namespace rfim {

enum class DisorderKind { Gaussian, Rademacher };

DisorderKind parse_disorder_kind(const std::string& tag);  // throws on unknown tag
std::string to_string(DisorderKind kind);

struct DisorderField {
  const Lattice* lattice = nullptr;
  std::vector<double> values;  // one per site, in site order
  DisorderKind kind = DisorderKind::Gaussian;
  std::uint64_t seed = 0;
};

// I.i.d. mean-zero unit-variance draws, one per site, fully determined by
// (seed, kind, site order).
DisorderField sample_disorder(const Lattice& lat, DisorderKind kind, std::uint64_t seed);

// sqrt(q) * beta * h * sum_i J_i / sqrt(|B_n|). Requires q > 0.
double scaled_field_sum(const DisorderField& field, double q, double beta, double h);

// J_i -> (-1)^{|i|_1} J_i; an involution.
DisorderField gauge_flip_field(const DisorderField& field);

// Flat archival record: seed, distribution, d, n, values.
void write_disorder_csv(std::ostream& os, const DisorderField& field);
DisorderField read_disorder_csv(std::istream& is, const Lattice& lat);
void write_disorder_binary(std::ostream& os, const DisorderField& field);
DisorderField read_disorder_binary(std::istream& is, const Lattice& lat);

}  // namespace rfim
