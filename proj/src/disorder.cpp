#include "rfim/disorder.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "rfim/rng.hpp"

namespace rfim {

DisorderKind parse_disorder_kind(const std::string& tag) {
  if (tag == "gaussian") return DisorderKind::Gaussian;
  if (tag == "rademacher") return DisorderKind::Rademacher;
  throw std::invalid_argument("disorder: unknown distribution tag '" + tag + "'");
}

std::string to_string(DisorderKind kind) {
  return kind == DisorderKind::Gaussian ? "gaussian" : "rademacher";
}

DisorderField sample_disorder(const Lattice& lat, DisorderKind kind, std::uint64_t seed) {
  DisorderField field;
  field.lattice = &lat;
  field.kind = kind;
  field.seed = seed;
  field.values.resize(lat.num_sites());
  const std::uint64_t key = derive_key(seed, {rng_tag::kDisorder});
  if (kind == DisorderKind::Gaussian) {
    for (int i = 0; i < lat.num_sites(); ++i) field.values[i] = gaussian_at(key, i);
  } else {
    for (int i = 0; i < lat.num_sites(); ++i) field.values[i] = rademacher_at(key, i);
  }
  return field;
}

double scaled_field_sum(const DisorderField& field, double q, double beta, double h) {
  if (!(q > 0.0)) throw std::invalid_argument("scaled_field_sum: q must be > 0");
  double sum = 0.0;
  for (double v : field.values) sum += v;
  return std::sqrt(q) * beta * h * sum / std::sqrt(static_cast<double>(field.values.size()));
}

DisorderField gauge_flip_field(const DisorderField& field) {
  DisorderField out = field;
  const Lattice& lat = *field.lattice;
  for (int i = 0; i < lat.num_sites(); ++i) out.values[i] = field.values[i] * lat.parity(i);
  return out;
}

void write_disorder_csv(std::ostream& os, const DisorderField& field) {
  os << field.seed << ',' << to_string(field.kind) << ',' << field.lattice->dim() << ','
     << field.lattice->radius();
  char buf[32];
  for (double v : field.values) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << ',' << buf;
  }
  os << '\n';
}

DisorderField read_disorder_csv(std::istream& is, const Lattice& lat) {
  DisorderField field;
  field.lattice = &lat;
  std::string tok;
  auto next = [&]() {
    if (!std::getline(is, tok, ',')) throw std::runtime_error("disorder csv: truncated record");
    return tok;
  };
  field.seed = std::stoull(next());
  field.kind = parse_disorder_kind(next());
  int d = std::stoi(next());
  std::string rest;
  std::getline(is, rest);
  if (d != lat.dim()) throw std::runtime_error("disorder csv: dimension mismatch");
  std::size_t pos = 0;
  int n = std::stoi(rest, &pos);
  if (n != lat.radius()) throw std::runtime_error("disorder csv: radius mismatch");
  field.values.reserve(lat.num_sites());
  while (pos < rest.size() && field.values.size() < static_cast<std::size_t>(lat.num_sites())) {
    std::size_t used = 0;
    field.values.push_back(std::stod(rest.substr(pos + 1), &used));
    pos += 1 + used;
  }
  if (field.values.size() != static_cast<std::size_t>(lat.num_sites()))
    throw std::runtime_error("disorder csv: wrong value count");
  return field;
}

void write_disorder_binary(std::ostream& os, const DisorderField& field) {
  std::uint64_t seed = field.seed;
  std::int32_t kind = static_cast<std::int32_t>(field.kind);
  std::int32_t d = field.lattice->dim(), n = field.lattice->radius();
  os.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
  os.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
  os.write(reinterpret_cast<const char*>(&d), sizeof(d));
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(field.values.data()),
           static_cast<std::streamsize>(field.values.size() * sizeof(double)));
}

DisorderField read_disorder_binary(std::istream& is, const Lattice& lat) {
  DisorderField field;
  field.lattice = &lat;
  std::uint64_t seed = 0;
  std::int32_t kind = 0, d = 0, n = 0;
  is.read(reinterpret_cast<char*>(&seed), sizeof(seed));
  is.read(reinterpret_cast<char*>(&kind), sizeof(kind));
  is.read(reinterpret_cast<char*>(&d), sizeof(d));
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  if (!is || d != lat.dim() || n != lat.radius())
    throw std::runtime_error("disorder binary: header mismatch");
  field.seed = seed;
  field.kind = static_cast<DisorderKind>(kind);
  field.values.resize(lat.num_sites());
  is.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!is) throw std::runtime_error("disorder binary: truncated values");
  return field;
}

}  // namespace rfim
