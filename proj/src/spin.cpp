#include "rfim/spin.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace rfim {

namespace {
void check_shared_lattice(const Lattice* a, const Lattice* b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": lattice mismatch");
}
}  // namespace

double energy(const ModelParams& params, const DisorderField& disorder, const SpinConfig& config) {
  check_shared_lattice(config.lattice, disorder.lattice, "energy");
  const Lattice& lat = *config.lattice;
  const double sign = params.interaction == Interaction::Ferro ? -1.0 : 1.0;
  double bond = 0.0;
  for (int e = 0; e < lat.num_edges(); ++e)
    bond += static_cast<double>(config.spins[lat.edge_u(e)]) * config.spins[lat.edge_v(e)];
  double field = 0.0;
  for (int i = 0; i < lat.num_sites(); ++i) field += disorder.values[i] * config.spins[i];
  return sign * bond - params.h / std::sqrt(static_cast<double>(lat.num_sites())) * field;
}

double flip_delta_energy(const ModelParams& params, const DisorderField& disorder,
                         const SpinConfig& config, int site) {
  const Lattice& lat = *config.lattice;
  const double sign = params.interaction == Interaction::Ferro ? -1.0 : 1.0;
  int nbr_sum = 0;
  for (int j : lat.neighbors(site)) nbr_sum += config.spins[j];
  const double s = config.spins[site];
  return -2.0 * sign * s * nbr_sum +
         2.0 * params.h / std::sqrt(static_cast<double>(lat.num_sites())) * disorder.values[site] * s;
}

double magnetization(const SpinConfig& config) {
  long sum = 0;
  for (std::int8_t s : config.spins) sum += s;
  return static_cast<double>(sum) / static_cast<double>(config.spins.size());
}

double overlap(const SpinConfig& a, const SpinConfig& b) {
  check_shared_lattice(a.lattice, b.lattice, "overlap");
  long sum = 0;
  for (std::size_t i = 0; i < a.spins.size(); ++i)
    sum += static_cast<int>(a.spins[i]) * b.spins[i];
  return static_cast<double>(sum) / static_cast<double>(a.spins.size());
}

double field_log_weight(const SpinConfig& config, const DisorderField& disorder, double beta,
                        double h) {
  check_shared_lattice(config.lattice, disorder.lattice, "field_log_weight");
  double sum = 0.0;
  for (std::size_t i = 0; i < config.spins.size(); ++i)
    sum += disorder.values[i] * config.spins[i];
  return beta * h * sum / std::sqrt(static_cast<double>(config.spins.size()));
}

SpinConfig gauge_map(const SpinConfig& config) {
  SpinConfig out = config;
  const Lattice& lat = *config.lattice;
  for (int i = 0; i < lat.num_sites(); ++i)
    out.spins[i] = static_cast<std::int8_t>(config.spins[i] * lat.parity(i));
  return out;
}

void write_spins_csv(std::ostream& os, const SpinConfig& config) {
  for (std::size_t i = 0; i < config.spins.size(); ++i) {
    if (i) os << ',';
    os << static_cast<int>(config.spins[i]);
  }
  os << '\n';
}

SpinConfig read_spins_csv(std::istream& is, const Lattice& lat) {
  SpinConfig config{&lat, {}};
  config.spins.reserve(lat.num_sites());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("spins csv: missing line");
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t used = 0;
    int v = std::stoi(line.substr(pos), &used);
    if (v != 1 && v != -1) throw std::runtime_error("spins csv: value not +-1");
    config.spins.push_back(static_cast<std::int8_t>(v));
    pos += used;
    if (pos < line.size() && line[pos] == ',') ++pos;
  }
  if (config.spins.size() != static_cast<std::size_t>(lat.num_sites()))
    throw std::runtime_error("spins csv: wrong spin count");
  return config;
}

void write_spins_binary(std::ostream& os, const SpinConfig& config) {
  os.write(reinterpret_cast<const char*>(config.spins.data()),
           static_cast<std::streamsize>(config.spins.size()));
}

SpinConfig read_spins_binary(std::istream& is, const Lattice& lat) {
  SpinConfig config{&lat, std::vector<std::int8_t>(lat.num_sites())};
  is.read(reinterpret_cast<char*>(config.spins.data()), lat.num_sites());
  if (!is) throw std::runtime_error("spins binary: truncated");
  return config;
}

}  // namespace rfim
