#include "rfim/sample_archive.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rfim {

namespace {
constexpr char kMagic[4] = {'R', 'F', 'S', 'P'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void SampleArchive::init(const Lattice& lat, int reserve_samples) {
  dim = lat.dim();
  radius = lat.radius();
  num_sites = lat.num_sites();
  words = (num_sites + 63) / 64;
  if (reserve_samples > 0) {
    spins.reserve(static_cast<std::size_t>(reserve_samples) * num_sites);
    packed.reserve(static_cast<std::size_t>(reserve_samples) * words);
    mag.reserve(reserve_samples);
    stag_mag.reserve(reserve_samples);
  }
}

void SampleArchive::append(const SpinConfig& config, const Lattice& lat) {
  const std::size_t base = packed.size();
  packed.resize(base + words, 0);
  long msum = 0, ssum = 0;
  for (int i = 0; i < num_sites; ++i) {
    const std::int8_t s = config.spins[i];
    spins.push_back(s);
    if (s > 0) packed[base + i / 64] |= (1ULL << (i % 64));
    msum += s;
    ssum += s * lat.parity(i);
  }
  mag.push_back(static_cast<double>(msum) / num_sites);
  stag_mag.push_back(static_cast<double>(ssum) / num_sites);
}

double SampleArchive::lag1_autocorr_m2() const {
  const int n = size();
  if (n < 3) return 0.0;
  double mean = 0.0;
  for (double m : mag) mean += m * m;
  mean /= n;
  double var = 0.0, cov = 0.0;
  for (int t = 0; t < n; ++t) {
    const double x = mag[t] * mag[t] - mean;
    var += x * x;
    if (t + 1 < n) cov += x * (mag[t + 1] * mag[t + 1] - mean);
  }
  if (var <= 0.0) return 0.0;
  return cov / var;
}

void SampleArchive::save(const std::string& path, const std::string& sidecar_json) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("spool: cannot open " + path);
  os.write(kMagic, 4);
  std::uint32_t ver = kVersion;
  std::int32_t d = dim, n = radius, sites = num_sites, w = words, count = size();
  os.write(reinterpret_cast<const char*>(&ver), 4);
  os.write(reinterpret_cast<const char*>(&d), 4);
  os.write(reinterpret_cast<const char*>(&n), 4);
  os.write(reinterpret_cast<const char*>(&sites), 4);
  os.write(reinterpret_cast<const char*>(&w), 4);
  os.write(reinterpret_cast<const char*>(&count), 4);
  os.write(reinterpret_cast<const char*>(packed.data()),
           static_cast<std::streamsize>(packed.size() * sizeof(std::uint64_t)));
  if (!os) throw std::runtime_error("spool: write failed for " + path);
  if (!sidecar_json.empty()) {
    std::ofstream meta(path + ".json");
    meta << sidecar_json;
  }
}

SampleArchive SampleArchive::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("spool: cannot open " + path);
  char magic[4];
  std::uint32_t ver = 0;
  std::int32_t d = 0, n = 0, sites = 0, w = 0, count = 0;
  is.read(magic, 4);
  is.read(reinterpret_cast<char*>(&ver), 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0 || ver != kVersion)
    throw std::runtime_error("spool: bad header in " + path);
  is.read(reinterpret_cast<char*>(&d), 4);
  is.read(reinterpret_cast<char*>(&n), 4);
  is.read(reinterpret_cast<char*>(&sites), 4);
  is.read(reinterpret_cast<char*>(&w), 4);
  is.read(reinterpret_cast<char*>(&count), 4);

  SampleArchive ar;
  ar.dim = d;
  ar.radius = n;
  ar.num_sites = sites;
  ar.words = w;
  ar.packed.resize(static_cast<std::size_t>(count) * w);
  is.read(reinterpret_cast<char*>(ar.packed.data()),
          static_cast<std::streamsize>(ar.packed.size() * sizeof(std::uint64_t)));
  if (!is) throw std::runtime_error("spool: truncated " + path);

  const Lattice lat = Lattice::build(d, n);
  ar.spins.resize(static_cast<std::size_t>(count) * sites);
  ar.mag.reserve(count);
  ar.stag_mag.reserve(count);
  for (int t = 0; t < count; ++t) {
    long msum = 0, ssum = 0;
    const std::uint64_t* row = ar.packed.data() + static_cast<std::size_t>(t) * w;
    for (int i = 0; i < sites; ++i) {
      const std::int8_t s = (row[i / 64] >> (i % 64)) & 1 ? 1 : -1;
      ar.spins[static_cast<std::size_t>(t) * sites + i] = s;
      msum += s;
      ssum += s * lat.parity(i);
    }
    ar.mag.push_back(static_cast<double>(msum) / sites);
    ar.stag_mag.push_back(static_cast<double>(ssum) / sites);
  }
  return ar;
}

}  // namespace rfim
