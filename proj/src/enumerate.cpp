#include "rfim/enumerate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rfim {

namespace {

// Walks all 2^S states in Gray-code order, maintaining spins, energy and the
// spin sum incrementally, and hands (weightless) state + energy to the visitor.
template <typename Visitor>
void walk_states(const ModelParams& params, const DisorderField& disorder, Visitor&& visit) {
  const Lattice& lat = *disorder.lattice;
  const int S = lat.num_sites();
  if (S > kEnumerationSiteCap)
    throw std::invalid_argument("exact_enumerate: lattice exceeds the 20-site cap");

  SpinConfig config{&lat, std::vector<std::int8_t>(S, -1)};
  const double sign = params.interaction == Interaction::Ferro ? -1.0 : 1.0;
  const double field_scale = params.h / std::sqrt(static_cast<double>(S));

  // Energy of the all-minus state.
  double e = 0.0;
  for (int ed = 0; ed < lat.num_edges(); ++ed) e += sign;
  for (int i = 0; i < S; ++i) e += field_scale * disorder.values[i];
  long spin_sum = -S;

  const std::uint64_t total = 1ULL << S;
  visit(config, e, spin_sum);
  for (std::uint64_t g = 1; g < total; ++g) {
    const int i = std::countr_zero(g);  // Gray code: flip the lowest set bit position
    const double s = config.spins[i];
    int nbr = 0;
    for (int j : lat.neighbors(i)) nbr += config.spins[j];
    e += -2.0 * sign * s * nbr + 2.0 * field_scale * disorder.values[i] * s;
    config.spins[i] = static_cast<std::int8_t>(-config.spins[i]);
    spin_sum += 2 * config.spins[i];
    visit(config, e, spin_sum);
  }
}

}  // namespace

EnumerationResult exact_enumerate(const ModelParams& params, const DisorderField& disorder,
                                  const EnumerationOptions& options) {
  const Lattice& lat = *disorder.lattice;
  const int S = lat.num_sites();
  EnumerationResult res;
  res.num_sites = S;

  // Pass 1: find max of -beta*H for stable exponentials.
  double max_arg = -1e300;
  walk_states(params, disorder, [&](const SpinConfig&, double e, long) {
    max_arg = std::max(max_arg, -params.beta * e);
  });

  res.site_mean.assign(S, 0.0);
  if (options.pair_means) res.pair_mean.assign(static_cast<std::size_t>(S) * S, 0.0);
  std::map<double, double> energy_mass;

  double zsum = 0.0;
  walk_states(params, disorder, [&](const SpinConfig& c, double e, long spin_sum) {
    const double w = std::exp(-params.beta * e - max_arg);
    zsum += w;
    const double m = static_cast<double>(spin_sum) / S;
    res.m_mean += w * m;
    res.m_abs_mean += w * std::abs(m);
    res.m2_mean += w * m * m;
    res.m4_mean += w * m * m * m * m;
    for (int i = 0; i < S; ++i) res.site_mean[i] += w * c.spins[i];
    if (options.pair_means) {
      for (int i = 0; i < S; ++i) {
        const double si = c.spins[i];
        double* row = res.pair_mean.data() + static_cast<std::size_t>(i) * S;
        for (int j = i; j < S; ++j) row[j] += w * si * c.spins[j];
      }
    }
    if (options.energy_distribution) energy_mass[e] += w;
  });

  res.log_z = max_arg + std::log(zsum);
  const double inv_z = 1.0 / zsum;
  res.m_mean *= inv_z;
  res.m_abs_mean *= inv_z;
  res.m2_mean *= inv_z;
  res.m4_mean *= inv_z;
  for (double& v : res.site_mean) v *= inv_z;
  if (options.pair_means) {
    for (int i = 0; i < S; ++i)
      for (int j = i; j < S; ++j) {
        const double v = res.pair_mean[static_cast<std::size_t>(i) * S + j] * inv_z;
        res.pair_mean[static_cast<std::size_t>(i) * S + j] = v;
        res.pair_mean[static_cast<std::size_t>(j) * S + i] = v;
      }
  }
  if (options.energy_distribution) {
    res.energy_dist.reserve(energy_mass.size());
    for (const auto& [e, w] : energy_mass) res.energy_dist.emplace_back(e, w * inv_z);
  }
  return res;
}

double EnumerationResult::overlap_mean() const {
  double sum = 0.0;
  for (double s : site_mean) sum += s * s;
  return sum / num_sites;
}

double EnumerationResult::overlap2_mean() const {
  if (pair_mean.empty()) throw std::logic_error("overlap2_mean: pair means not computed");
  double sum = 0.0;
  for (double p : pair_mean) sum += p * p;
  return sum / (static_cast<double>(num_sites) * num_sites);
}

double EnumerationResult::overlap12_13_mean() const {
  if (pair_mean.empty()) throw std::logic_error("overlap12_13_mean: pair means not computed");
  double sum = 0.0;
  for (int i = 0; i < num_sites; ++i)
    for (int j = 0; j < num_sites; ++j)
      sum += pair_mean[static_cast<std::size_t>(i) * num_sites + j] * site_mean[i] * site_mean[j];
  return sum / (static_cast<double>(num_sites) * num_sites);
}

double exact_expectation(const ModelParams& params, const DisorderField& disorder,
                         const std::function<double(const SpinConfig&)>& f) {
  double max_arg = -1e300;
  walk_states(params, disorder, [&](const SpinConfig&, double e, long) {
    max_arg = std::max(max_arg, -params.beta * e);
  });
  double zsum = 0.0, fsum = 0.0;
  walk_states(params, disorder, [&](const SpinConfig& c, double e, long) {
    const double w = std::exp(-params.beta * e - max_arg);
    zsum += w;
    fsum += w * f(c);
  });
  return fsum / zsum;
}

}  // namespace rfim
