// Exact expectations by full summation over all 2^{|B_n|} configurations with
// log-sum-exp stabilization. Capped at 20 sites; this is the oracle every
// sampler is checked against.
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "rfim/disorder.hpp"
#include "rfim/lattice.hpp"
#include "rfim/spin.hpp"

namespace rfim {

inline constexpr int kEnumerationSiteCap = 20;

struct EnumerationOptions {
  bool pair_means = false;          // fill the |B_n| x |B_n| matrix of <s_i s_j>
  bool energy_distribution = false; // exact law of H over configurations
};

struct EnumerationResult {
  int num_sites = 0;
  double log_z = 0.0;  // log sum_s e^{-beta H(s)}
  std::vector<double> site_mean;                    // <s_i>
  std::vector<double> pair_mean;                    // row-major, optional
  double m_mean = 0, m_abs_mean = 0, m2_mean = 0, m4_mean = 0;
  std::vector<std::pair<double, double>> energy_dist;  // (energy, probability), ascending

  double pair(int i, int j) const { return pair_mean[static_cast<std::size_t>(i) * num_sites + j]; }

  // Two-replica overlap moments from the one/two-point functions.
  double overlap_mean() const;    // <R_12>   = sum_i <s_i>^2 / N
  double overlap2_mean() const;   // <R_12^2> = sum_ij <s_i s_j>^2 / N^2   (needs pair_means)
  double overlap12_13_mean() const;  // <R_12 R_13> = sum_ij <s_i s_j><s_i><s_j> / N^2
};

EnumerationResult exact_enumerate(const ModelParams& params, const DisorderField& disorder,
                                  const EnumerationOptions& options = {});

// Exact <f> for an arbitrary observable (one extra pass over all states).
double exact_expectation(const ModelParams& params, const DisorderField& disorder,
                         const std::function<double(const SpinConfig&)>& f);

}  // namespace rfim
