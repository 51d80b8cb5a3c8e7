// Small statistics toolkit: running moments, batch-means errors, histograms,
// total variation, Kolmogorov-Smirnov distances, percentile bootstrap and
// Gauss-Hermite quadrature for the tanh reference laws.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rfim/rng.hpp"

namespace rfim {

struct MeanVar {
  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double var() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double se() const;
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;
};

// Standard error of the mean of a correlated series via batch means.
double batch_means_se(std::span<const double> series, int batches = 32);

struct Histogram {
  Histogram(double lo, double hi, int bins);
  void add(double x, double weight = 1.0);
  std::vector<double> probs() const;
  double lo = 0, hi = 0;
  double total = 0;
  std::vector<double> counts;
  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

// 0.5 * sum |p_b - q_b| over aligned bins.
double tv_distance(std::span<const double> p, std::span<const double> q);

// sup_x |F_emp(x) - F(x)| for an i.i.d.-style sample against a reference CDF.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// KS distance between two weightings of the same support points.
double ks_two_weightings(std::span<const double> values, std::span<const double> weight_a,
                         std::span<const double> weight_b);

struct BootstrapCI {
  double lo = 0, hi = 0;
};

// Percentile bootstrap of an arbitrary statistic of record indices.
BootstrapCI bootstrap_ci(int n, int replicates, double conf, RngStream& rng,
                         const std::function<double(std::span<const int>)>& statistic);

struct GaussHermite {
  static GaussHermite make(int points);
  // E[f(Z)] for standard Gaussian Z.
  double expect(const std::function<double(double)>& f) const;
  std::vector<double> nodes, weights;  // physicists' convention
};

double normal_cdf(double x);

// CDF of Y = q * tanh(a Z)^2, Z standard Gaussian (support [0, q)).
double tanh_sq_law_cdf(double y, double q, double a);

// Weighted mean and effective sample size helpers.
double weighted_mean(std::span<const double> values, std::span<const double> weights);
double effective_sample_size(std::span<const double> weights);

}  // namespace rfim
