#include "rfim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfim {

double MeanVar::se() const { return n > 1 ? std::sqrt(var() / n) : 0.0; }

double batch_means_se(std::span<const double> series, int batches) {
  const int n = static_cast<int>(series.size());
  if (n < 2 * batches) batches = std::max(2, n / 2);
  const int per = n / batches;
  if (per < 1) return 0.0;
  MeanVar mv;
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (int i = b * per; i < (b + 1) * per; ++i) s += series[i];
    mv.add(s / per);
  }
  return std::sqrt(mv.var() / batches);
}

Histogram::Histogram(double lo_, double hi_, int bins) : lo(lo_), hi(hi_), counts(bins, 0.0) {
  if (!(hi > lo) || bins < 1) throw std::invalid_argument("histogram: bad range");
}

void Histogram::add(double x, double weight) {
  int b = static_cast<int>((x - lo) / (hi - lo) * static_cast<double>(counts.size()));
  b = std::clamp(b, 0, static_cast<int>(counts.size()) - 1);
  counts[b] += weight;
  total += weight;
}

std::vector<double> Histogram::probs() const {
  std::vector<double> p(counts.size(), 0.0);
  if (total > 0)
    for (std::size_t i = 0; i < counts.size(); ++i) p[i] = counts[i] / total;
  return p;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return ks;
}

double ks_two_weightings(std::span<const double> values, std::span<const double> weight_a,
                         std::span<const double> weight_b) {
  const std::size_t n = values.size();
  if (weight_a.size() != n || weight_b.size() != n)
    throw std::invalid_argument("ks_two_weightings: size mismatch");
  std::vector<int> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  double ta = 0.0, tb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ta += weight_a[i];
    tb += weight_b[i];
  }
  if (ta <= 0.0 || tb <= 0.0) throw std::invalid_argument("ks_two_weightings: empty weights");
  double ca = 0.0, cb = 0.0, ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ca += weight_a[order[i]] / ta;
    cb += weight_b[order[i]] / tb;
    // Only evaluate at distinct value boundaries.
    if (i + 1 == n || values[order[i + 1]] > values[order[i]])
      ks = std::max(ks, std::abs(ca - cb));
  }
  return ks;
}

BootstrapCI bootstrap_ci(int n, int replicates, double conf, RngStream& rng,
                         const std::function<double(std::span<const int>)>& statistic) {
  std::vector<double> stats(replicates);
  std::vector<int> idx(n);
  for (int r = 0; r < replicates; ++r) {
    for (int i = 0; i < n; ++i) idx[i] = static_cast<int>(rng.next_below(n));
    stats[r] = statistic(idx);
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = (1.0 - conf) / 2.0;
  auto pick = [&](double q) {
    const double pos = q * (replicates - 1);
    const int i = static_cast<int>(pos);
    const double frac = pos - i;
    return i + 1 < replicates ? stats[i] * (1 - frac) + stats[i + 1] * frac : stats[i];
  };
  return {pick(alpha), pick(1.0 - alpha)};
}

GaussHermite GaussHermite::make(int points) {
  // Golub-Welsch via Newton iteration on the Hermite recurrence; physicists'
  // weight e^{-x^2}.
  GaussHermite gh;
  gh.nodes.resize(points);
  gh.weights.resize(points);
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  const int m = (points + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * points + 1.0) - 1.85575 * std::pow(2.0 * points + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(points, 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * gh.nodes[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * gh.nodes[1];
    else
      z = 2.0 * z - gh.nodes[i - 2];
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < points; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * points) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    gh.nodes[i] = z;
    gh.nodes[points - 1 - i] = -z;
    gh.weights[i] = 2.0 / (pp * pp);
    gh.weights[points - 1 - i] = gh.weights[i];
  }
  return gh;
}

double GaussHermite::expect(const std::function<double(double)>& f) const {
  // E[f(Z)] = pi^{-1/2} sum w_i f(sqrt(2) x_i)
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    sum += weights[i] * f(std::sqrt(2.0) * nodes[i]);
  return sum / std::sqrt(3.14159265358979323846);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double tanh_sq_law_cdf(double y, double q, double a) {
  if (y <= 0.0) return 0.0;
  if (y >= q) return 1.0;
  if (a == 0.0) return 1.0;  // point mass at 0
  const double t = std::atanh(std::sqrt(y / q));
  // P(|Z| <= t/a)
  return 2.0 * normal_cdf(t / std::abs(a)) - 1.0;
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    num += values[i] * weights[i];
    den += weights[i];
  }
  return num / den;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    s += w;
    s2 += w * w;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

}  // namespace rfim
