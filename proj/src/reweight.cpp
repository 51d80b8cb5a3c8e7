#include "rfim/reweight.hpp"

#include <algorithm>
#include <cmath>

#include "rfim/stats.hpp"

namespace rfim {

ReweightContext ReweightContext::from_archive(const SampleArchive& archive,
                                              const DisorderField& disorder, double beta,
                                              double h) {
  ReweightContext ctx;
  const int n = archive.size();
  const int sites = archive.num_sites;
  ctx.log_w_.resize(n);
  const double scale = beta * h / std::sqrt(static_cast<double>(sites));
  const double* j = disorder.values.data();
  for (int t = 0; t < n; ++t) {
    const std::int8_t* s = archive.row(t);
    double dot = 0.0;
    for (int i = 0; i < sites; ++i) dot += j[i] * s[i];
    ctx.log_w_[t] = scale * dot;
  }
  double max_l = -1e300;
  for (double l : ctx.log_w_) max_l = std::max(max_l, l);
  ctx.weight_.resize(n);
  ctx.cdf_.resize(n);
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < n; ++t) {
    const double w = std::exp(ctx.log_w_[t] - max_l);
    ctx.weight_[t] = w;
    sum += w;
    sum2 += w * w;
    ctx.cdf_[t] = sum;
  }
  ctx.sum_w_ = sum;
  ctx.ess_ = sum2 > 0.0 ? sum * sum / sum2 : 0.0;
  ctx.log_mean_exp_ = max_l + std::log(sum / n);
  ctx.mean_weight_ = std::exp(ctx.log_mean_exp_);
  // Batch-means error of the <e^L>_0 estimate, for the Jensen floor check.
  std::vector<double> expl(n);
  for (int t = 0; t < n; ++t) expl[t] = std::exp(ctx.log_w_[t]);
  ctx.mean_weight_se_ = batch_means_se(expl);
  return ctx;
}

double ReweightContext::expect(const std::function<double(int)>& f) const {
  double num = 0.0;
  for (int t = 0; t < size(); ++t) num += weight_[t] * f(t);
  return num / sum_w_;
}

double ReweightContext::expect(std::span<const double> f) const {
  double num = 0.0;
  for (int t = 0; t < size(); ++t) num += weight_[t] * f[t];
  return num / sum_w_;
}

int ReweightContext::draw(RngStream& rng) const {
  const double u = rng.next_unit() * sum_w_;
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<int>(std::min<std::ptrdiff_t>(it - cdf_.begin(), size() - 1));
}

double reweighted_expectation(const SampleArchive& archive, const DisorderField& disorder,
                              double beta, double h, const std::function<double(int)>& observable,
                              double ess_floor) {
  const ReweightContext ctx = ReweightContext::from_archive(archive, disorder, beta, h);
  if (ctx.ess() < ess_floor)
    throw ReweightBreakdown("reweighted_expectation: effective sample size " +
                            std::to_string(ctx.ess()) + " below floor " +
                            std::to_string(ess_floor));
  return ctx.expect(observable);
}

}  // namespace rfim
