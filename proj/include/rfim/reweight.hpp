// Importance reweighting of zero-field samples into field-model quenched
// expectations: <f>_h = <f e^L>_0 / <e^L>_0 with L the field log-weight. The
// |B_n|^{-1/2} field scaling keeps Var(L) = O(beta^2 h^2), so the weights stay
// well conditioned at fixed h.
#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfim/disorder.hpp"
#include "rfim/rng.hpp"
#include "rfim/sample_archive.hpp"

namespace rfim {

struct ReweightBreakdown : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ReweightContext {
 public:
  static ReweightContext from_archive(const SampleArchive& archive, const DisorderField& disorder,
                                      double beta, double h);

  int size() const { return static_cast<int>(weight_.size()); }
  double ess() const { return ess_; }
  double log_mean_exp() const { return log_mean_exp_; }  // log <e^L>_0
  double mean_weight() const { return mean_weight_; }    // <e^L>_0
  double mean_weight_se() const { return mean_weight_se_; }
  double log_weight(int t) const { return log_w_[t]; }
  std::span<const double> weights() const { return weight_; }  // exp(L - max L)

  double expect(const std::function<double(int)>& f) const;
  double expect(std::span<const double> f) const;

  // Draw a sample index from the weight-proportional law.
  int draw(RngStream& rng) const;

 private:
  std::vector<double> log_w_, weight_, cdf_;
  double sum_w_ = 0, ess_ = 0, log_mean_exp_ = 0, mean_weight_ = 0, mean_weight_se_ = 0;
};

// Ratio estimator over the stream; throws ReweightBreakdown when the effective
// sample size falls below ess_floor (absolute count).
double reweighted_expectation(const SampleArchive& archive, const DisorderField& disorder,
                              double beta, double h, const std::function<double(int)>& observable,
                              double ess_floor = 0.0);

}  // namespace rfim
