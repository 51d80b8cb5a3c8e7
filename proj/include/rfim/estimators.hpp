// Quenched and disorder-averaged statistics: per-disorder records computed by
// reweighting a shared zero-field sample stream, and the sweep-level
// aggregates for every theorem-level prediction.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfim/disorder.hpp"
#include "rfim/lattice.hpp"
#include "rfim/reweight.hpp"
#include "rfim/sample_archive.hpp"
#include "rfim/stats.hpp"

namespace rfim {

struct EstimatorBudgets {
  int triples = 1000;       // replica triples per disorder
  int site_tuples = 10000;  // site tuples per disorder (moment residuals)
  int pairs = 2000;         // pair budget, correlation uniformity
  int quads = 2000;         // quadruple budget, correlation uniformity
  int sites = 10000;        // per-site mean budget
  int ks_pairs = 512;       // uniform pairs for the quenched-vs-Ising KS
  int pure_state_lmax = 4;
  double ess_floor = 16.0;  // absolute effective-sample-size floor
  double ultra_eps = 0.1;   // slack in the ultrametric inequality
  int stored_triples = 64;  // triples kept for plot output
};

inline constexpr int kOverlapHistBins = 80;  // on [-1, 1]

struct QuenchedRecord {
  int disorder_index = -1;
  std::uint64_t disorder_seed = 0;
  bool valid = false;
  std::string error;

  double field_sum = 0;  // sqrt(q_hat) beta h sum J / sqrt|B_n|
  double ess = 0;
  double log_mgf = 0;          // log <e^L>_0
  double mean_weight = 1;      // <e^L>_0
  double mean_weight_se = 0;
  bool jensen_ok = true;       // mean_weight >= 1 - 3 se

  // Physical magnetization statistics (staggered column under the antiferro
  // gauge wrapper).
  double m_mean = 0, m_abs_mean = 0, m2_mean = 0;
  double msq_dev = 0;          // <(m^2 - q_hat)^2>
  double site_uniformity = 0;  // mean_j (<s_j> - <m>)^2 over the site budget
  double plus_state_weight = 0;  // quenched P(m > 0)

  // Overlap statistics.
  double r_mean = 0;         // exact all-pairs estimator via site means
  double r_mean_budget = 0;  // triple-budget cross-check
  double r2_mean = 0;
  double r4c_mean = 0;  // <(R^2 - q_hat^2)^2>
  double rr13_mean = 0; // <R_12 R_13>
  double r_mm_dev = 0;  // <(R_12 - m^1 m^2)^2>

  double ultra_violation_rate = 0;
  double mass_qqq = 0;                  // mass near (q,q,q)
  std::array<double, 3> mass_mixed{};   // near (-q,-q,q), (-q,q,-q), (q,-q,-q)
  double mass_unclassified = 0;
  double class_window = 0;              // delta used for classification
  double mass_pos = 0;                  // pair mass near +q_hat
  double sign_agreement = 1;            // overlap- vs magnetization-sign classification

  long overlap_draws = 0;
  long overlap_near_pm = 0;  // |R -+ q_hat| <= 0.05
  std::array<double, kOverlapHistBins> overlap_hist{};

  double ks_vs_zero_field = 0;  // weighted vs unweighted law on common pairs
  double quenched_r_var = 0;    // <R^2> - <R>^2

  std::vector<double> pure_state_residual;  // index l-1, l = 1..lmax
  std::vector<std::array<float, 3>> stored_triples;
};

struct DisorderSweep {
  int d = 2, n = 0;
  double beta = 0, h = 0;
  DisorderKind kind = DisorderKind::Gaussian;
  Interaction interaction = Interaction::Ferro;
  double q_hat = 0;
  std::string q_hat_provenance;
  std::vector<QuenchedRecord> records;

  std::vector<const QuenchedRecord*> valid_records() const;
};

struct RecordParams {
  double beta = 0;
  double h = 0;         // physical field (enters field_sum and predictions)
  double weight_h = 0;  // field used for the importance weights; 0 for
                        // archives sampled directly at the target parameters
  double q_hat = 0;
  bool staggered_m = false;      // antiferro via gauge wrapper: physical m is the
                                 // staggered column of the ferro-frame archive
  bool staggered_frame = false;  // archive holds physical antiferro samples: the
                                 // overlap-factorization frame is staggered
};

QuenchedRecord compute_quenched_record(const Lattice& lat, const SampleArchive& archive,
                                       const DisorderField& field, const RecordParams& params,
                                       const EstimatorBudgets& budgets,
                                       std::uint64_t estimator_key);

// ---- sweep-level aggregates ----

struct RsbStats {
  double concentration = 0, concentration_se = 0;  // E<(R^2-q^2)^2>
  double frac_near_pm = 0;                         // pooled overlap mass near +-q_hat
  double mean_mass_pos = 0;                        // mean per-disorder mass near +q_hat
  std::array<double, kOverlapHistBins> pooled_hist{};
  long pooled_draws = 0;
};
RsbStats rsb_stats(const DisorderSweep& sweep);

struct NsaStats {
  double residual_sq_mean = 0, residual_sq_se = 0;  // E(<R> - q tanh^2 X)^2
  double ks_distance = 0;
  double mass_consistency = 0;  // mean |mass_pos - (1+tanh^2 X)/2|
};
NsaStats nsa_stats(const DisorderSweep& sweep, int min_disorders = 200);

struct UltraStats {
  double violation_rate = 0;
  double mass_dev_mean = 0, mass_dev_max = 0;  // per-disorder max dev vs a(X), b(X)
  double frac_disorders_within = 0;            // fraction with max dev <= tol
  double mass_dev_tol = 0.05;
};
UltraStats ultrametric_stats(const DisorderSweep& sweep, double mass_tol = 0.05);

struct GgResult {
  double statistic = 0;
  double ci_lo = 0, ci_hi = 0;
  double predicted = 0;
};
GgResult gg_residual(const DisorderSweep& sweep, const GaussHermite& gh, int bootstrap_reps,
                     std::uint64_t bootstrap_seed, int min_disorders = 200);

struct MagStats {
  double msq_dev_mean = 0, msq_dev_se = 0;            // E<(m^2-q)^2>
  double pred_residual_mean = 0, pred_residual_se = 0;  // E(<m> - sqrt(q) tanh X)^2
  double site_uniformity_mean = 0, site_uniformity_se = 0;
  double r_mm_dev_mean = 0, r_mm_dev_se = 0;          // E<(R - m1 m2)^2>
};
MagStats magnetization_stats(const DisorderSweep& sweep);

struct PureStateStats {
  std::vector<double> residual_mean;  // per l
  double mixture_diag = 0;            // mean |P(m>0) - (1+tanh X)/2|
};
PureStateStats pure_state_moment_test(const DisorderSweep& sweep, int l_max);

struct FreeEnergyVarStats {
  double var = 0, var_se = 0;
  double bound = 0;
  bool bound_applicable = true;
};
FreeEnergyVarStats free_energy_variance(const DisorderSweep& sweep);

struct OverlapFluctuationStats {
  double value = 0, se = 0;
  double bound = 0;  // 2^{3/2} / (beta |h|)
};
OverlapFluctuationStats overlap_fluctuation(const DisorderSweep& sweep);

struct SmallHCollapse {
  double mean_ks = 0, se = 0;
};
SmallHCollapse small_h_collapse(const DisorderSweep& sweep);

// Agreement between triple-support classification from overlaps and from
// magnetization signs (the factorization-transfer invariant).
double factorization_transfer(const DisorderSweep& sweep);

// ---- zero-field stream statistics ----

struct CorrelationUniformity {
  double delta_hat = 0;   // max |<s_i s_j> - q_hat| over sampled admissible pairs
  double gamma_hat = 0;   // max |<s_i s_j s_k s_l> - q_hat^2| over sampled quads
  double delta_mean = 0, gamma_mean = 0;
  double pair_se = 0, quad_se = 0;
  int pairs_used = 0, quads_used = 0;
  double even_l2_residual = 0;  // mean |<s_i s_j> - q_hat| over unwindowed tuples
  double even_l4_residual = 0;
};
CorrelationUniformity correlation_uniformity(const Lattice& lat, const SampleArchive& archive,
                                             double q_hat, double eps,
                                             const EstimatorBudgets& budgets, std::uint64_t key);

struct MgfGapReport {
  double empirical_mean = 0, empirical_se = 0;
  double reference = 0;       // exp(sum a^2 / 2 |B_n|)
  double empirical_gap = 0;
  double exact_gap = 0;       // |population MGF - reference|, exact per distribution
  double bound_candidate = 0; // sum |a|^3 / |B_n|^{3/2}
  double c_used = 0;
  bool violates = false;      // exact_gap > C * bound
};
MgfGapReport mgf_gap(const Lattice& lat, std::span<const double> coefficients, DisorderKind kind,
                     int n_draws, std::uint64_t seed, double c, double theta = 4.0);

}  // namespace rfim
