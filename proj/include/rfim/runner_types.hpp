#pragma once

#include <cstdint>
#include <string>

#include "rfim/disorder.hpp"
#include "rfim/estimators.hpp"
#include "rfim/spin.hpp"

namespace rfim {

struct QhatResolved {
  double value = 0.0;
  std::string provenance;
};

struct SweepSpec {
  int n = 0;
  double beta = 0.0;
  double h = 0.0;
  DisorderKind kind = DisorderKind::Gaussian;
  Interaction interaction = Interaction::Ferro;
  int realizations = 0;
  std::uint64_t master_seed = 1;
  EstimatorBudgets budgets;
  double q_hat = 0.0;
  std::string q_hat_provenance;
  int workers = 1;
};

}  // namespace rfim
