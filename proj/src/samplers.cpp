#include "rfim/samplers.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rfim {

UpdateKind parse_update_kind(const std::string& tag) {
  if (tag == "metropolis") return UpdateKind::Metropolis;
  if (tag == "cluster") return UpdateKind::Cluster;
  if (tag == "mixed") return UpdateKind::Mixed;
  throw std::invalid_argument("sampler: unknown update kind '" + tag + "'");
}

std::string to_string(UpdateKind kind) {
  switch (kind) {
    case UpdateKind::Metropolis: return "metropolis";
    case UpdateKind::Cluster: return "cluster";
    default: return "mixed";
  }
}

ChainState::ChainState(const Lattice& lat, const ModelParams& p, const DisorderField& dis,
                       std::uint64_t rng_key)
    : config(SpinConfig::all_plus(lat)), rng(rng_key), params(&p), disorder(&dis) {
  const int n = lat.num_sites();
  uf_parent.resize(n);
  uf_size.resize(n);
  pin.resize(n);
  color.resize(n);
  ghost_open_prob.resize(n);
  const double scale = 2.0 * p.beta * std::abs(p.h) / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    ghost_open_prob[i] = -std::expm1(-scale * std::abs(dis.values[i]));
}

double metropolis_acceptance(const ChainState& state, int site) {
  const double delta = flip_delta_energy(*state.params, *state.disorder, state.config, site);
  const double a = std::exp(-state.params->beta * delta);
  return a < 1.0 ? a : 1.0;
}

void metropolis_sweep(ChainState& state) {
  const Lattice& lat = *state.config.lattice;
  const ModelParams& p = *state.params;
  const double sign = p.interaction == Interaction::Ferro ? -1.0 : 1.0;
  const double field_scale = p.h / std::sqrt(static_cast<double>(lat.num_sites()));
  for (int i = 0; i < lat.num_sites(); ++i) {
    int nbr = 0;
    for (int j : lat.neighbors(i)) nbr += state.config.spins[j];
    const double s = state.config.spins[i];
    const double delta = -2.0 * sign * s * nbr + 2.0 * field_scale * state.disorder->values[i] * s;
    if (state.rng.next_unit() < std::exp(-p.beta * delta))
      state.config.spins[i] = static_cast<std::int8_t>(-state.config.spins[i]);
  }
  ++state.sweep_count;
}

namespace {
// Local union-find on the chain scratch arrays (no allocation).
inline int uf_find(std::vector<int>& parent, int x) {
  int root = x;
  while (parent[root] != root) root = parent[root];
  while (parent[x] != root) {
    int next = parent[x];
    parent[x] = root;
    x = next;
  }
  return root;
}

inline void uf_unite(std::vector<int>& parent, std::vector<int>& size, int a, int b) {
  a = uf_find(parent, a);
  b = uf_find(parent, b);
  if (a == b) return;
  if (size[a] < size[b]) std::swap(a, b);
  parent[b] = a;
  size[a] += size[b];
}
}  // namespace

void cluster_update(ChainState& state) {
  const ModelParams& p = *state.params;
  if (p.interaction != Interaction::Ferro)
    throw std::invalid_argument(
        "cluster_update: antiferro parameters require the gauge wrapper (run_chain)");
  const Lattice& lat = *state.config.lattice;
  const int n = lat.num_sites();
  auto& parent = state.uf_parent;
  auto& size = state.uf_size;
  auto& spins = state.config.spins;

  for (int i = 0; i < n; ++i) {
    parent[i] = i;
    size[i] = 1;
    state.pin[i] = 0;
  }
  const double p_bond = 1.0 - std::exp(-2.0 * p.beta);
  for (int e = 0; e < lat.num_edges(); ++e) {
    const int u = lat.edge_u(e), v = lat.edge_v(e);
    if (spins[u] == spins[v] && state.rng.next_unit() < p_bond)
      uf_unite(parent, size, u, v);
  }

  // Ghost bonds in the ghost=+1 frame: site i may pin its cluster to
  // sign(h J_i) when the current spin already agrees.
  if (p.h != 0.0) {
    for (int i = 0; i < n; ++i) {
      const double hj = p.h * state.disorder->values[i];
      if (hj == 0.0) continue;
      const std::int8_t want = hj > 0.0 ? 1 : -1;
      if (spins[i] == want && state.rng.next_unit() < state.ghost_open_prob[i]) {
        const int r = uf_find(parent, i);
        assert(state.pin[r] == 0 || state.pin[r] == want);
        state.pin[r] = want;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (uf_find(parent, i) == i)
      state.color[i] = state.pin[i] != 0 ? state.pin[i] : (state.rng.next_bool() ? 1 : -1);
  }
  for (int i = 0; i < n; ++i) spins[i] = state.color[uf_find(parent, i)];

  // Global spin-flip Metropolis step. Ghost pins freeze the majority cluster's
  // sign (the no-pin probability decays like e^{-c beta h sqrt(n)}), so the
  // pure cluster move alone cannot cross between the two magnetization wells;
  // the flip has acceptance e^{-2 L(s)} and restores that mixing.
  if (p.h != 0.0) {
    const double l = field_log_weight(state.config, *state.disorder, p.beta, p.h);
    if (state.rng.next_unit() < std::exp(-2.0 * l)) {
      for (int i = 0; i < n; ++i) spins[i] = static_cast<std::int8_t>(-spins[i]);
    }
  }
  ++state.sweep_count;
}

namespace {
void apply_update(ChainState& state, UpdateKind kind) {
  switch (kind) {
    case UpdateKind::Metropolis:
      metropolis_sweep(state);
      break;
    case UpdateKind::Cluster:
      cluster_update(state);
      break;
    case UpdateKind::Mixed:
      cluster_update(state);
      metropolis_sweep(state);
      break;
  }
}
}  // namespace

void run_chain_callback(const Lattice& lat, const ModelParams& params,
                        const DisorderField& disorder, const SampleSchedule& schedule,
                        std::uint64_t seed, const std::function<void(const SpinConfig&)>& sink) {
  if (!(params.beta > 0.0)) throw std::invalid_argument("run_chain: beta must be > 0");
  if (schedule.thinning < 1) throw std::invalid_argument("run_chain: thinning must be >= 1");
  if (schedule.burn_in_sweeps < 0 || schedule.samples < 0)
    throw std::invalid_argument("run_chain: counts must be >= 0");

  const bool gauge_wrap = params.interaction == Interaction::Antiferro &&
                          schedule.update_kind != UpdateKind::Metropolis;
  ModelParams run_params = params;
  DisorderField flipped;
  const DisorderField* run_disorder = &disorder;
  if (gauge_wrap) {
    run_params.interaction = Interaction::Ferro;
    flipped = gauge_flip_field(disorder);
    run_disorder = &flipped;
  }

  ChainState state(lat, run_params, *run_disorder, derive_key(seed, {rng_tag::kChain}));
  for (int i = 0; i < schedule.burn_in_sweeps; ++i) apply_update(state, schedule.update_kind);
  for (int s = 0; s < schedule.samples; ++s) {
    for (int t = 0; t < schedule.thinning; ++t) apply_update(state, schedule.update_kind);
    if (gauge_wrap) {
      SpinConfig mapped = gauge_map(state.config);
      sink(mapped);
    } else {
      sink(state.config);
    }
  }
}

SampleArchive run_chain(const Lattice& lat, const ModelParams& params,
                        const DisorderField& disorder, const SampleSchedule& schedule,
                        std::uint64_t seed) {
  SampleArchive archive;
  archive.init(lat, schedule.samples);
  run_chain_callback(lat, params, disorder, schedule, seed,
                     [&](const SpinConfig& c) { archive.append(c, lat); });
  return archive;
}

}  // namespace rfim
