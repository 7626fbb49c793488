#pragma once

#include <functional>
#include <utility>

#include "abc/parallel.hpp"
#include "abc/rng.hpp"
#include "abc/types.hpp"

namespace abc {

// Prior + forward simulator + summary map. Implementations must be pure
// given (theta, stream): identical seeds yield identical outputs, and
// const methods are safe to call concurrently.
class SimulatorModel {
 public:
  virtual ~SimulatorModel() = default;

  virtual std::string id() const = 0;
  virtual int param_dim() const = 0;
  virtual int summary_dim() const = 0;

  virtual Vector sample_prior(RngStream& rng) const = 0;
  // Log prior density, possibly unnormalized; -inf outside the support.
  virtual double prior_logdensity(const Vector& theta) const = 0;
  // Throws SimulationError for invalid parameter regions.
  virtual Vector simulate_summaries(const Vector& theta,
                                    RngStream& rng) const = 0;

  // Summary columns informative for parameter j / the pair (i, j).
  // Defaults: every column; pairs concatenate the two marginal selections.
  virtual SummarySelection marginal_selection(int j) const;
  virtual SummarySelection pair_selection(int i, int j) const;

  // Uniform box for pilot sweeps; models without a natural box throw.
  virtual std::pair<Vector, Vector> pilot_box() const;
};

using ProposalSampler = std::function<Vector(RngStream&)>;

inline constexpr int kSimulationRetryCap = 16;

// Draw n particles theta ~ prior (or the supplied proposal), s = S(theta).
// Each particle uses its own sub-stream; a simulator failure retries that
// particle with a fresh sub-stream up to kSimulationRetryCap attempts.
ParticleSet generate_particles(const SimulatorModel& model, std::int64_t n,
                               const RngStream& rng, Exec policy = Exec::Par);
ParticleSet generate_particles(const SimulatorModel& model, std::int64_t n,
                               const RngStream& rng,
                               const ProposalSampler& proposal,
                               Exec policy = Exec::Par);

}  // namespace abc
