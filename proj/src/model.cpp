#include "abc/model.hpp"

#include <atomic>
#include <string>

namespace abc {

SummarySelection SimulatorModel::marginal_selection(int j) const {
  (void)j;
  return SummarySelection::all(summary_dim());
}

SummarySelection SimulatorModel::pair_selection(int i, int j) const {
  return SummarySelection::concat(marginal_selection(i), marginal_selection(j));
}

std::pair<Vector, Vector> SimulatorModel::pilot_box() const {
  throw ConfigError("model '" + id() + "' does not define a pilot box");
}

namespace {

ParticleSet generate_impl(const SimulatorModel& model, std::int64_t n,
                          const RngStream& rng, const ProposalSampler* proposal,
                          Exec policy) {
  if (n < 1) throw DimensionError("generate_particles: n must be >= 1");
  const int p = model.param_dim();
  const int q = model.summary_dim();

  Matrix thetas(n, p);
  Matrix summaries(n, q);
  Vector weights = Vector::Ones(n);

  // First failing index wins so the reported error does not depend on the
  // thread schedule.
  std::atomic<std::int64_t> failed_at{n};

  parallel_for(
      n,
      [&](std::int64_t i) {
        const RngStream particle_root = child_stream(rng, static_cast<std::uint64_t>(i));
        for (int attempt = 0; attempt < kSimulationRetryCap; ++attempt) {
          RngStream attempt_rng =
              child_stream(particle_root, static_cast<std::uint64_t>(attempt));
          try {
            Vector theta = proposal != nullptr ? (*proposal)(attempt_rng)
                                               : model.sample_prior(attempt_rng);
            Vector s = model.simulate_summaries(theta, attempt_rng);
            if (theta.size() != p || s.size() != q) {
              throw SimulationError("model '" + model.id() +
                                    "' returned a wrong-sized draw");
            }
            if (!theta.allFinite() || !s.allFinite()) {
              throw SimulationError("non-finite simulator output");
            }
            thetas.row(i) = theta.transpose();
            summaries.row(i) = s.transpose();
            return;
          } catch (const SimulationError&) {
            continue;
          }
        }
        std::int64_t expected = failed_at.load();
        while (i < expected && !failed_at.compare_exchange_weak(expected, i)) {
        }
      },
      policy);

  if (failed_at.load() < n) {
    throw SimulationError(
        "particle " + std::to_string(failed_at.load()) + " failed " +
        std::to_string(kSimulationRetryCap) + " simulation attempts");
  }

  ParticleMeta meta;
  meta.model_id = model.id();
  meta.seed = rng.seed();
  return ParticleSet(std::move(thetas), std::move(summaries),
                     std::move(weights), std::move(meta));
}

}  // namespace

ParticleSet generate_particles(const SimulatorModel& model, std::int64_t n,
                               const RngStream& rng, Exec policy) {
  return generate_impl(model, n, rng, nullptr, policy);
}

ParticleSet generate_particles(const SimulatorModel& model, std::int64_t n,
                               const RngStream& rng,
                               const ProposalSampler& proposal, Exec policy) {
  return generate_impl(model, n, rng, &proposal, policy);
}

}  // namespace abc
