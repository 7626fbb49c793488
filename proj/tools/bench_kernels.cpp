// Timings for the OpenMP kernels against their serial reference paths.
// Both paths must agree bit-for-bit; this binary reports the speedups.

#include <chrono>
#include <cstdio>
#include <functional>

#include "abc/copula.hpp"
#include "abc/eval.hpp"
#include "abc/models.hpp"
#include "abc/parallel.hpp"
#include "abc/rde.hpp"
#include "abc/rejection.hpp"

namespace {

using namespace abc;

double time_once(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-24s %10.3fs %10.3fs %8.2fx   %s\n", name, serial, parallel,
              serial / parallel, identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", max_threads());
  std::printf("%-24s %11s %11s %9s\n", "kernel", "serial", "parallel",
              "speedup");

  const models::TwistedNormalModel model(
      models::TwistedNormalParams::with_dim(20));
  const RngStream rng(2024);

  // Particle generation.
  ParticleSet pool_serial = generate_particles(model, 1, rng);
  ParticleSet pool_par = pool_serial;
  {
    const double ts = time_once([&] {
      pool_serial = generate_particles(model, 200000, rng, Exec::Serial);
    });
    const double tp = time_once([&] {
      pool_par = generate_particles(model, 200000, rng, Exec::Par);
    });
    row("generate_particles", ts, tp,
        pool_serial.thetas() == pool_par.thetas() &&
            pool_serial.summaries() == pool_par.summaries());
  }

  // Distance sweep.
  const DistanceConfig dist = standardize(pool_serial);
  const Vector s_obs = model.params().y_obs;
  Vector d_serial, d_par;
  {
    const SummarySelection all = SummarySelection::all(model.summary_dim());
    const double ts = time_once([&] {
      for (int rep = 0; rep < 20; ++rep) {
        d_serial = scaled_distances(pool_serial, s_obs, all, dist, Exec::Serial);
      }
    });
    const double tp = time_once([&] {
      for (int rep = 0; rep < 20; ++rep) {
        d_par = scaled_distances(pool_serial, s_obs, all, dist, Exec::Par);
      }
    });
    row("scaled_distances x20", ts, tp, d_serial == d_par);
  }

  // Copula pair sweep.
  {
    CopulaConfig config;
    config.accept_quantile = 0.01;
    const PairSelections selections = PairSelections::from_model(model);
    MetaGaussian mg_serial = copula_abc_from_pool(pool_serial, s_obs,
                                                  selections, config,
                                                  Exec::Serial);
    MetaGaussian mg_par = mg_serial;
    const double ts = time_once([&] {
      mg_serial = copula_abc_from_pool(pool_serial, s_obs, selections, config,
                                       Exec::Serial);
    });
    const double tp = time_once([&] {
      mg_par = copula_abc_from_pool(pool_serial, s_obs, selections, config,
                                    Exec::Par);
    });
    row("copula_abc pairs", ts, tp,
        mg_serial.correlation.matrix() == mg_par.correlation.matrix());
  }

  // 2-D KDE on the benchmark grid.
  {
    const GridDensity2D truth =
        models::twisted_true_bivariate_margin(model.params());
    Matrix sample(100000, 2);
    RngStream stream(99);
    for (std::int64_t i = 0; i < sample.rows(); ++i) {
      sample(i, 0) = truth.xs[0] +
                     (truth.xs[truth.xs.size() - 1] - truth.xs[0]) * stream.uniform();
      sample(i, 1) = truth.ys[0] +
                     (truth.ys[truth.ys.size() - 1] - truth.ys[0]) * stream.uniform();
    }
    const Vector weights = Vector::Ones(sample.rows());
    GridDensity2D kde_serial, kde_par;
    const double ts = time_once([&] {
      kde_serial =
          eval::kde2d(sample, weights, truth.xs, truth.ys, Exec::Serial);
    });
    const double tp = time_once([&] {
      kde_par = eval::kde2d(sample, weights, truth.xs, truth.ys, Exec::Par);
    });
    row("kde2d 100k x 400^2", ts, tp, kde_serial.density == kde_par.density);
  }

  // Mixture fitting restarts.
  {
    RngStream stream(1234);
    const std::int64_t n = 20000;
    Matrix scores(n, 2);
    Matrix thetas(n, 2);
    for (std::int64_t i = 0; i < n; ++i) {
      const double shift = i % 2 == 0 ? -2.0 : 2.0;
      scores(i, 0) = stream.normal() + shift;
      scores(i, 1) = stream.normal();
      thetas(i, 0) = stream.normal() + shift;
      thetas(i, 1) = stream.normal();
    }
    rde::MixtureFitConfig config;
    config.k_max = 3;
    rde::GaussianMixture gmm_serial, gmm_par;
    const double ts = time_once([&] {
      gmm_serial =
          rde::fit_joint_mixture(scores, thetas, config, rng, Exec::Serial);
    });
    const double tp = time_once([&] {
      gmm_par = rde::fit_joint_mixture(scores, thetas, config, rng, Exec::Par);
    });
    row("mixture EM restarts", ts, tp,
        gmm_serial.loglik == gmm_par.loglik &&
            gmm_serial.weights == gmm_par.weights);
  }

  return 0;
}
