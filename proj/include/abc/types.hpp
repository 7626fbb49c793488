#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace abc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct AbcError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: unknown keys, out-of-range indices, malformed files.
struct ConfigError : AbcError {
  using AbcError::AbcError;
};

struct DimensionError : AbcError {
  using AbcError::AbcError;
};

// A forward simulation failed for a parameter value (invalid region,
// non-finite output). Simulators throw this instead of returning NaNs.
struct SimulationError : AbcError {
  using AbcError::AbcError;
};

// Kernel weighting left no particle with positive weight.
struct NoAcceptancesError : AbcError {
  NoAcceptancesError(double bandwidth, double min_distance);
  double bandwidth;
  double min_distance;
};

struct NumericalError : AbcError {
  using AbcError::AbcError;
};

// Ordered, duplicate-free set of column indices into a summary vector.
class SummarySelection {
 public:
  SummarySelection() = default;
  explicit SummarySelection(std::vector<int> indices);

  static SummarySelection all(int q);
  // Order-preserving union of two selections.
  static SummarySelection concat(const SummarySelection& a,
                                 const SummarySelection& b);

  bool empty() const { return indices_.empty(); }
  int size() const { return static_cast<int>(indices_.size()); }
  int operator[](int k) const { return indices_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& indices() const { return indices_; }

  void check_bounds(int q) const;
  Vector gather(const Vector& full) const;
  Matrix gather_columns(const Matrix& full) const;
  std::string to_string() const;

  friend bool operator==(const SummarySelection&,
                         const SummarySelection&) = default;

 private:
  std::vector<int> indices_;
};

struct Particle {
  Vector theta;
  Vector summary;
  double weight = 1.0;
};

struct ParticleMeta {
  std::string model_id;
  std::uint64_t seed = 0;
  std::optional<SummarySelection> selection;
  std::optional<Vector> s_obs;
  std::vector<std::string> adjustments;
  std::vector<std::string> warnings;
};

// A batch of r draws (theta, s) with weights. Rows are particles; all
// columns are finite and weights nonnegative, enforced on construction.
class ParticleSet {
 public:
  ParticleSet() = default;
  ParticleSet(Matrix thetas, Matrix summaries, Vector weights,
              ParticleMeta meta = {});

  std::int64_t size() const { return thetas_.rows(); }
  int param_dim() const { return static_cast<int>(thetas_.cols()); }
  int summary_dim() const { return static_cast<int>(summaries_.cols()); }

  const Matrix& thetas() const { return thetas_; }
  const Matrix& summaries() const { return summaries_; }
  const Vector& weights() const { return weights_; }
  const ParticleMeta& meta() const { return meta_; }
  ParticleMeta& meta() { return meta_; }

  Particle particle(std::int64_t i) const;

  // Same particles with replaced theta block (dimensions must agree).
  ParticleSet with_thetas(Matrix thetas) const;

 private:
  Matrix thetas_;     // r x p
  Matrix summaries_;  // r x q
  Vector weights_;    // r
  ParticleMeta meta_;
};

}  // namespace abc
