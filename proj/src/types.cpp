#include "abc/types.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace abc {

namespace {

std::string no_acceptance_message(double bandwidth, double min_distance) {
  std::ostringstream os;
  os << "no acceptances: bandwidth h=" << bandwidth
     << " left every weight at zero (min distance " << min_distance << ")";
  return os.str();
}

}  // namespace

NoAcceptancesError::NoAcceptancesError(double bandwidth, double min_distance)
    : AbcError(no_acceptance_message(bandwidth, min_distance)),
      bandwidth(bandwidth),
      min_distance(min_distance) {}

SummarySelection::SummarySelection(std::vector<int> indices)
    : indices_(std::move(indices)) {
  std::unordered_set<int> seen;
  for (int idx : indices_) {
    if (idx < 0) throw DimensionError("summary selection: negative index");
    if (!seen.insert(idx).second) {
      throw DimensionError("summary selection: duplicate index " +
                           std::to_string(idx));
    }
  }
}

SummarySelection SummarySelection::all(int q) {
  std::vector<int> idx(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) idx[static_cast<std::size_t>(i)] = i;
  return SummarySelection(std::move(idx));
}

SummarySelection SummarySelection::concat(const SummarySelection& a,
                                          const SummarySelection& b) {
  std::vector<int> idx = a.indices_;
  std::unordered_set<int> seen(idx.begin(), idx.end());
  for (int i : b.indices_) {
    if (seen.insert(i).second) idx.push_back(i);
  }
  return SummarySelection(std::move(idx));
}

void SummarySelection::check_bounds(int q) const {
  for (int idx : indices_) {
    if (idx >= q) {
      throw DimensionError("summary selection index " + std::to_string(idx) +
                           " out of range for q=" + std::to_string(q));
    }
  }
}

Vector SummarySelection::gather(const Vector& full) const {
  Vector out(size());
  for (int k = 0; k < size(); ++k) out[k] = full[indices_[static_cast<std::size_t>(k)]];
  return out;
}

Matrix SummarySelection::gather_columns(const Matrix& full) const {
  Matrix out(full.rows(), size());
  for (int k = 0; k < size(); ++k) {
    out.col(k) = full.col(indices_[static_cast<std::size_t>(k)]);
  }
  return out;
}

std::string SummarySelection::to_string() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (i > 0) os << ',';
    os << indices_[i];
  }
  return os.str();
}

ParticleSet::ParticleSet(Matrix thetas, Matrix summaries, Vector weights,
                         ParticleMeta meta)
    : thetas_(std::move(thetas)),
      summaries_(std::move(summaries)),
      weights_(std::move(weights)),
      meta_(std::move(meta)) {
  const std::int64_t r = thetas_.rows();
  if (r < 1) throw DimensionError("particle set: needs at least one particle");
  if (summaries_.rows() != r || weights_.size() != r) {
    throw DimensionError("particle set: row count mismatch");
  }
  if (!thetas_.allFinite() || !summaries_.allFinite()) {
    throw NumericalError("particle set: non-finite entries");
  }
  if ((weights_.array() < 0.0).any() || !weights_.allFinite()) {
    throw NumericalError("particle set: weights must be finite and >= 0");
  }
}

Particle ParticleSet::particle(std::int64_t i) const {
  return Particle{thetas_.row(i).transpose(), summaries_.row(i).transpose(),
                  weights_[i]};
}

ParticleSet ParticleSet::with_thetas(Matrix thetas) const {
  if (thetas.rows() != thetas_.rows() || thetas.cols() != thetas_.cols()) {
    throw DimensionError("with_thetas: shape mismatch");
  }
  return ParticleSet(std::move(thetas), summaries_, weights_, meta_);
}

}  // namespace abc
