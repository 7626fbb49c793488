#pragma once

#include <cstdint>
#include <vector>

namespace abc {

// SplitMix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

// Counter-based random stream. Output i is a pure function of
// (seed, stream_id, i), so work can fan out across threads with one
// sub-stream per task and the draw sequences stay identical under any
// schedule. Sub-streams derive a fresh seed from the parent, which keeps
// nested spawns collision-free.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64();
  // Uniform on [0,1), 53-bit resolution.
  double uniform();
  // Uniform on the open interval (0,1); safe to pass through a quantile
  // function.
  double uniform_oo();
  // Standard normal by inversion.
  double normal();
  // Chi-squared with integer df >= 1 (sum of df squared normals).
  double chi_squared(int df);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Child i of a root stream: fresh derived seed, stream_id = index.
RngStream child_stream(const RngStream& root, std::uint64_t index);
std::vector<RngStream> spawn_streams(const RngStream& root, std::int64_t n);

double standard_normal_pdf(double x);
double log_standard_normal_pdf(double x);
double standard_normal_cdf(double x);
// Inverse standard normal CDF (Wichura-style rational approximation,
// absolute error well under 1e-9). Returns -+inf at p = 0, 1.
double standard_normal_quantile(double p);

}  // namespace abc
