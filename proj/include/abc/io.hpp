#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "abc/types.hpp"

namespace abc::io {

// Shortest-round-trip decimal formatting; output is byte-stable across runs.
std::string format_double(double v);

// One row per particle: theta columns, summary columns, weight. A JSON
// sidecar at <path>.meta.json carries the run metadata.
void write_particles_csv(const std::string& path, const ParticleSet& particles);
ParticleSet read_particles_csv(const std::string& path);

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& header);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

void to_json(nlohmann::json& j, const ParticleMeta& meta);
ParticleMeta particle_meta_from_json(const nlohmann::json& j);

}  // namespace abc::io
