#include "abc/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace abc::io {

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

void to_json(nlohmann::json& j, const ParticleMeta& meta) {
  j = nlohmann::json{{"model", meta.model_id},
                     {"seed", meta.seed},
                     {"adjustments", meta.adjustments},
                     {"warnings", meta.warnings}};
  if (meta.selection) {
    j["selection"] = meta.selection->indices();
  }
  if (meta.s_obs) {
    j["s_obs"] = std::vector<double>(meta.s_obs->data(),
                                     meta.s_obs->data() + meta.s_obs->size());
  }
}

ParticleMeta particle_meta_from_json(const nlohmann::json& j) {
  ParticleMeta meta;
  meta.model_id = j.value("model", std::string{});
  meta.seed = j.value("seed", std::uint64_t{0});
  meta.adjustments = j.value("adjustments", std::vector<std::string>{});
  meta.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("selection")) {
    meta.selection = SummarySelection(j.at("selection").get<std::vector<int>>());
  }
  if (j.contains("s_obs")) {
    const auto v = j.at("s_obs").get<std::vector<double>>();
    meta.s_obs =
        Eigen::Map<const Vector>(v.data(), static_cast<std::int64_t>(v.size()));
  }
  return meta;
}

void write_particles_csv(const std::string& path, const ParticleSet& particles) {
  std::ofstream out(path);
  if (!out) throw AbcError("cannot write " + path);
  const int p = particles.param_dim();
  const int q = particles.summary_dim();
  for (int j = 0; j < p; ++j) out << "theta_" << j + 1 << ',';
  for (int j = 0; j < q; ++j) out << "s_" << j + 1 << ',';
  out << "weight\n";
  for (std::int64_t i = 0; i < particles.size(); ++i) {
    for (int j = 0; j < p; ++j) {
      out << format_double(particles.thetas()(i, j)) << ',';
    }
    for (int j = 0; j < q; ++j) {
      out << format_double(particles.summaries()(i, j)) << ',';
    }
    out << format_double(particles.weights()[i]) << '\n';
  }
  nlohmann::json meta;
  to_json(meta, particles.meta());
  meta["rows"] = particles.size();
  meta["param_dim"] = p;
  meta["summary_dim"] = q;
  write_json_file(path + ".meta.json", meta);
}

namespace {

std::vector<double> parse_csv_row(const std::string& line,
                                  const std::string& path) {
  std::vector<double> values;
  const char* ptr = line.data();
  const char* end = line.data() + line.size();
  while (ptr < end) {
    double v = 0.0;
    const auto [next, ec] = std::from_chars(ptr, end, v);
    if (ec != std::errc{}) {
      throw AbcError("malformed CSV row in " + path);
    }
    values.push_back(v);
    ptr = next;
    if (ptr < end && *ptr == ',') ++ptr;
  }
  return values;
}

}  // namespace

ParticleSet read_particles_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AbcError("cannot read " + path);
  std::string header;
  if (!std::getline(in, header)) throw AbcError("empty particle file " + path);

  int p = 0;
  int q = 0;
  {
    std::stringstream ss(header);
    std::string column;
    while (std::getline(ss, column, ',')) {
      if (column.rfind("theta_", 0) == 0) ++p;
      if (column.rfind("s_", 0) == 0) ++q;
    }
  }
  if (p < 1) throw AbcError("particle file " + path + " has no theta columns");

  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_row(line, path));
    if (static_cast<int>(rows.back().size()) != p + q + 1) {
      throw AbcError("particle file " + path + " has a short row");
    }
  }
  if (rows.empty()) throw AbcError("particle file " + path + " has no rows");

  const std::int64_t r = static_cast<std::int64_t>(rows.size());
  Matrix thetas(r, p);
  Matrix summaries(r, q);
  Vector weights(r);
  for (std::int64_t i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < p; ++j) thetas(i, j) = row[static_cast<std::size_t>(j)];
    for (int j = 0; j < q; ++j) {
      summaries(i, j) = row[static_cast<std::size_t>(p + j)];
    }
    weights[i] = row[static_cast<std::size_t>(p + q)];
  }

  ParticleMeta meta;
  std::ifstream meta_in(path + ".meta.json");
  if (meta_in) {
    nlohmann::json j;
    meta_in >> j;
    meta = particle_meta_from_json(j);
  }
  return ParticleSet(std::move(thetas), std::move(summaries),
                     std::move(weights), std::move(meta));
}

void write_matrix_csv(const std::string& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  if (static_cast<std::int64_t>(header.size()) != m.cols()) {
    throw DimensionError("write_matrix_csv: header width mismatch");
  }
  std::ofstream out(path);
  if (!out) throw AbcError("cannot write " + path);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j > 0) out << ',';
    out << header[j];
  }
  out << '\n';
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    for (std::int64_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AbcError("cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw AbcError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace abc::io
