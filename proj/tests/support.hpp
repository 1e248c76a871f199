#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "crossmatch/crossmatch.hpp"

namespace testing_support {

using namespace crossmatch;

inline std::string data_path(const std::string& name) { return std::string(CROSSMATCH_DATA_DIR) + "/" + name; }

inline SensorField sample_field() { return io::field_from_json(io::load_json_file(data_path("field.json"))); }
inline Taxonomy sample_taxonomy() { return io::taxonomy_from_json(io::load_json_file(data_path("taxonomy.json"))); }

inline std::vector<ObjectGeometry> sample_geometries() {
  std::vector<ObjectGeometry> out;
  for (const auto& j : io::load_json_file(data_path("geometries.json"))) out.push_back(io::geometry_from_json(j));
  return out;
}

// Primary line of `n` sensors at x = 0, spacing, ...; a perpendicular line of
// `m` sensors through the middle.
inline SensorField cross_field(std::size_t n = 5, std::size_t m = 3, double spacing = 2.0) {
  std::vector<SensorDef> s;
  std::vector<std::string> prim, perp;
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back({"p" + std::to_string(i), {spacing * static_cast<double>(i), 0.0}});
    prim.push_back(s.back().id);
  }
  double mid = spacing * static_cast<double>(n - 1) / 2;
  for (std::size_t k = 0; k < m; ++k) {
    double y = spacing * (static_cast<double>(k) - static_cast<double>(m - 1) / 2);
    if (y == 0.0) y = spacing / 4;  // keep positions distinct from the primary line
    s.push_back({"q" + std::to_string(k), {mid, y}});
    perp.push_back(s.back().id);
  }
  return SensorField(std::move(s), {{"main", LineKind::primary, prim}, {"cross", LineKind::perpendicular, perp}});
}

inline Hypothesis hyp(std::optional<std::string> type, std::optional<std::string> cat, std::optional<Direction> d,
                      std::optional<double> v, std::optional<double> a) {
  return {{std::move(type), std::move(cat)}, {d, v, a}};
}

class TempDir {
public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("crossmatch_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
  std::filesystem::path path_;
};

inline BinaryActivationMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                            double p = 0.3, double dt = 1.0) {
  std::bernoulli_distribution bit(p);
  BinaryActivationMatrix m(rows, cols, dt);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, bit(rng));
  return m;
}

// Stream of identical samples per sensor at a fixed rate, with optional
// per-sensor overrides.
inline std::vector<Reading> flat_stream(const SensorField& f, std::size_t ticks, double dt, Vec3 base = {1, 2, 3}) {
  std::vector<Reading> out;
  for (std::size_t k = 0; k < ticks; ++k)
    for (const auto& s : f.sensors()) out.push_back({s.id, static_cast<double>(k) * dt, base});
  return out;
}

}  // namespace testing_support
