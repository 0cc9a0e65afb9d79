#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "dcsmooth/phase_retrieval.hpp"

namespace testutil {

using dcsmooth::Rng;
using dcsmooth::Vector;

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Vector random_vector(Rng& rng, int n, double scale) {
  Vector z(n);
  for (int i = 0; i < n; ++i) z[i] = scale * rng.normal();
  return z;
}

inline double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dcsmooth_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
