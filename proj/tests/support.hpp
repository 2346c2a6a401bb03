#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "bsr/image.hpp"

namespace bsr::testing {

inline Image random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h);
  for (double& v : img.data) v = u(rng);
  return img;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Eigen::MatrixXd random_unit_dictionary(Eigen::Index rows, Eigen::Index cols,
                                              std::uint64_t seed) {
  Eigen::MatrixXd d = random_matrix(rows, cols, seed);
  d.colwise().normalize();
  return d;
}

}  // namespace bsr::testing
