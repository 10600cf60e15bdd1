#pragma once

#include <Eigen/Dense>
#include <vector>

namespace plasma_spike {

// Points live in R^N with N chosen at run time, so the dimension is dynamic.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using PointList = std::vector<Point<Scalar>>;

using Pointd = Point<double>;
using PointListd = PointList<double>;

inline Pointd make_point(std::initializer_list<double> coords) {
  Pointd x(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) x(i++) = c;
  return x;
}

}  // namespace plasma_spike
