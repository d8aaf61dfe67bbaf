#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace msmfe {

template <int dim>
using Point = Eigen::Matrix<double, dim, 1>;

template <int dim>
using Tensor = Eigen::Matrix<double, dim, dim>;

/// Number of independent entries of a skew-symmetric dim x dim matrix.
constexpr int rotation_components(int dim) { return dim * (dim - 1) / 2; }

template <int dim>
using RotVec = Eigen::Matrix<double, rotation_components(dim), 1>;

using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateGeometry : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace msmfe
