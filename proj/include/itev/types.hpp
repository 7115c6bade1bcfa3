#pragma once

#include <complex>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

namespace itev {

using Real = double;
using Complex = std::complex<double>;

using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr Real pi = std::numbers::pi_v<Real>;
inline constexpr Complex I{0.0, 1.0};

}  // namespace itev
