#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace irssec {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using cd = Complex<double>;
using CVectorXd = CVector<double>;
using CMatrixXd = CMatrix<double>;

// Error taxonomy shared by every module.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// A subproblem or retraction hit a measure-zero degenerate input.
struct DegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An oracle refused a problem outside its exhaustive-search budget.
struct RefusalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace irssec
