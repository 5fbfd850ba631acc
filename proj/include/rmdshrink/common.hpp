#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rmd {

/// n x p observations, one row per observation.
using DataMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Every library failure is reported through this type (or a subclass).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(what);
}

inline void require_finite(const DataMatrix& data, const char* who) {
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      if (!std::isfinite(data(i, j)))
        throw Error(std::string(who) + ": non-finite value at row " + std::to_string(i) +
                    ", column " + std::to_string(j));
}

inline void require_nonempty(const DataMatrix& data, const char* who) {
  if (data.rows() < 1 || data.cols() < 1) throw Error(std::string(who) + ": empty sample");
}

}  // namespace detail
}  // namespace rmd
