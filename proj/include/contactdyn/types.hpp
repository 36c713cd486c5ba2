#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace contactdyn {

inline constexpr const char* kVersion = "0.1.0";

// Configuration space is the flat torus T^n, n in {1,2}. All dense objects
// are small, so we use fixed-capacity Eigen vectors to stay allocation-free.
inline constexpr int kMaxDim = 2;

/// n-vector on the base (angles x or covector components p), n <= 2.
using VecN = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// n x n matrix (Hessians in x or p).
using MatN = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
/// Full phase-space vector (x, p, u), size 2n+1 <= 5.
using VecZ = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim + 1, 1>;
/// Jacobian of the phase-space vector field, (2n+1) x (2n+1).
using MatZ = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim + 1,
                           2 * kMaxDim + 1>;

/// Rejected input (non-finite components, out-of-range parameters).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative solver failed to meet its tolerance.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated an interface contract (mismatched artifacts, missing data).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return v.allFinite();
}

}  // namespace contactdyn
