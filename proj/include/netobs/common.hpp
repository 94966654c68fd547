#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace netobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Decomposition failure, divergence, residual out of tolerance.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally/combinatorially unsolvable problem instance.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed files, bad indices, dimension mismatches.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

using NodeSet = std::vector<int>;  // duplicate-free, caller-ordered node ids

}  // namespace netobs
