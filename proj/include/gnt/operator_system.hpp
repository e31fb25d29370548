#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gnt {

/// A q-tuple of n x n matrices A_1,...,A_q acting on a common n-dimensional
/// space: the shape operators of a submanifold along an orthonormal normal
/// frame, or any abstract system fed to the Newton recursion.
struct OperatorSystem {
    int n = 0;
    int q = 0;
    std::vector<Eigen::MatrixXd> matrices;

    OperatorSystem() = default;

    explicit OperatorSystem(std::vector<Eigen::MatrixXd> mats) : matrices(std::move(mats)) {
        if (matrices.empty())
            throw std::invalid_argument("system must contain q >= 1 matrices");
        n = static_cast<int>(matrices.front().rows());
        q = static_cast<int>(matrices.size());
        for (const auto& m : matrices)
            if (m.rows() != n || m.cols() != n)
                throw std::invalid_argument("system matrices must all be square of equal size");
    }

    const Eigen::MatrixXd& operator[](int alpha) const {
        return matrices[static_cast<std::size_t>(alpha)];
    }

    /// Largest deviation from symmetry, max_alpha |A - A^T|_inf.
    double symmetry_error() const {
        double err = 0.0;
        for (const auto& m : matrices)
            err = std::max(err, (m - m.transpose()).cwiseAbs().maxCoeff());
        return err;
    }

    /// max_alpha of the spectral norm estimate |A|_2 (used for tolerance scaling).
    double max_operator_norm() const {
        double nrm = 0.0;
        for (const auto& m : matrices) nrm = std::max(nrm, m.operatorNorm());
        return nrm;
    }
};

}  // namespace gnt
