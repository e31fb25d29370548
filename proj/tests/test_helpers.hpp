#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gnt/operator_system.hpp"
#include "gnt/random.hpp"

namespace gnt_test {

/// Random symmetric system with entries of order `scale`.
inline gnt::OperatorSystem random_symmetric_system(int n, int q, gnt::Rng& rng,
                                                   double scale = 1.0) {
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(static_cast<std::size_t>(q));
    for (int alpha = 0; alpha < q; ++alpha) {
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-scale, scale);
        mats.push_back(0.5 * (m + m.transpose()).eval());
    }
    return gnt::OperatorSystem(std::move(mats));
}

inline gnt::OperatorSystem diagonal_system(const std::vector<std::vector<double>>& diags) {
    std::vector<Eigen::MatrixXd> mats;
    for (const auto& d : diags) {
        Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<long>(d.size()));
        mats.push_back(Eigen::MatrixXd(v.asDiagonal()));
    }
    return gnt::OperatorSystem(std::move(mats));
}

/// Elementary symmetric polynomial e_r of the given values.
inline double elementary_symmetric(std::vector<double> values, int r) {
    // e_r via the stable coefficient recurrence for prod (1 + v_i t).
    std::vector<double> coeff(values.size() + 1, 0.0);
    coeff[0] = 1.0;
    for (double v : values)
        for (std::size_t k = coeff.size() - 1; k >= 1; --k) coeff[k] += v * coeff[k - 1];
    return coeff[static_cast<std::size_t>(r)];
}

}  // namespace gnt_test
