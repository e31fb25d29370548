#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include "gnt/multiindex.hpp"
#include "gnt/operator_system.hpp"

namespace gnt {

/// All sigma_u and T_u of a system up to a given degree, stored in graded
/// order.  sigma_u is the coefficient of t^u in det(I + sum t_alpha A_alpha);
/// T_u is the associated Newton transformation.
struct NewtonTable {
    int n = 0;
    int q = 0;
    int max_degree = 0;
    std::vector<MultiIndex> indices;              ///< graded order, starts at the zero index
    std::map<MultiIndex, std::size_t> position;   ///< index -> slot
    std::vector<double> sigma;                    ///< aligned with indices
    std::vector<Eigen::MatrixXd> transform;       ///< aligned with indices

    bool contains(const MultiIndex& u) const { return position.count(u) > 0; }

    double sigma_at(const MultiIndex& u) const { return sigma[slot(u)]; }

    const Eigen::MatrixXd& transform_at(const MultiIndex& u) const { return transform[slot(u)]; }

private:
    std::size_t slot(const MultiIndex& u) const {
        auto it = position.find(u);
        if (it == position.end())
            throw std::out_of_range("NewtonTable: index " + u.to_string() + " not tabulated");
        return it->second;
    }
};

/// Build the Newton table by the simultaneous recursion
///
///   T_0 = I,
///   sigma_u = (1/|u|) sum_alpha tr(A_alpha T_{lower(alpha,u)}),
///   T_u     = sigma_u I - sum_alpha A_alpha T_{lower(alpha,u)},
///
/// where terms with an annihilated lowered index are dropped.  Cost is
/// O(#indices * q * n^3) with #indices = C(max_degree + q, q).
inline NewtonTable newton_table(const OperatorSystem& sys, int max_degree) {
    if (max_degree < 0) throw std::invalid_argument("newton_table: max_degree must be >= 0");

    NewtonTable table;
    table.n = sys.n;
    table.q = sys.q;
    table.max_degree = max_degree;
    table.indices = enumerate_multi_indices(sys.q, max_degree);
    table.sigma.resize(table.indices.size());
    table.transform.resize(table.indices.size());
    for (std::size_t i = 0; i < table.indices.size(); ++i)
        table.position.emplace(table.indices[i], i);

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(sys.n, sys.n);
    for (std::size_t i = 0; i < table.indices.size(); ++i) {
        const MultiIndex& u = table.indices[i];
        const int len = u.degree();
        if (len == 0) {
            table.sigma[i] = 1.0;
            table.transform[i] = identity;
            continue;
        }
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(sys.n, sys.n);
        for (int alpha = 0; alpha < sys.q; ++alpha) {
            const auto lowered = lower(alpha, u);
            if (!lowered) continue;
            acc += sys[alpha] * table.transform[table.position.at(*lowered)];
        }
        table.sigma[i] = acc.trace() / static_cast<double>(len);
        table.transform[i] = table.sigma[i] * identity - acc;
    }
    return table;
}

/// Largest deviation from the mirrored form of the recursion,
/// T_u = sigma_u I - sum_alpha T_{lower(alpha,u)} A_alpha.  For a system of
/// self-adjoint operators this vanishes identically; it is a consistency
/// check, not a new quantity.
inline double right_recursion_residual(const OperatorSystem& sys, const NewtonTable& table) {
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(sys.n, sys.n);
    double worst = 0.0;
    for (const MultiIndex& u : table.indices) {
        if (u.degree() == 0) continue;
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(sys.n, sys.n);
        for (int alpha = 0; alpha < sys.q; ++alpha) {
            const auto lowered = lower(alpha, u);
            if (!lowered) continue;
            acc += table.transform_at(*lowered) * sys[alpha];
        }
        const Eigen::MatrixXd rhs = table.sigma_at(u) * identity - acc;
        worst = std::max(worst, (rhs - table.transform_at(u)).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Largest deviation from the trace identity tr T_u = (n - |u|) sigma_u
/// over every tabulated index.
inline double trace_identity_residual(const NewtonTable& table) {
    double worst = 0.0;
    for (const MultiIndex& u : table.indices) {
        const double expected = static_cast<double>(table.n - u.degree()) * table.sigma_at(u);
        worst = std::max(worst, std::abs(table.transform_at(u).trace() - expected));
    }
    return worst;
}

/// One finite-difference probe of d/dt sigma_u along a family of systems.
struct VariationStep {
    double step = 0.0;       ///< h
    double fd = 0.0;         ///< central difference (sigma_u(t0+h) - sigma_u(t0-h)) / 2h
    double analytic = 0.0;   ///< sum_alpha tr(A_alpha'(t0) T_{lower(alpha,u)}(t0))
    double error = 0.0;      ///< |fd - analytic|
};

struct VariationReport {
    std::vector<VariationStep> steps;
    std::vector<double> pairwise_orders;  ///< log(e_k/e_{k+1}) / log(h_k/h_{k+1})
    double fitted_order = 0.0;            ///< least-squares slope of log e vs log h
};

/// Check the derivative identity d/dt sigma_u = sum_alpha tr(A_alpha' T_{lower(alpha,u)})
/// along a smooth one-parameter family.  `family(t)` returns the system at t and
/// `family_derivative(t)` its entrywise t-derivative.  The analytic side is
/// evaluated once at t0; the finite-difference side at each step size.  The
/// observed convergence order of a correct identity is 2 (central differences).
inline VariationReport variation_check(const std::function<OperatorSystem(double)>& family,
                                       const std::function<OperatorSystem(double)>& family_derivative,
                                       const MultiIndex& u, double t0,
                                       const std::vector<double>& steps) {
    if (u.degree() < 1)
        throw std::invalid_argument("variation_check: |u| must be >= 1 (sigma_0 is constant)");

    const OperatorSystem base = family(t0);
    const OperatorSystem rate = family_derivative(t0);
    const NewtonTable table = newton_table(base, u.degree() - 1);

    double analytic = 0.0;
    for (int alpha = 0; alpha < base.q; ++alpha) {
        const auto lowered = lower(alpha, u);
        if (!lowered) continue;
        analytic += (rate[alpha] * table.transform_at(*lowered)).trace();
    }

    VariationReport report;
    for (double h : steps) {
        const double plus = newton_table(family(t0 + h), u.degree()).sigma_at(u);
        const double minus = newton_table(family(t0 - h), u.degree()).sigma_at(u);
        VariationStep s;
        s.step = h;
        s.fd = (plus - minus) / (2.0 * h);
        s.analytic = analytic;
        s.error = std::abs(s.fd - analytic);
        report.steps.push_back(s);
    }

    for (std::size_t k = 0; k + 1 < report.steps.size(); ++k) {
        const auto& a = report.steps[k];
        const auto& b = report.steps[k + 1];
        report.pairwise_orders.push_back(std::log(a.error / b.error) / std::log(a.step / b.step));
    }

    // Least-squares slope of log(error) against log(step).
    if (report.steps.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(report.steps.size());
        for (const auto& s : report.steps) {
            const double x = std::log(s.step), y = std::log(s.error);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        report.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return report;
}

}  // namespace gnt
