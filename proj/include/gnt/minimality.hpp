#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "gnt/haar.hpp"
#include "gnt/jet.hpp"
#include "gnt/patch.hpp"

namespace gnt {

// The Euler-Lagrange identity tested here has, in general ambients, a third
// section built from derivatives of the curvature tensor.  In a space form
// (the only ambients AmbientSpec admits: flat space or a round sphere) that
// section vanishes identically, so the residual below is the full criterion.

/// Residual record at one mesh node.
struct PointResidual {
    Eigen::VectorXd chart_point;
    Eigen::VectorXd H;          ///< averaged sigma-gradient section, reference frame
    Eigen::VectorXd S;          ///< averaged trace section, reference frame
    Eigen::VectorXd residual;   ///< c(n+1-|u|) H - S
    Eigen::VectorXd std_error;  ///< per-component Monte Carlo error of the residual
    double residual_norm = 0.0;
    double std_error_norm = 0.0;
};

struct MinimalityReport {
    MultiIndex u;
    double curvature = 0.0;
    double tolerance = 0.0;
    Group group = Group::O;
    FiberScheme scheme = FiberScheme::monte_carlo;
    long samples = 0;
    std::uint64_t seed = 0;
    std::vector<PointResidual> points;
    double sup_residual = 0.0;  ///< max node residual norm
    double l2_residual = 0.0;   ///< volume-weighted RMS residual norm
    double max_std_error = 0.0;
    bool passed = false;  ///< sup_residual <= tolerance + 3 * max_std_error
};

/// Evaluate the criticality residual c(n+1-|u|) H - S over a quadrature mesh
/// of the patch.  The verdict allows three combined standard errors on top of
/// the tolerance so Monte Carlo noise cannot flip a true pass.
inline MinimalityReport minimality_residual(const ImmersedPatch& patch, const MultiIndex& u,
                                            int resolution, const FiberOptions& fiber,
                                            double tolerance,
                                            DerivativeBackend backend = DerivativeBackend::analytic) {
    patch.validate();
    if (u.size() != patch.codim())
        throw std::invalid_argument("minimality_residual: multi-index length must equal codimension");
    if (u.degree() > patch.dim())
        throw std::invalid_argument("minimality_residual: |u| must be <= patch dimension");

    MinimalityReport report;
    report.u = u;
    report.curvature = patch.ambient.curvature();
    report.tolerance = tolerance;
    report.group = fiber.group;
    report.scheme = fiber.scheme;
    report.samples = fiber.samples;
    report.seed = fiber.seed;

    const QuadratureRule rule = chart_quadrature(patch.chart, resolution);
    double weighted_sq = 0.0;
    double total_volume = 0.0;
    for (long k = 0; k < rule.weights.size(); ++k) {
        const PatchPointData data =
            evaluate_patch(patch, rule.points.row(k).transpose(), backend);
        // Independent draws at each mesh node so residual noise does not
        // correlate across the mesh; derived deterministically from the seed.
        FiberOptions node_fiber = fiber;
        node_fiber.seed = Rng::substream_seed(fiber.seed, static_cast<std::uint64_t>(k));
        const SectionAverages sections =
            averaged_sections(data.shape, u, report.curvature, node_fiber);
        report.samples = sections.residual.samples;  // actual draws/nodes per mesh point

        PointResidual rec;
        rec.chart_point = rule.points.row(k).transpose();
        rec.H = sections.H.value;
        rec.S = sections.S.value;
        rec.residual = sections.residual.value;
        rec.std_error = sections.residual.std_error;
        rec.residual_norm = rec.residual.norm();
        rec.std_error_norm = rec.std_error.norm();
        report.points.push_back(std::move(rec));

        const double mass = rule.weights[k] * data.volume_density;
        weighted_sq += mass * report.points.back().residual_norm *
                       report.points.back().residual_norm;
        total_volume += mass;
        report.sup_residual = std::max(report.sup_residual, report.points.back().residual_norm);
        report.max_std_error = std::max(report.max_std_error, report.points.back().std_error_norm);
    }
    report.l2_residual = std::sqrt(weighted_sq / total_volume);
    report.passed = report.sup_residual <= report.tolerance + 3.0 * report.max_std_error;
    return report;
}

/// Total generalized extrinsic curvature of the patch: integral of the
/// averaged coefficient over the induced volume.
struct FunctionalValue {
    double value = 0.0;
    double std_error = 0.0;  ///< Monte Carlo part only; quadrature error is separate
};

inline FunctionalValue functional_value(const ImmersedPatch& patch, const MultiIndex& u,
                                        int resolution, const FiberOptions& fiber,
                                        DerivativeBackend backend = DerivativeBackend::analytic) {
    patch.validate();
    if (u.size() != patch.codim())
        throw std::invalid_argument("functional_value: multi-index length must equal codimension");
    const QuadratureRule rule = chart_quadrature(patch.chart, resolution);
    double acc = 0.0;
    double var = 0.0;
    for (long k = 0; k < rule.weights.size(); ++k) {
        const PatchPointData data =
            evaluate_patch(patch, rule.points.row(k).transpose(), backend);
        FiberOptions node_fiber = fiber;
        node_fiber.seed = Rng::substream_seed(fiber.seed, static_cast<std::uint64_t>(k));
        const ScalarAverage avg = sigma_hat(data.shape, u, node_fiber);
        const double mass = rule.weights[k] * data.volume_density;
        acc += mass * avg.value;
        var += mass * mass * avg.std_error * avg.std_error;
    }
    return {acc, std::sqrt(var)};
}

/// A purely normal variation of a patch: V = cutoff * sum_beta f_beta nu_beta
/// with the f_beta given as scalar chart functions and nu the patch's analytic
/// normal frame.  On non-periodic axes a smooth bump factor (vanishing to all
/// orders at the ends) is applied so the variation is supported away from the
/// chart boundary.
struct VariationSpec {
    ImmersedPatch patch;
    std::vector<std::function<Jet(const std::vector<Jet>&)>> components;
    bool apply_cutoff = true;
    std::vector<double> steps = {1e-2, 5e-3, 2.5e-3};

    void validate() const {
        patch.validate();
        if (!patch.normal_frame)
            throw std::invalid_argument(
                "VariationSpec: patch must carry an analytic normal frame");
        if (static_cast<int>(components.size()) != patch.codim())
            throw std::invalid_argument(
                "VariationSpec: need one component function per normal direction");
        for (const auto& f : components)
            if (!f) throw std::invalid_argument("VariationSpec: empty component function");
    }
};

namespace detail {

/// Smooth bump on (lo, hi), equal to 1 at the midpoint and vanishing with all
/// derivatives at the ends.
inline Jet boundary_bump(const Jet& x, double lo, double hi) {
    const Jet s = (x - lo) / (hi - lo);
    return exp(4.0 - 1.0 / (s * (1.0 - s)));
}

/// The variation field V as ambient jets at a chart point.
inline std::vector<Jet> variation_field(const VariationSpec& spec, const std::vector<Jet>& x) {
    const auto frame = (*spec.patch.normal_frame)(x);
    Jet cutoff(1.0, x.empty() ? 0 : x.front().dim());
    if (spec.apply_cutoff) {
        for (int i = 0; i < spec.patch.dim(); ++i) {
            const ChartAxis& axis = spec.patch.chart.axes[static_cast<std::size_t>(i)];
            if (!axis.periodic)
                cutoff = cutoff * boundary_bump(x[static_cast<std::size_t>(i)], axis.lo, axis.hi);
        }
    }
    const int N = spec.patch.ambient.coord_dim;
    std::vector<Jet> v(static_cast<std::size_t>(N), Jet(0.0, spec.patch.dim()));
    for (int beta = 0; beta < spec.patch.codim(); ++beta) {
        const Jet coeff = cutoff * spec.components[static_cast<std::size_t>(beta)](x);
        for (int a = 0; a < N; ++a)
            v[static_cast<std::size_t>(a)] +=
                coeff * frame[static_cast<std::size_t>(beta)][static_cast<std::size_t>(a)];
    }
    return v;
}

}  // namespace detail

/// The deformed patch at time t: map + t V, radially re-projected when the
/// ambient is a sphere.  The supplied frame is dropped (it is no longer
/// normal off t = 0); averaged quantities do not depend on the replacement.
inline ImmersedPatch deformed_patch(const VariationSpec& spec, double t) {
    spec.validate();
    ImmersedPatch out;
    out.name = spec.patch.name + "+tV";
    out.chart = spec.patch.chart;
    out.ambient = spec.patch.ambient;
    const ImmersedPatch base = spec.patch;
    const VariationSpec spec_copy = spec;
    out.map = [base, spec_copy, t](const std::vector<Jet>& x) {
        std::vector<Jet> z = base.map(x);
        const std::vector<Jet> v = detail::variation_field(spec_copy, x);
        for (std::size_t a = 0; a < z.size(); ++a) z[a] += t * v[a];
        if (base.ambient.kind == AmbientSpec::Kind::sphere) {
            const Jet scale = base.ambient.radius / sqrt(squared_norm(z));
            for (auto& comp : z) comp = comp * scale;
        }
        return z;
    };
    return out;
}

/// One step of the derivative-of-the-functional probe.
struct FirstVariationStep {
    double step = 0.0;
    double fd = 0.0;     ///< central difference of the functional
    double error = 0.0;  ///< |fd - rhs|
};

struct FirstVariationReport {
    double rhs = 0.0;            ///< integral of <c(n+1-|u|)H - S, V>
    double rhs_std_error = 0.0;  ///< Monte Carlo part
    double functional_at_zero = 0.0;
    std::vector<FirstVariationStep> steps;
    double fitted_order = 0.0;  ///< least-squares slope of log error vs log step
};

/// Compare the finite-difference derivative of the total curvature functional
/// along the variation against the integrated pairing of the criticality
/// residual with V.  A correct identity makes the central difference converge
/// to the integral at second order in the step.
inline FirstVariationReport first_variation_check(const VariationSpec& spec, const MultiIndex& u,
                                                  int resolution, const FiberOptions& fiber,
                                                  DerivativeBackend backend = DerivativeBackend::analytic) {
    spec.validate();
    const ImmersedPatch& patch = spec.patch;
    if (u.size() != patch.codim())
        throw std::invalid_argument("first_variation_check: multi-index length must equal codimension");
    const double curvature = patch.ambient.curvature();

    FirstVariationReport report;

    // Right side: pair the residual's reference-frame components with the
    // variation's components in the same frame (both live in the normal space,
    // so the ambient inner product collapses to a q-vector dot product).
    const QuadratureRule rule = chart_quadrature(patch.chart, resolution);
    double rhs = 0.0, rhs_var = 0.0;
    for (long k = 0; k < rule.weights.size(); ++k) {
        const Eigen::VectorXd x = rule.points.row(k).transpose();
        const PatchPointData data = evaluate_patch(patch, x, backend);
        FiberOptions node_fiber = fiber;
        node_fiber.seed = Rng::substream_seed(fiber.seed, static_cast<std::uint64_t>(k));
        const SectionAverages sections = averaged_sections(data.shape, u, curvature, node_fiber);

        const auto x_jets = seed_point(x);
        const auto frame = (*patch.normal_frame)(x_jets);
        Jet cutoff(1.0, patch.dim());
        if (spec.apply_cutoff)
            for (int i = 0; i < patch.dim(); ++i) {
                const ChartAxis& axis = patch.chart.axes[static_cast<std::size_t>(i)];
                if (!axis.periodic)
                    cutoff = cutoff * detail::boundary_bump(x_jets[static_cast<std::size_t>(i)],
                                                            axis.lo, axis.hi);
            }
        Eigen::VectorXd v_comps(patch.codim());
        for (int beta = 0; beta < patch.codim(); ++beta)
            v_comps[beta] =
                (cutoff * spec.components[static_cast<std::size_t>(beta)](x_jets)).value();

        const double mass = rule.weights[k] * data.volume_density;
        rhs += mass * sections.residual.value.dot(v_comps);
        const double node_se = sections.residual.std_error.cwiseProduct(v_comps).norm();
        rhs_var += mass * mass * node_se * node_se;
    }
    report.rhs = rhs;
    report.rhs_std_error = std::sqrt(rhs_var);
    report.functional_at_zero = functional_value(patch, u, resolution, fiber, backend).value;

    for (double h : spec.steps) {
        const double plus =
            functional_value(deformed_patch(spec, h), u, resolution, fiber, backend).value;
        const double minus =
            functional_value(deformed_patch(spec, -h), u, resolution, fiber, backend).value;
        FirstVariationStep step;
        step.step = h;
        step.fd = (plus - minus) / (2.0 * h);
        step.error = std::abs(step.fd - report.rhs);
        report.steps.push_back(step);
    }

    if (report.steps.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(report.steps.size());
        for (const auto& s : report.steps) {
            const double lx = std::log(s.step), ly = std::log(std::max(s.error, 1e-300));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        report.fitted_order = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return report;
}

/// Frame-free criticality combination for the doubly-raised-index family:
/// (1/2 (|H|^2 - |B|^2) - c(n-1)) H - tr(B o A^H) + tr(B o A^2), expressed in
/// the reference normal frame at one chart point.  Vanishing of this vector
/// for every beta is equivalent to criticality for all indices of the form
/// raise(beta, raise(beta, 0)) simultaneously.
inline Eigen::VectorXd example4_condition(const ImmersedPatch& patch, const Eigen::VectorXd& x,
                                          DerivativeBackend backend = DerivativeBackend::analytic) {
    const PatchPointData data = evaluate_patch(patch, x, backend);
    const int n = patch.dim();
    const int q = patch.codim();
    const double c = patch.ambient.curvature();

    Eigen::VectorXd h(q);
    double b_sq = 0.0;
    Eigen::MatrixXd a_sq = Eigen::MatrixXd::Zero(n, n);
    for (int beta = 0; beta < q; ++beta) {
        h[beta] = data.shape[beta].trace();
        b_sq += data.shape[beta].squaredNorm();
        a_sq += data.shape[beta] * data.shape[beta];
    }
    Eigen::MatrixXd a_h = Eigen::MatrixXd::Zero(n, n);
    for (int beta = 0; beta < q; ++beta) a_h += h[beta] * data.shape[beta];

    const double scalar = 0.5 * (h.squaredNorm() - b_sq) - c * (n - 1);
    Eigen::VectorXd out(q);
    for (int beta = 0; beta < q; ++beta)
        out[beta] = scalar * h[beta] - (data.shape[beta] * a_h).trace() +
                    (data.shape[beta] * a_sq).trace();
    return out;
}

/// Balance condition for criticality of a totally umbilical patch with flat
/// extra normal directions under the constant index u = (k,...,k): the gap
/// (n - qk) |H|^2 - c q k n^2, zero exactly at criticality.  (Derived from
/// the Euler-Lagrange identity specialized to umbilical shape operators; see
/// the test suite for the numerical cross-validation.)
inline double umbilical_balance_gap(int n, int q, int k, double mean_curvature_sq,
                                    double curvature) {
    return (n - q * k) * mean_curvature_sq - curvature * q * k * n * n;
}

/// The small-sphere radius rho at which S^n(rho) inside S^{n+q}(r) satisfies
/// the balance condition for u = (k,...,k): |H|^2 = n^2 (r^2 - rho^2) /
/// (rho^2 r^2) and c = 1/r^2 give rho = r sqrt((n - qk)/n).
inline double critical_small_sphere_radius(int n, int q, int k, double r) {
    if (n <= q * k)
        throw std::invalid_argument("critical_small_sphere_radius: need n > qk");
    return r * std::sqrt(static_cast<double>(n - q * k) / static_cast<double>(n));
}

}  // namespace gnt
