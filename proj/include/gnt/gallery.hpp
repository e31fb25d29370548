#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnt/minimality.hpp"
#include "gnt/newton.hpp"
#include "gnt/patch.hpp"
#include "gnt/random.hpp"

namespace gnt {

// ---------------------------------------------------------------------------
// Chart helpers
// ---------------------------------------------------------------------------

/// Hyperspherical chart for S^n: n-1 colatitude angles in (0, pi) plus one
/// periodic longitude in (0, 2pi).  Quadrature nodes are strictly interior,
/// so the polar coordinate singularities are never evaluated.
inline Chart hyperspherical_chart(int n) {
    if (n < 1) throw std::invalid_argument("hyperspherical_chart: need n >= 1");
    Chart chart;
    for (int i = 0; i + 1 < n; ++i)
        chart.axes.push_back({0.0, std::numbers::pi, false});
    chart.axes.push_back({0.0, 2.0 * std::numbers::pi, true});
    return chart;
}

/// The unit-sphere point of the hyperspherical chart as jets:
/// (cos a1, sin a1 cos a2, ..., sin a1 ... sin a_{n-1} cos a_n,
///  sin a1 ... sin a_n), an (n+1)-vector.
inline std::vector<Jet> unit_sphere_point(const std::vector<Jet>& angles) {
    const std::size_t n = angles.size();
    if (n == 0) throw std::invalid_argument("unit_sphere_point: empty chart point");
    std::vector<Jet> z;
    z.reserve(n + 1);
    Jet prefix(1.0, angles.front().dim());
    for (std::size_t i = 0; i < n; ++i) {
        z.push_back(prefix * cos(angles[i]));
        prefix = prefix * sin(angles[i]);
    }
    z.push_back(prefix);
    return z;
}

// ---------------------------------------------------------------------------
// Patch constructors
// ---------------------------------------------------------------------------

/// Round n-sphere of radius r in R^{n+q}, embedded through the linear
/// inclusion R^{n+1} subset R^{n+q}.  Totally umbilical with A_1 = -(1/r) I
/// in the supplied frame and q-1 flat normal directions, so the mean
/// curvature coordinates are (-n/r, 0, ..., 0).
inline ImmersedPatch umbilical_sphere_patch(int n, int q, double r) {
    if (n < 1 || q < 1 || r <= 0.0)
        throw std::invalid_argument("umbilical_sphere_patch: need n >= 1, q >= 1, r > 0");
    ImmersedPatch patch;
    std::ostringstream name;
    name << "umbilical(n=" << n << ",q=" << q << ",r=" << r << ")";
    patch.name = name.str();
    patch.chart = hyperspherical_chart(n);
    patch.ambient = AmbientSpec::euclidean(n + q);
    const int N = n + q;
    patch.map = [n, q, r, N](const std::vector<Jet>& x) {
        const std::vector<Jet> s = unit_sphere_point(x);
        const int dim = x.front().dim();
        std::vector<Jet> z(static_cast<std::size_t>(N), Jet(0.0, dim));
        for (int a = 0; a <= n; ++a) z[static_cast<std::size_t>(a)] = r * s[static_cast<std::size_t>(a)];
        return z;
    };
    patch.normal_frame = [n, q, N](const std::vector<Jet>& x) {
        const std::vector<Jet> s = unit_sphere_point(x);
        const int dim = x.front().dim();
        std::vector<std::vector<Jet>> frame(
            static_cast<std::size_t>(q),
            std::vector<Jet>(static_cast<std::size_t>(N), Jet(0.0, dim)));
        for (int a = 0; a <= n; ++a) frame[0][static_cast<std::size_t>(a)] = s[static_cast<std::size_t>(a)];
        for (int beta = 1; beta < q; ++beta)
            frame[static_cast<std::size_t>(beta)][static_cast<std::size_t>(n + beta)] = Jet(1.0, dim);
        return frame;
    };
    return patch;
}

/// Geodesic n-sphere of radius rho inside the round sphere S^{n+q}(r),
/// with q-1 flat normal directions supplied by constant coordinate vectors.
/// Totally umbilical within the sphere: A_1 = -(h/(rho r)) I where
/// h = sqrt(r^2 - rho^2), so |H|^2 = n^2 (r^2 - rho^2) / (rho^2 r^2).
inline ImmersedPatch sphere_in_sphere_patch(int n, int q, double rho, double r) {
    if (n < 1 || q < 1 || r <= 0.0)
        throw std::invalid_argument("sphere_in_sphere_patch: need n >= 1, q >= 1, r > 0");
    if (rho <= 0.0 || rho >= r)
        throw std::invalid_argument("sphere_in_sphere_patch: need 0 < rho < r");
    ImmersedPatch patch;
    std::ostringstream name;
    name << "sphere_in_sphere(n=" << n << ",q=" << q << ",rho=" << rho << ",r=" << r << ")";
    patch.name = name.str();
    patch.chart = hyperspherical_chart(n);
    patch.ambient = AmbientSpec::sphere(n + q + 1, r);
    const double h = std::sqrt(r * r - rho * rho);
    const int N = n + q + 1;
    patch.map = [n, rho, h, N](const std::vector<Jet>& x) {
        const std::vector<Jet> s = unit_sphere_point(x);
        const int dim = x.front().dim();
        std::vector<Jet> z(static_cast<std::size_t>(N), Jet(0.0, dim));
        for (int a = 0; a <= n; ++a) z[static_cast<std::size_t>(a)] = rho * s[static_cast<std::size_t>(a)];
        z[static_cast<std::size_t>(n + 1)] = Jet(h, dim);
        return z;
    };
    patch.normal_frame = [n, q, rho, r, h, N](const std::vector<Jet>& x) {
        const std::vector<Jet> s = unit_sphere_point(x);
        const int dim = x.front().dim();
        std::vector<std::vector<Jet>> frame(
            static_cast<std::size_t>(q),
            std::vector<Jet>(static_cast<std::size_t>(N), Jet(0.0, dim)));
        for (int a = 0; a <= n; ++a)
            frame[0][static_cast<std::size_t>(a)] = (h / r) * s[static_cast<std::size_t>(a)];
        frame[0][static_cast<std::size_t>(n + 1)] = Jet(-rho / r, dim);
        for (int beta = 1; beta < q; ++beta)
            frame[static_cast<std::size_t>(beta)][static_cast<std::size_t>(n + 1 + beta)] = Jet(1.0, dim);
        return frame;
    };
    return patch;
}

/// The quadratic (Veronese-type) minimal immersion of the round unit
/// 2-sphere into S^4(1/sqrt(3)).  Component scaling is locked in by the
/// numeric gates in checked_veronese_patch below; use that entry point.
inline ImmersedPatch veronese_patch() {
    ImmersedPatch patch;
    patch.name = "veronese";
    patch.chart = hyperspherical_chart(2);
    patch.ambient = AmbientSpec::sphere(5, 1.0 / std::sqrt(3.0));
    patch.map = [](const std::vector<Jet>& x) {
        const std::vector<Jet> p = unit_sphere_point(x);  // (p1, p2, p3) on S^2(1)
        const double is3 = 1.0 / std::sqrt(3.0);
        std::vector<Jet> z;
        z.reserve(5);
        z.push_back(p[0] * p[1]);
        z.push_back(p[0] * p[2]);
        z.push_back(p[1] * p[2]);
        z.push_back(0.5 * (p[0] * p[0] - p[1] * p[1]));
        z.push_back(0.5 * is3 * (p[0] * p[0] + p[1] * p[1] - 2.0 * (p[2] * p[2])));
        return z;
    };
    return patch;
}

/// Construction gate for the quadratic sphere immersion: verifies, at
/// pseudo-random chart points, that the image lies on the sphere of radius
/// 1/sqrt(3) and that the pullback metric is the round metric of S^2(1)
/// (both within 1e-10).  Throws std::runtime_error if either gate fails, so
/// a wrong component scaling can never propagate into downstream checks.
inline ImmersedPatch checked_veronese_patch() {
    ImmersedPatch patch = veronese_patch();
    Rng rng(20240615u);
    const double radius = patch.ambient.radius;
    for (int trial = 0; trial < 64; ++trial) {
        Eigen::VectorXd x(2);
        x[0] = rng.uniform(0.05, std::numbers::pi - 0.05);
        x[1] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const std::vector<Jet> z = patch.map(seed_point(x));
        double norm_sq = 0.0;
        for (const Jet& comp : z) norm_sq += comp.value() * comp.value();
        if (std::abs(std::sqrt(norm_sq) - radius) > 1e-10)
            throw std::runtime_error("checked_veronese_patch: image leaves the target sphere");

        Eigen::MatrixXd jac(5, 2);
        for (int a = 0; a < 5; ++a) jac.row(a) = z[static_cast<std::size_t>(a)].gradient().transpose();
        Eigen::Matrix2d metric = jac.transpose() * jac;
        Eigen::Matrix2d round;
        const double s = std::sin(x[0]);
        round << 1.0, 0.0, 0.0, s * s;
        if ((metric - round).norm() > 1e-10)
            throw std::runtime_error(
                "checked_veronese_patch: pullback metric is not the round metric of S^2(1)");
    }
    return patch;
}

/// Torus of revolution in R^3: tube of radius a around a circle of radius
/// R > a.  Outward normal supplied analytically.
inline ImmersedPatch revolution_torus_patch(double R, double a) {
    if (R <= a || a <= 0.0)
        throw std::invalid_argument("revolution_torus_patch: need R > a > 0");
    ImmersedPatch patch;
    std::ostringstream name;
    name << "torus_revolution(R=" << R << ",a=" << a << ")";
    patch.name = name.str();
    patch.chart.axes = {{0.0, 2.0 * std::numbers::pi, true}, {0.0, 2.0 * std::numbers::pi, true}};
    patch.ambient = AmbientSpec::euclidean(3);
    patch.map = [R, a](const std::vector<Jet>& x) {
        const Jet ring = R + a * cos(x[1]);
        return std::vector<Jet>{ring * cos(x[0]), ring * sin(x[0]), a * sin(x[1])};
    };
    patch.normal_frame = [](const std::vector<Jet>& x) {
        return std::vector<std::vector<Jet>>{
            {cos(x[1]) * cos(x[0]), cos(x[1]) * sin(x[0]), sin(x[1])}};
    };
    return patch;
}

/// Product torus S^1(a) x S^1(b) in R^4: flat, codimension two, with
/// analytic normal frame (one radial direction per circle factor).
inline ImmersedPatch product_torus_patch(double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw std::invalid_argument("product_torus_patch: need a, b > 0");
    ImmersedPatch patch;
    std::ostringstream name;
    name << "torus_product(a=" << a << ",b=" << b << ")";
    patch.name = name.str();
    patch.chart.axes = {{0.0, 2.0 * std::numbers::pi, true}, {0.0, 2.0 * std::numbers::pi, true}};
    patch.ambient = AmbientSpec::euclidean(4);
    patch.map = [a, b](const std::vector<Jet>& x) {
        return std::vector<Jet>{a * cos(x[0]), a * sin(x[0]), b * cos(x[1]), b * sin(x[1])};
    };
    patch.normal_frame = [](const std::vector<Jet>& x) {
        const int dim = x.front().dim();
        return std::vector<std::vector<Jet>>{
            {cos(x[0]), sin(x[0]), Jet(0.0, dim), Jet(0.0, dim)},
            {Jet(0.0, dim), Jet(0.0, dim), cos(x[1]), sin(x[1])}};
    };
    return patch;
}

// ---------------------------------------------------------------------------
// Expected facts
// ---------------------------------------------------------------------------

/// Outcome of one machine-checkable expectation.
struct FactResult {
    bool passed = false;
    double measured = 0.0;   ///< the quantity the check computed
    double threshold = 0.0;  ///< the bound it was compared against
    std::string detail;      ///< human-readable one-liner
};

/// A named expectation together with the public operation that verifies it.
struct ExpectedFact {
    std::string name;
    std::string operation;  ///< e.g. "minimality_residual", "newton_table"
    std::function<FactResult()> run;
};

struct GalleryEntry {
    std::string name;  ///< registry name, without parameters
    std::map<std::string, double> params;
    ImmersedPatch patch;
    std::vector<ExpectedFact> facts;
};

namespace detail {

inline FactResult bounded(double measured, double threshold, std::string detail) {
    return {measured <= threshold, measured, threshold, std::move(detail)};
}

inline FactResult exceeds(double measured, double threshold, std::string detail) {
    return {measured >= threshold, measured, threshold, std::move(detail)};
}

inline Eigen::VectorXd random_chart_point(const Chart& chart, Rng& rng) {
    Eigen::VectorXd x(chart.axes.size());
    for (std::size_t i = 0; i < chart.axes.size(); ++i) {
        const ChartAxis& axis = chart.axes[i];
        const double pad = axis.periodic ? 0.0 : 0.05 * (axis.hi - axis.lo);
        x[static_cast<long>(i)] = rng.uniform(axis.lo + pad, axis.hi - pad);
    }
    return x;
}

/// Fiber options for umbilical gallery checks: exact scheme whenever the
/// codimension admits one, otherwise a small Monte Carlo fallback (the
/// umbilical facts below are per-draw identities, so the sample count does
/// not affect their values).
inline FiberOptions gallery_fiber(int q) {
    FiberOptions opt;
    opt.group = Group::O;
    if (q <= 2) {
        opt.scheme = FiberScheme::exact;
    } else {
        opt.scheme = FiberScheme::monte_carlo;
        opt.samples = 64;
        opt.seed = 97531u;
    }
    return opt;
}

inline int gallery_resolution(int n) {
    if (n <= 2) return 16;
    if (n == 3) return 8;
    return 4;
}

}  // namespace detail

/// Closed form for the mixed symmetric functions of a totally umbilical
/// system with mean curvature coordinates lambda:
/// sigma_u = n! / (n^{|u|} (n-|u|)! u!) * lambda^u.
inline double umbilical_sigma_closed_form(int n, const MultiIndex& u,
                                          const Eigen::VectorXd& lambda) {
    if (u.degree() > n) return 0.0;
    double value = 1.0;
    for (int m = n - u.degree() + 1; m <= n; ++m) value *= m;  // n! / (n-|u|)!
    value /= std::pow(static_cast<double>(n), u.degree());
    for (int alpha = 0; alpha < u.size(); ++alpha) {
        double factorial = 1.0;
        for (int m = 2; m <= u[alpha]; ++m) factorial *= m;
        value *= std::pow(lambda[alpha], u[alpha]) / factorial;
    }
    return value;
}

// ---------------------------------------------------------------------------
// Gallery entries (patch + expectations)
// ---------------------------------------------------------------------------

inline GalleryEntry umbilical_sphere_entry(int n, int q, double r) {
    GalleryEntry entry;
    entry.name = "umbilical";
    entry.params = {{"n", static_cast<double>(n)}, {"q", static_cast<double>(q)}, {"r", r}};
    entry.patch = umbilical_sphere_patch(n, q, r);
    const ImmersedPatch patch = entry.patch;

    entry.facts.push_back(
        {"umbilicity", "evaluate_patch", [patch, n, q]() -> FactResult {
             Rng rng(101u);
             double worst = 0.0;
             for (int trial = 0; trial < 20; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 for (int beta = 0; beta < q; ++beta) {
                     const double trace = data.shape[static_cast<std::size_t>(beta)].trace();
                     const Eigen::MatrixXd dev =
                         data.shape[static_cast<std::size_t>(beta)] -
                         (trace / n) * Eigen::MatrixXd::Identity(n, n);
                     worst = std::max(worst, dev.norm());
                 }
             }
             return detail::bounded(worst, 1e-10,
                                    "max deviation of A_beta from (tr A_beta / n) I");
         }});

    entry.facts.push_back(
        {"sigma-closed-form", "newton_table", [patch, n, q]() -> FactResult {
             Rng rng(202u);
             double worst = 0.0;
             for (int trial = 0; trial < 20; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 const OperatorSystem rotated =
                     rotate_system(OperatorSystem(data.shape), haar_sample(q, Group::O, rng));
                 const NewtonTable table = newton_table(rotated, n);
                 Eigen::VectorXd lambda(q);
                 for (int beta = 0; beta < q; ++beta) lambda[beta] = rotated[beta].trace();
                 for (const MultiIndex& u : table.indices) {
                     const double expected = umbilical_sigma_closed_form(n, u, lambda);
                     worst = std::max(worst, std::abs(table.sigma_at(u) - expected));
                 }
             }
             return detail::bounded(
                 worst, 1e-8, "max |sigma_u - multinomial closed form| over random frames");
         }});

    entry.facts.push_back(
        {"top-degree-minimal", "minimality_residual", [patch, n, q]() -> FactResult {
             const FiberOptions fiber = detail::gallery_fiber(q);
             const int res = detail::gallery_resolution(n);
             double worst = 0.0;
             std::string worst_u;
             for (const MultiIndex& u : enumerate_multi_indices(q, n)) {
                 if (u.degree() != n) continue;
                 const auto report = minimality_residual(patch, u, res, fiber, 1e-6);
                 if (report.sup_residual > worst) {
                     worst = report.sup_residual;
                     worst_u = u.to_string();
                 }
             }
             return detail::bounded(
                 worst, 1e-6, "max sup-residual over all |u| = n; worst at u = " + worst_u);
         }});

    entry.facts.push_back(
        {"not-minimal-below-top", "minimality_residual", [patch, n, q, r]() -> FactResult {
             const FiberOptions fiber = detail::gallery_fiber(q);
             const int res = detail::gallery_resolution(n);
             const auto report =
                 minimality_residual(patch, MultiIndex::zero(q), res, fiber, 1e-6);
             const double expected = static_cast<double>(n) / r;
             const double deviation = std::abs(report.sup_residual - expected);
             return detail::bounded(deviation, 1e-8,
                                    "u = 0 residual equals |H| = n/r (negative control)");
         }});
    return entry;
}

inline GalleryEntry sphere_in_sphere_entry(int n, int q, double rho, double r, int k) {
    GalleryEntry entry;
    entry.name = "sphere_in_sphere";
    entry.params = {{"n", static_cast<double>(n)},
                    {"q", static_cast<double>(q)},
                    {"rho", rho},
                    {"r", r},
                    {"k", static_cast<double>(k)}};
    entry.patch = sphere_in_sphere_patch(n, q, rho, r);
    const ImmersedPatch patch = entry.patch;

    entry.facts.push_back(
        {"umbilicity", "evaluate_patch", [patch, n, q, rho, r]() -> FactResult {
             Rng rng(303u);
             const double kappa = std::sqrt(r * r - rho * rho) / (rho * r);
             double worst = 0.0;
             for (int trial = 0; trial < 20; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 worst = std::max(worst, (data.shape[0] +
                                          kappa * Eigen::MatrixXd::Identity(n, n))
                                             .norm());
                 for (int beta = 1; beta < q; ++beta)
                     worst = std::max(worst, data.shape[static_cast<std::size_t>(beta)].norm());
             }
             return detail::bounded(
                 worst, 1e-10, "A_1 = -(h/(rho r)) I and flat extra normal directions");
         }});

    if (q <= 2 && n > q * k && k % 2 == 0) {
        const double h_sq = (r * r - rho * rho) / (rho * rho * r * r);
        const double gap = umbilical_balance_gap(n, q, k, n * n * h_sq, 1.0 / (r * r));
        const bool critical = std::abs(gap) <= 1e-9;
        entry.facts.push_back(
            {critical ? "balance-critical" : "balance-violated", "minimality_residual",
             [patch, n, q, k, critical]() -> FactResult {
                 const FiberOptions fiber = detail::gallery_fiber(q);
                 const int res = detail::gallery_resolution(n);
                 std::vector<int> entries(static_cast<std::size_t>(q), k);
                 const auto report =
                     minimality_residual(patch, MultiIndex(entries), res, fiber, 1e-5);
                 if (critical)
                     return detail::bounded(report.sup_residual, 1e-5,
                                            "u = (k,...,k) residual at balanced radius");
                 return detail::exceeds(report.sup_residual, 1e-4,
                                        "u = (k,...,k) residual away from balanced radius");
             }});
    }
    return entry;
}

inline GalleryEntry veronese_entry() {
    GalleryEntry entry;
    entry.name = "veronese";
    entry.patch = checked_veronese_patch();
    const ImmersedPatch patch = entry.patch;

    entry.facts.push_back({"minimal", "evaluate_patch", [patch]() -> FactResult {
                               Rng rng(404u);
                               double worst = 0.0;
                               for (int trial = 0; trial < 100; ++trial) {
                                   const auto data = evaluate_patch(
                                       patch, detail::random_chart_point(patch.chart, rng));
                                   Eigen::Vector2d h(data.shape[0].trace(), data.shape[1].trace());
                                   worst = std::max(worst, h.norm());
                               }
                               return detail::bounded(worst, 1e-8, "|H| at 100 random points");
                           }});

    entry.facts.push_back(
        {"A-squared-is-2I", "evaluate_patch", [patch]() -> FactResult {
             Rng rng(505u);
             double worst = 0.0;
             for (int trial = 0; trial < 100; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 const Eigen::Matrix2d a_sq =
                     data.shape[0] * data.shape[0] + data.shape[1] * data.shape[1];
                 worst = std::max(worst, (a_sq - 2.0 * Eigen::Matrix2d::Identity()).norm());
             }
             return detail::bounded(worst, 1e-8, "|A_1^2 + A_2^2 - 2I| at 100 random points");
         }});

    entry.facts.push_back(
        {"B-contraction-metric", "evaluate_patch", [patch]() -> FactResult {
             // <B(X,Z), B(Y,Z)> = <X,Y> <Z,Z> for tangent vectors expressed in
             // the orthonormal tangent frame.
             Rng rng(606u);
             double worst = 0.0;
             for (int trial = 0; trial < 100; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 Eigen::Vector2d X(rng.normal(), rng.normal());
                 Eigen::Vector2d Y(rng.normal(), rng.normal());
                 Eigen::Vector2d Z(rng.normal(), rng.normal());
                 double lhs = 0.0;
                 for (const auto& A : data.shape.matrices)
                     lhs += (X.dot(A * Z)) * (Y.dot(A * Z));
                 worst = std::max(worst, std::abs(lhs - X.dot(Y) * Z.dot(Z)));
             }
             return detail::bounded(worst, 1e-7,
                                    "|<B(X,Z),B(Y,Z)> - <X,Y><Z,Z>| at random vectors");
         }});

    entry.facts.push_back(
        {"trace-B-A-squared-zero", "example4_condition", [patch]() -> FactResult {
             Rng rng(707u);
             double worst = 0.0;
             for (int trial = 0; trial < 100; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 const Eigen::Matrix2d a_sq =
                     data.shape[0] * data.shape[0] + data.shape[1] * data.shape[1];
                 Eigen::Vector2d tr_b_a2((data.shape[0] * a_sq).trace(),
                                         (data.shape[1] * a_sq).trace());
                 worst = std::max(worst, tr_b_a2.norm());
             }
             return detail::bounded(worst, 1e-8, "|tr(B o A^2)| at 100 random points");
         }});

    entry.facts.push_back(
        {"double-raise-minimal", "minimality_residual", [patch]() -> FactResult {
             FiberOptions fiber;
             fiber.group = Group::O;
             fiber.scheme = FiberScheme::exact;
             double worst = 0.0;
             for (const auto& u : {MultiIndex({2, 0}), MultiIndex({0, 2})}) {
                 const auto report = minimality_residual(patch, u, 24, fiber, 1e-6);
                 worst = std::max(worst, report.sup_residual);
             }
             return detail::bounded(worst, 1e-6, "sup residual for u = (2,0) and (0,2)");
         }});

    entry.facts.push_back(
        {"example4-condition-zero", "example4_condition", [patch]() -> FactResult {
             Rng rng(808u);
             double worst = 0.0;
             for (int trial = 0; trial < 50; ++trial) {
                 const Eigen::VectorXd x = detail::random_chart_point(patch.chart, rng);
                 worst = std::max(worst, example4_condition(patch, x).norm());
             }
             return detail::bounded(worst, 1e-6, "|example4 residual vector| at random points");
         }});
    return entry;
}

inline GalleryEntry revolution_torus_entry(double R, double a) {
    GalleryEntry entry;
    entry.name = "torus_revolution";
    entry.params = {{"R", R}, {"a", a}};
    entry.patch = revolution_torus_patch(R, a);
    const ImmersedPatch patch = entry.patch;

    entry.facts.push_back({"area-closed-form", "patch_volume", [patch, R, a]() -> FactResult {
                               const double area = patch_volume(patch, 32);
                               const double expected =
                                   4.0 * std::numbers::pi * std::numbers::pi * R * a;
                               return detail::bounded(std::abs(area / expected - 1.0), 1e-10,
                                                      "relative error of area vs 4 pi^2 R a");
                           }});

    entry.facts.push_back(
        {"not-minimal", "minimality_residual", [patch]() -> FactResult {
             FiberOptions fiber;
             fiber.scheme = FiberScheme::exact;
             const auto report =
                 minimality_residual(patch, MultiIndex::zero(1), 16, fiber, 1e-6);
             return detail::exceeds(report.sup_residual, 1e-2,
                                    "u = 0 residual = |H| (negative control)");
         }});

    entry.facts.push_back(
        {"total-gauss-curvature-zero", "functional_value", [patch]() -> FactResult {
             FiberOptions fiber;
             fiber.scheme = FiberScheme::exact;
             const auto total = functional_value(patch, MultiIndex({2}), 32, fiber);
             return detail::bounded(std::abs(total.value), 1e-9,
                                    "integral of sigma_2 over the torus (Gauss-Bonnet)");
         }});
    return entry;
}

inline GalleryEntry product_torus_entry(double a, double b) {
    GalleryEntry entry;
    entry.name = "torus_product";
    entry.params = {{"a", a}, {"b", b}};
    entry.patch = product_torus_patch(a, b);
    const ImmersedPatch patch = entry.patch;

    entry.facts.push_back({"area-closed-form", "patch_volume", [patch, a, b]() -> FactResult {
                               const double area = patch_volume(patch, 32);
                               const double expected =
                                   4.0 * std::numbers::pi * std::numbers::pi * a * b;
                               return detail::bounded(std::abs(area / expected - 1.0), 1e-10,
                                                      "relative error of area vs 4 pi^2 a b");
                           }});

    entry.facts.push_back(
        {"rank-one-shape-operators", "evaluate_patch", [patch]() -> FactResult {
             Rng rng(909u);
             double worst = 0.0;
             for (int trial = 0; trial < 20; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 for (const auto& A : data.shape.matrices) {
                     Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
                     worst = std::max(worst, svd.singularValues()[1]);
                 }
             }
             return detail::bounded(worst, 1e-10,
                                    "second singular value of each shape operator");
         }});

    entry.facts.push_back(
        {"not-minimal", "minimality_residual", [patch, a, b]() -> FactResult {
             FiberOptions fiber;
             fiber.scheme = FiberScheme::exact;
             const auto report =
                 minimality_residual(patch, MultiIndex::zero(2), 16, fiber, 1e-6);
             const double expected = std::sqrt(1.0 / (a * a) + 1.0 / (b * b));
             return detail::bounded(std::abs(report.sup_residual - expected), 1e-8,
                                    "u = 0 residual equals |H| (negative control)");
         }});

    entry.facts.push_back(
        {"double-raise-minimal", "minimality_residual", [patch]() -> FactResult {
             // For surfaces the degree-two transformations vanish identically
             // (polarized Cayley-Hamilton), so every surface in R^4 is
             // critical for the doubly-raised indices; the averaged
             // coefficient integrates to a topological quantity.
             FiberOptions fiber;
             fiber.scheme = FiberScheme::exact;
             const auto report =
                 minimality_residual(patch, MultiIndex({2, 0}), 16, fiber, 1e-6);
             return detail::bounded(report.sup_residual, 1e-8,
                                    "sup residual for u = (2,0) on a flat torus");
         }});

    entry.facts.push_back(
        {"averaged-top-coefficient-zero", "sigma_hat", [patch]() -> FactResult {
             // Gauss equation: sum_beta det A_beta = K = 0 on the flat torus,
             // and the fiber average of the (2,0) coefficient is K/2.
             FiberOptions fiber;
             fiber.scheme = FiberScheme::exact;
             Rng rng(111u);
             double worst = 0.0;
             for (int trial = 0; trial < 20; ++trial) {
                 const auto data =
                     evaluate_patch(patch, detail::random_chart_point(patch.chart, rng));
                 const auto avg = sigma_hat(OperatorSystem(data.shape), MultiIndex({2, 0}), fiber);
                 worst = std::max(worst, std::abs(avg.value));
             }
             return detail::bounded(worst, 1e-12, "|sigma_hat_(2,0)| pointwise (K/2 = 0)");
         }});
    return entry;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

inline std::vector<std::string> gallery_names() {
    return {"umbilical", "sphere_in_sphere", "veronese", "torus_revolution", "torus_product"};
}

namespace detail {

inline std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> params;
    if (text.empty()) return params;
    std::istringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw std::invalid_argument("gallery: malformed parameter '" + item +
                                        "' (expected key=value)");
        const std::string key = item.substr(0, eq);
        try {
            std::size_t used = 0;
            const double value = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
            params[key] = value;
        } catch (const std::exception&) {
            throw std::invalid_argument("gallery: cannot parse value in '" + item + "'");
        }
    }
    return params;
}

inline double take_param(std::map<std::string, double>& params, const std::string& key,
                         double fallback) {
    const auto it = params.find(key);
    if (it == params.end()) return fallback;
    const double value = it->second;
    params.erase(it);
    return value;
}

inline int take_int_param(std::map<std::string, double>& params, const std::string& key,
                          int fallback) {
    const double value = take_param(params, key, static_cast<double>(fallback));
    const int rounded = static_cast<int>(std::lround(value));
    if (std::abs(value - rounded) > 1e-12)
        throw std::invalid_argument("gallery: parameter '" + key + "' must be an integer");
    return rounded;
}

inline void reject_leftovers(const std::map<std::string, double>& params,
                             const std::string& name) {
    if (!params.empty())
        throw std::invalid_argument("gallery: unknown parameter '" + params.begin()->first +
                                    "' for patch '" + name + "'");
}

}  // namespace detail

/// Build a gallery entry from a spec string "name" or "name:key=value,...".
/// Defaults: umbilical n=2,q=1,r=1; sphere_in_sphere n=3,q=1,r=1,k=2 with
/// rho at the balanced radius; veronese (no parameters);
/// torus_revolution R=2,a=0.5; torus_product a=1,b=0.7.
inline GalleryEntry make_gallery_entry(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    auto params = detail::parse_params(
        colon == std::string::npos ? std::string() : spec.substr(colon + 1));

    if (name == "umbilical") {
        const int n = detail::take_int_param(params, "n", 2);
        const int q = detail::take_int_param(params, "q", 1);
        const double r = detail::take_param(params, "r", 1.0);
        detail::reject_leftovers(params, name);
        return umbilical_sphere_entry(n, q, r);
    }
    if (name == "sphere_in_sphere") {
        const int n = detail::take_int_param(params, "n", 3);
        const int q = detail::take_int_param(params, "q", 1);
        const double r = detail::take_param(params, "r", 1.0);
        const int k = detail::take_int_param(params, "k", 2);
        const double default_rho =
            n > q * k ? critical_small_sphere_radius(n, q, k, r) : 0.5 * r;
        const double rho = detail::take_param(params, "rho", default_rho);
        detail::reject_leftovers(params, name);
        return sphere_in_sphere_entry(n, q, rho, r, k);
    }
    if (name == "veronese") {
        detail::reject_leftovers(params, name);
        return veronese_entry();
    }
    if (name == "torus_revolution") {
        const double R = detail::take_param(params, "R", 2.0);
        const double a = detail::take_param(params, "a", 0.5);
        detail::reject_leftovers(params, name);
        return revolution_torus_entry(R, a);
    }
    if (name == "torus_product") {
        const double a = detail::take_param(params, "a", 1.0);
        const double b = detail::take_param(params, "b", 0.7);
        detail::reject_leftovers(params, name);
        return product_torus_entry(a, b);
    }
    throw std::invalid_argument("gallery: unknown patch '" + name + "' (known: umbilical, " +
                                "sphere_in_sphere, veronese, torus_revolution, torus_product)");
}

/// Convenience: just the patch of a registry spec (used by the CLI
/// minimality/variation subcommands).
inline ImmersedPatch make_gallery_patch(const std::string& spec) {
    return make_gallery_entry(spec).patch;
}

}  // namespace gnt
