#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gnt/jet.hpp"
#include "gnt/operator_system.hpp"

namespace gnt {

/// Ambient space form the patch is immersed in: Euclidean R^N (curvature 0)
/// or the round sphere S^{N-1}(radius) sitting inside R^N (curvature
/// 1/radius^2).  All ambient data is expressed in the surrounding Cartesian
/// coordinates either way.
struct AmbientSpec {
    enum class Kind { euclidean, sphere };

    Kind kind = Kind::euclidean;
    int coord_dim = 0;     ///< N, the Cartesian coordinate dimension
    double radius = 0.0;   ///< sphere radius (kind == sphere only)

    static AmbientSpec euclidean(int coord_dim) {
        if (coord_dim < 1) throw std::invalid_argument("AmbientSpec: coord_dim must be >= 1");
        return {Kind::euclidean, coord_dim, 0.0};
    }

    static AmbientSpec sphere(int coord_dim, double radius) {
        if (coord_dim < 2) throw std::invalid_argument("AmbientSpec: sphere needs coord_dim >= 2");
        if (radius <= 0.0) throw std::invalid_argument("AmbientSpec: sphere radius must be positive");
        return {Kind::sphere, coord_dim, radius};
    }

    /// Dimension of the ambient manifold itself.
    int manifold_dim() const { return kind == Kind::sphere ? coord_dim - 1 : coord_dim; }

    /// Sectional curvature of the space form.
    double curvature() const { return kind == Kind::sphere ? 1.0 / (radius * radius) : 0.0; }
};

/// One chart axis.  Periodic axes are integrated with the uniform rule
/// (spectrally accurate for smooth periodic integrands); non-periodic axes
/// with Gauss-Legendre nodes, which stay strictly inside the interval -- so
/// charts may degenerate at their endpoints (e.g. spherical poles) without
/// poisoning the quadrature.
struct ChartAxis {
    double lo = 0.0;
    double hi = 1.0;
    bool periodic = false;
};

struct Chart {
    std::vector<ChartAxis> axes;

    int dim() const { return static_cast<int>(axes.size()); }

    void validate() const {
        if (axes.empty()) throw std::invalid_argument("Chart: need at least one axis");
        for (const auto& a : axes)
            if (!(a.hi > a.lo)) throw std::invalid_argument("Chart: axis must have hi > lo");
    }
};

/// How first and second derivatives of the chart map are obtained.
enum class DerivativeBackend {
    analytic,           ///< propagate second-order jets through the map (machine precision)
    finite_difference   ///< central differences with per-axis step 1e-4 * extent
};

/// Thrown when the differential of the chart map is (numerically) rank
/// deficient at an evaluation point.
class NotImmersedError : public std::runtime_error {
public:
    explicit NotImmersedError(const std::string& what) : std::runtime_error(what) {}
};

/// A parametrized patch: a chart map into the ambient coordinates, with an
/// optional analytic orthonormal normal frame.  When no frame is supplied a
/// deterministic orthonormal completion is computed pointwise (any frame
/// gives the same averaged invariants; an analytic frame additionally pins
/// the per-frame quantities used by closed-form comparisons).
struct ImmersedPatch {
    using MapFn = std::function<std::vector<Jet>(const std::vector<Jet>&)>;
    using FrameFn = std::function<std::vector<std::vector<Jet>>(const std::vector<Jet>&)>;

    std::string name;
    Chart chart;
    AmbientSpec ambient;
    MapFn map;
    std::optional<FrameFn> normal_frame;

    int dim() const { return chart.dim(); }
    int codim() const { return ambient.manifold_dim() - chart.dim(); }

    void validate() const {
        chart.validate();
        if (!map) throw std::invalid_argument("ImmersedPatch: missing chart map");
        if (codim() < 1)
            throw std::invalid_argument("ImmersedPatch: codimension must be >= 1");
    }
};

/// Everything the extrinsic-geometry pipeline extracts at one chart point.
struct PatchPointData {
    Eigen::VectorXd chart_point;             ///< n, the evaluation point
    Eigen::VectorXd position;                ///< N
    Eigen::MatrixXd jacobian;                ///< N x n
    Eigen::MatrixXd tangent;                 ///< N x n, orthonormal
    Eigen::MatrixXd tangent_preimage;        ///< n x n chart vectors: d(map) w_i = tangent_i
    Eigen::MatrixXd normal;                  ///< N x q, orthonormal, normal to the patch
    OperatorSystem shape;                    ///< q shape operators in the tangent frame
    double volume_density = 0.0;             ///< sqrt(det g) of the chart at this point
};

namespace detail {

/// Evaluate the chart map as jets, either by direct propagation or by
/// reconstructing value/Jacobian/Hessian from central differences of plain
/// evaluations.
inline std::vector<Jet> evaluate_map(const ImmersedPatch& patch, const Eigen::VectorXd& x,
                                     DerivativeBackend backend) {
    const int m = patch.dim();
    if (x.size() != m) throw std::invalid_argument("evaluate_map: point/chart dimension mismatch");
    if (backend == DerivativeBackend::analytic) return patch.map(seed_point(x));

    auto plain = [&](const Eigen::VectorXd& p) {
        std::vector<Jet> in;
        in.reserve(static_cast<std::size_t>(m));
        for (int i = 0; i < m; ++i) in.emplace_back(p[i], m);
        const auto out = patch.map(in);
        Eigen::VectorXd v(static_cast<long>(out.size()));
        for (std::size_t a = 0; a < out.size(); ++a) v[static_cast<long>(a)] = out[a].value();
        return v;
    };

    Eigen::VectorXd h(m);
    for (int i = 0; i < m; ++i)
        h[i] = 1e-4 * (patch.chart.axes[static_cast<std::size_t>(i)].hi -
                       patch.chart.axes[static_cast<std::size_t>(i)].lo);

    const Eigen::VectorXd f0 = plain(x);
    const int N = static_cast<int>(f0.size());
    std::vector<Eigen::VectorXd> fp(static_cast<std::size_t>(m)), fm(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd dx = Eigen::VectorXd::Zero(m);
        dx[i] = h[i];
        fp[static_cast<std::size_t>(i)] = plain(x + dx);
        fm[static_cast<std::size_t>(i)] = plain(x - dx);
    }

    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(N));
    Eigen::MatrixXd grad(N, m);
    std::vector<Eigen::MatrixXd> hess(static_cast<std::size_t>(N), Eigen::MatrixXd::Zero(m, m));
    for (int i = 0; i < m; ++i) {
        grad.col(i) = (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) /
                      (2.0 * h[i]);
        const Eigen::VectorXd dii = (fp[static_cast<std::size_t>(i)] - 2.0 * f0 +
                                     fm[static_cast<std::size_t>(i)]) /
                                    (h[i] * h[i]);
        for (int a = 0; a < N; ++a) hess[static_cast<std::size_t>(a)](i, i) = dii[a];
    }
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            Eigen::VectorXd dx = Eigen::VectorXd::Zero(m), dy = Eigen::VectorXd::Zero(m);
            dx[i] = h[i];
            dy[j] = h[j];
            const Eigen::VectorXd mixed =
                (plain(x + dx + dy) - plain(x + dx - dy) - plain(x - dx + dy) +
                 plain(x - dx - dy)) /
                (4.0 * h[i] * h[j]);
            for (int a = 0; a < N; ++a) {
                hess[static_cast<std::size_t>(a)](i, j) = mixed[a];
                hess[static_cast<std::size_t>(a)](j, i) = mixed[a];
            }
        }
    }
    for (int a = 0; a < N; ++a)
        out.push_back(
            Jet::from_parts(f0[a], grad.row(a).transpose(), hess[static_cast<std::size_t>(a)]));
    return out;
}

/// Deterministic orthonormal completion: greedily pick the standard basis
/// vector with the largest residual after projecting out the columns of
/// `forbidden`, until `count` vectors are found.
inline Eigen::MatrixXd orthonormal_completion(const Eigen::MatrixXd& forbidden, int count) {
    const int N = static_cast<int>(forbidden.rows());
    Eigen::MatrixXd basis = forbidden;
    Eigen::MatrixXd picked(N, count);
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd best;
        double best_norm = -1.0;
        for (int c = 0; c < N; ++c) {
            Eigen::VectorXd cand = Eigen::VectorXd::Unit(N, c);
            cand -= basis * (basis.transpose() * cand);
            const double nrm = cand.norm();
            if (nrm > best_norm) {
                best_norm = nrm;
                best = cand;
            }
        }
        if (best_norm < 1e-8)
            throw std::runtime_error("orthonormal_completion: no independent direction left");
        best /= best_norm;
        basis.conservativeResize(N, basis.cols() + 1);
        basis.col(basis.cols() - 1) = best;
        picked.col(k) = best;
    }
    return picked;
}

}  // namespace detail

/// Full extrinsic-geometry evaluation at one chart point: orthonormal tangent
/// frame by thin QR of the Jacobian, normal frame (supplied or completed),
/// and the shape operators (A_alpha)_ij = <D^2 map(w_i, w_j), nu_alpha> in
/// that tangent frame.  For a sphere ambient the position direction is kept
/// out of the normal bundle, which is exactly what restricts the second
/// fundamental form to the one computed within the sphere.
inline PatchPointData evaluate_patch(const ImmersedPatch& patch, const Eigen::VectorXd& x,
                                     DerivativeBackend backend = DerivativeBackend::analytic) {
    patch.validate();
    const int n = patch.dim();
    const int q = patch.codim();
    const auto jets = detail::evaluate_map(patch, x, backend);
    const int N = static_cast<int>(jets.size());
    if (N != patch.ambient.coord_dim)
        throw std::invalid_argument("evaluate_patch: map output dimension != ambient coord_dim");

    PatchPointData data;
    data.chart_point = x;
    data.position = Eigen::VectorXd(N);
    data.jacobian = Eigen::MatrixXd(N, n);
    std::vector<Eigen::MatrixXd> hessians(static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a) {
        data.position[a] = jets[static_cast<std::size_t>(a)].value();
        data.jacobian.row(a) = jets[static_cast<std::size_t>(a)].gradient().transpose();
        hessians[static_cast<std::size_t>(a)] = jets[static_cast<std::size_t>(a)].hessian();
    }

    if (patch.ambient.kind == AmbientSpec::Kind::sphere) {
        const double r = patch.ambient.radius;
        if (std::abs(data.position.norm() - r) > 1e-6 * r)
            throw std::invalid_argument("evaluate_patch: map does not land on the ambient sphere");
    }

    // Numerical immersion test on the singular values of the differential.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(data.jacobian);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (!(smin >= 1e-6 * smax)) {
        std::string msg = "patch is not an immersion at chart point (";
        for (int i = 0; i < x.size(); ++i) msg += (i ? "," : "") + std::to_string(x[i]);
        msg += "): singular value ratio " + std::to_string(smin / smax);
        throw NotImmersedError(msg);
    }

    // Orthonormal tangent frame Q and the chart preimages W = R^{-1} with
    // d(map) W = Q, via thin QR with positive diagonal.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(data.jacobian);
    Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(N, n);
    Eigen::MatrixXd r_factor = qr.matrixQR().topLeftCorner(n, n);
    r_factor = r_factor.triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        if (r_factor(j, j) < 0.0) {
            r_factor.row(j) *= -1.0;
            thin_q.col(j) *= -1.0;
        }
    }
    data.tangent = thin_q;
    data.tangent_preimage = r_factor.triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(n, n));
    data.volume_density = r_factor.diagonal().prod();

    // Normal frame: forbidden directions are the tangent frame plus, on a
    // sphere ambient, the position direction.
    Eigen::MatrixXd forbidden = data.tangent;
    if (patch.ambient.kind == AmbientSpec::Kind::sphere) {
        forbidden.conservativeResize(N, n + 1);
        forbidden.col(n) = data.position / data.position.norm();
    }
    if (patch.normal_frame) {
        const auto frame_jets = (*patch.normal_frame)(seed_point(x));
        if (static_cast<int>(frame_jets.size()) != q)
            throw std::invalid_argument(
                "evaluate_patch: supplied normal frame has wrong codimension");
        data.normal = Eigen::MatrixXd(N, q);
        for (int b = 0; b < q; ++b) {
            const auto& vec = frame_jets[static_cast<std::size_t>(b)];
            if (static_cast<int>(vec.size()) != N)
                throw std::invalid_argument(
                    "evaluate_patch: normal frame vector has wrong dimension");
            for (int a = 0; a < N; ++a) data.normal(a, b) = vec[static_cast<std::size_t>(a)].value();
        }
        const double ortho_err =
            (data.normal.transpose() * data.normal - Eigen::MatrixXd::Identity(q, q))
                .cwiseAbs()
                .maxCoeff();
        const double tangency_err = (forbidden.transpose() * data.normal).cwiseAbs().maxCoeff();
        if (ortho_err > 1e-8 || tangency_err > 1e-8)
            throw std::invalid_argument(
                "evaluate_patch: supplied normal frame is not an orthonormal normal frame");
    } else {
        data.normal = detail::orthonormal_completion(forbidden, q);
    }

    // Shape operators: W^T Hess_a W are the second derivatives in the
    // orthonormal tangent directions; contract with each normal vector.
    std::vector<Eigen::MatrixXd> contracted(static_cast<std::size_t>(N));
    for (int a = 0; a < N; ++a)
        contracted[static_cast<std::size_t>(a)] = data.tangent_preimage.transpose() *
                                                  hessians[static_cast<std::size_t>(a)] *
                                                  data.tangent_preimage;
    std::vector<Eigen::MatrixXd> shapes(static_cast<std::size_t>(q));
    for (int b = 0; b < q; ++b) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
        for (int a = 0; a < N; ++a)
            acc += data.normal(a, b) * contracted[static_cast<std::size_t>(a)];
        shapes[static_cast<std::size_t>(b)] = 0.5 * (acc + acc.transpose());
    }
    data.shape = OperatorSystem(std::move(shapes));
    return data;
}

/// Nodes and weights of a Gauss-Legendre rule on [-1, 1] (Golub-Welsch:
/// eigen-decomposition of the Jacobi tridiagonal matrix).
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_nodes(int k) {
    if (k < 1) throw std::invalid_argument("gauss_legendre_nodes: need k >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(k, k);
    for (int j = 1; j < k; ++j) {
        const double b = j / std::sqrt(4.0 * j * j - 1.0);
        jacobi(j, j - 1) = b;
        jacobi(j - 1, j) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    Eigen::VectorXd nodes = es.eigenvalues();
    Eigen::VectorXd weights(k);
    for (int j = 0; j < k; ++j) {
        const double first = es.eigenvectors()(0, j);
        weights[j] = 2.0 * first * first;
    }
    return {nodes, weights};
}

/// Tensor-product quadrature over the chart: uniform rule on periodic axes
/// (spectrally accurate for smooth periodic integrands), Gauss-Legendre on
/// the rest, `resolution` nodes per axis.
struct QuadratureRule {
    Eigen::MatrixXd points;   ///< K x m
    Eigen::VectorXd weights;  ///< K
};

inline QuadratureRule chart_quadrature(const Chart& chart, int resolution) {
    chart.validate();
    if (resolution < 1) throw std::invalid_argument("chart_quadrature: resolution must be >= 1");
    const int m = chart.dim();

    std::vector<Eigen::VectorXd> axis_nodes(static_cast<std::size_t>(m));
    std::vector<Eigen::VectorXd> axis_weights(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const ChartAxis& axis = chart.axes[static_cast<std::size_t>(i)];
        const double span = axis.hi - axis.lo;
        if (axis.periodic) {
            Eigen::VectorXd nodes(resolution), weights(resolution);
            for (int k = 0; k < resolution; ++k) {
                nodes[k] = axis.lo + span * k / resolution;
                weights[k] = span / resolution;
            }
            axis_nodes[static_cast<std::size_t>(i)] = nodes;
            axis_weights[static_cast<std::size_t>(i)] = weights;
        } else {
            auto [nodes, weights] = gauss_legendre_nodes(resolution);
            axis_nodes[static_cast<std::size_t>(i)] =
                ((axis.lo + 0.5 * span) + (0.5 * span) * nodes.array()).matrix();
            axis_weights[static_cast<std::size_t>(i)] = 0.5 * span * weights;
        }
    }

    long total = 1;
    for (int i = 0; i < m; ++i) total *= resolution;
    QuadratureRule rule;
    rule.points = Eigen::MatrixXd(total, m);
    rule.weights = Eigen::VectorXd(total);
    for (long k = 0; k < total; ++k) {
        long rest = k;
        double w = 1.0;
        for (int i = 0; i < m; ++i) {
            const long idx = rest % resolution;
            rest /= resolution;
            rule.points(k, i) = axis_nodes[static_cast<std::size_t>(i)][idx];
            w *= axis_weights[static_cast<std::size_t>(i)][idx];
        }
        rule.weights[k] = w;
    }
    return rule;
}

/// Integral over the patch of a pointwise functional of the extrinsic data,
/// against the induced volume measure.
inline double integrate_over_patch(const ImmersedPatch& patch,
                                   const std::function<double(const PatchPointData&)>& fn,
                                   int resolution,
                                   DerivativeBackend backend = DerivativeBackend::analytic) {
    const QuadratureRule rule = chart_quadrature(patch.chart, resolution);
    double acc = 0.0;
    for (long k = 0; k < rule.weights.size(); ++k) {
        const PatchPointData data =
            evaluate_patch(patch, rule.points.row(k).transpose(), backend);
        acc += rule.weights[k] * data.volume_density * fn(data);
    }
    return acc;
}

/// Induced volume (area for surfaces) of the patch.
inline double patch_volume(const ImmersedPatch& patch, int resolution,
                           DerivativeBackend backend = DerivativeBackend::analytic) {
    return integrate_over_patch(
        patch, [](const PatchPointData&) { return 1.0; }, resolution, backend);
}

}  // namespace gnt
