#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gnt/multiindex.hpp"
#include "gnt/newton.hpp"
#include "gnt/operator_system.hpp"
#include "gnt/random.hpp"

namespace gnt {

/// Structure group of the normal frame bundle fiber.
enum class Group { O, SO };

inline std::string to_string(Group g) { return g == Group::O ? "O" : "SO"; }

/// How fiber integrals are evaluated.
enum class FiberScheme {
    monte_carlo,  ///< Haar-distributed samples, any q
    exact         ///< closed quadrature, q <= 2 only
};

inline std::string to_string(FiberScheme s) {
    return s == FiberScheme::monte_carlo ? "mc" : "exact";
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the R-diagonal
/// sign correction (Stewart's method).  For SO the reflection coset is folded
/// back by flipping the last column.
inline Eigen::MatrixXd haar_sample(int q, Group group, Rng& rng) {
    if (q < 1) throw std::invalid_argument("haar_sample: q must be >= 1");
    Eigen::MatrixXd gauss(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) gauss(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
    Eigen::MatrixXd rot = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR();
    for (int j = 0; j < q; ++j)
        if (r(j, j) < 0.0) rot.col(j) *= -1.0;
    if (group == Group::SO && rot.determinant() < 0.0) rot.col(q - 1) *= -1.0;
    return rot;
}

/// Change of normal frame e'_beta = sum_alpha g_{alpha beta} e_alpha acting on
/// the operator system: A'_beta = sum_alpha g_{alpha beta} A_alpha.
inline OperatorSystem rotate_system(const OperatorSystem& sys, const Eigen::MatrixXd& g) {
    if (g.rows() != sys.q || g.cols() != sys.q)
        throw std::invalid_argument("rotate_system: rotation must be q x q");
    std::vector<Eigen::MatrixXd> mats(static_cast<std::size_t>(sys.q));
    for (int beta = 0; beta < sys.q; ++beta) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(sys.n, sys.n);
        for (int alpha = 0; alpha < sys.q; ++alpha) acc += g(alpha, beta) * sys[alpha];
        mats[static_cast<std::size_t>(beta)] = std::move(acc);
    }
    return OperatorSystem(std::move(mats));
}

/// One node of a closed fiber quadrature.
struct FrameNode {
    Eigen::MatrixXd rotation;
    double weight = 0.0;
};

/// Closed quadrature over the fiber group, exact for the trigonometric
/// polynomials that arise from sigma_u and the section averages (degree well
/// below the node count).  Available for q = 1 (sign sum) and q = 2 (uniform
/// angle trapezoid; for O(2) both reflection cosets).  q >= 3 is not covered:
/// use Monte Carlo there.
inline std::vector<FrameNode> exact_frame_nodes(int q, Group group, int circle_nodes = 64) {
    if (q == 1) {
        if (group == Group::SO) return {{Eigen::MatrixXd::Ones(1, 1), 1.0}};
        return {{Eigen::MatrixXd::Ones(1, 1), 0.5}, {-Eigen::MatrixXd::Ones(1, 1), 0.5}};
    }
    if (q == 2) {
        if (circle_nodes < 1) throw std::invalid_argument("exact_frame_nodes: need >= 1 circle node");
        std::vector<FrameNode> nodes;
        const int cosets = group == Group::O ? 2 : 1;
        const double w = 1.0 / (circle_nodes * cosets);
        for (int k = 0; k < circle_nodes; ++k) {
            const double theta = 2.0 * M_PI * k / circle_nodes;
            Eigen::Matrix2d rot;
            rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
            nodes.push_back({rot, w});
            if (cosets == 2) {
                Eigen::Matrix2d refl = rot;
                refl.col(1) *= -1.0;
                nodes.push_back({refl, w});
            }
        }
        return nodes;
    }
    throw std::invalid_argument("exact fiber scheme is available only for q <= 2");
}

/// Result of averaging a scalar over the fiber.
struct ScalarAverage {
    double value = 0.0;
    double std_error = 0.0;  ///< 0 for the exact scheme
    long samples = 0;        ///< Monte Carlo draws or quadrature nodes
    FiberScheme scheme = FiberScheme::monte_carlo;
};

/// Result of averaging a q-vector (normal-space coordinates in the reference
/// frame) over the fiber.
struct VectorAverage {
    Eigen::VectorXd value;
    Eigen::VectorXd std_error;
    long samples = 0;
    FiberScheme scheme = FiberScheme::monte_carlo;
};

/// Options shared by every fiber average.
struct FiberOptions {
    Group group = Group::O;
    FiberScheme scheme = FiberScheme::monte_carlo;
    long samples = 4096;        ///< Monte Carlo draws
    std::uint64_t seed = 0;     ///< substreams are keyed (seed, draw index)
    int circle_nodes = 64;      ///< nodes per coset for the exact q = 2 scheme
};

namespace detail {

/// Average a vector-valued function of the rotation over the fiber.
/// Monte Carlo accumulates mean and standard error by Welford's method with
/// one Rng substream per draw; the exact scheme is a weighted node sum.
inline VectorAverage average_over_fiber(int q, const FiberOptions& opt,
                                        const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& fn) {
    VectorAverage out;
    out.scheme = opt.scheme;
    if (opt.scheme == FiberScheme::exact) {
        const auto nodes = exact_frame_nodes(q, opt.group, opt.circle_nodes);
        Eigen::VectorXd acc;
        for (const auto& node : nodes) {
            const Eigen::VectorXd v = node.weight * fn(node.rotation);
            acc = (acc.size() == 0) ? v : Eigen::VectorXd(acc + v);
        }
        out.value = acc;
        out.std_error = Eigen::VectorXd::Zero(acc.size());
        out.samples = static_cast<long>(nodes.size());
        return out;
    }
    if (opt.samples < 2) throw std::invalid_argument("fiber average: need >= 2 Monte Carlo samples");
    Eigen::VectorXd mean, m2;
    for (long i = 0; i < opt.samples; ++i) {
        Rng rng = Rng::substream(opt.seed, static_cast<std::uint64_t>(i));
        const Eigen::VectorXd x = fn(haar_sample(q, opt.group, rng));
        if (i == 0) {
            mean = x;
            m2 = Eigen::VectorXd::Zero(x.size());
            continue;
        }
        const Eigen::VectorXd delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta.cwiseProduct(x - mean);
    }
    out.value = mean;
    out.std_error =
        (m2 / (static_cast<double>(opt.samples) * (static_cast<double>(opt.samples) - 1.0)))
            .cwiseSqrt();
    out.samples = opt.samples;
    return out;
}

}  // namespace detail

/// Fiber average of sigma_u over normal-frame rotations:
/// sigma_hat_u = avg_{g in G} sigma_u(A g), the frame-independent symmetric
/// function of the system.
inline ScalarAverage sigma_hat(const OperatorSystem& sys, const MultiIndex& u,
                               const FiberOptions& opt) {
    if (u.size() != sys.q)
        throw std::invalid_argument("sigma_hat: multi-index length must equal q");
    const auto avg = detail::average_over_fiber(sys.q, opt, [&](const Eigen::MatrixXd& g) {
        const NewtonTable t = newton_table(rotate_system(sys, g), u.degree());
        return Eigen::VectorXd::Constant(1, t.sigma_at(u)).eval();
    });
    return {avg.value[0], avg.std_error[0], avg.samples, avg.scheme};
}

/// All sigma_hat_u with |u| <= max_degree in one pass over the fiber (one
/// Newton table per draw instead of one per index).
inline std::map<MultiIndex, ScalarAverage> sigma_hat_table(const OperatorSystem& sys,
                                                           int max_degree,
                                                           const FiberOptions& opt) {
    const auto indices = enumerate_multi_indices(sys.q, max_degree);
    const auto avg = detail::average_over_fiber(sys.q, opt, [&](const Eigen::MatrixXd& g) {
        const NewtonTable t = newton_table(rotate_system(sys, g), max_degree);
        Eigen::VectorXd v(static_cast<long>(indices.size()));
        for (std::size_t k = 0; k < indices.size(); ++k)
            v[static_cast<long>(k)] = t.sigma_at(indices[k]);
        return v;
    });
    std::map<MultiIndex, ScalarAverage> out;
    for (std::size_t k = 0; k < indices.size(); ++k)
        out[indices[k]] = {avg.value[static_cast<long>(k)], avg.std_error[static_cast<long>(k)],
                           avg.samples, avg.scheme};
    return out;
}

/// Fiber averages of the two normal-bundle sections that enter the
/// Euler-Lagrange identity, expressed in the reference frame:
///
///   H: per rotated frame, component beta is sigma_{lower(beta,u)};
///   S: per rotated frame, component beta is tr(A'_beta T_u(A'));
///   R: c (n + 1 - |u|) H, the curvature term of a space form of curvature c.
///
/// Components computed in the rotated frame are mapped back to reference
/// coordinates with the rotation itself, so averages of different draws live
/// in a common frame.
struct SectionAverages {
    VectorAverage H;
    VectorAverage S;
    VectorAverage R;
    VectorAverage residual;  ///< R - S averaged as one quantity (honest error bars)
};

inline SectionAverages averaged_sections(const OperatorSystem& sys, const MultiIndex& u,
                                         double curvature, const FiberOptions& opt) {
    if (u.size() != sys.q)
        throw std::invalid_argument("averaged_sections: multi-index length must equal q");
    const int q = sys.q;
    const double factor = curvature * static_cast<double>(sys.n + 1 - u.degree());
    const auto avg = detail::average_over_fiber(q, opt, [&](const Eigen::MatrixXd& g) {
        const OperatorSystem rot = rotate_system(sys, g);
        const NewtonTable t = newton_table(rot, u.degree());
        Eigen::VectorXd h(q), s(q);
        for (int beta = 0; beta < q; ++beta) {
            const auto lowered = lower(beta, u);
            h[beta] = lowered ? t.sigma_at(*lowered) : 0.0;
            s[beta] = (rot[beta] * t.transform_at(u)).trace();
        }
        Eigen::VectorXd packed(3 * q);
        packed.head(q) = g * h;  // back to reference coordinates
        packed.segment(q, q) = g * s;
        packed.tail(q) = factor * packed.head(q) - packed.segment(q, q);
        return packed;
    });

    SectionAverages out;
    out.H = {avg.value.head(q), avg.std_error.head(q), avg.samples, avg.scheme};
    out.S = {avg.value.segment(q, q), avg.std_error.segment(q, q), avg.samples, avg.scheme};
    out.R = {factor * out.H.value, std::abs(factor) * out.H.std_error, avg.samples, avg.scheme};
    out.residual = {avg.value.tail(q), avg.std_error.tail(q), avg.samples, avg.scheme};
    return out;
}

}  // namespace gnt
