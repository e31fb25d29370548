#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace gnt {

/// Second-order forward-mode derivative bundle: a value together with its
/// gradient and Hessian with respect to a fixed set of chart variables.
/// Propagating jets through a chart map gives machine-precision first and
/// second derivatives, which the curvature pipeline needs (finite differences
/// would contaminate the convergence-order measurements downstream).
class Jet {
public:
    Jet() = default;

    /// Constant in `dim` variables.
    Jet(double value, int dim)
        : v(value), g(Eigen::VectorXd::Zero(dim)), h(Eigen::MatrixXd::Zero(dim, dim)) {}

    /// The coordinate function x_axis seeded at `value`.
    static Jet variable(double value, int dim, int axis) {
        Jet j(value, dim);
        j.g[axis] = 1.0;
        return j;
    }

    /// Assemble a jet from externally computed derivatives (e.g. finite
    /// differences standing in for analytic propagation).
    static Jet from_parts(double value, const Eigen::VectorXd& gradient,
                          const Eigen::MatrixXd& hessian) {
        if (hessian.rows() != gradient.size() || hessian.cols() != gradient.size())
            throw std::invalid_argument("Jet::from_parts: inconsistent shapes");
        Jet j(value, static_cast<int>(gradient.size()));
        j.g = gradient;
        j.h = hessian;
        return j;
    }

    double value() const { return v; }
    const Eigen::VectorXd& gradient() const { return g; }
    const Eigen::MatrixXd& hessian() const { return h; }
    int dim() const { return static_cast<int>(g.size()); }

    Jet operator-() const {
        Jet out = *this;
        out.v = -out.v;
        out.g = -out.g;
        out.h = -out.h;
        return out;
    }

    Jet& operator+=(const Jet& o) {
        check(o);
        v += o.v;
        g += o.g;
        h += o.h;
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check(o);
        v -= o.v;
        g -= o.g;
        h -= o.h;
        return *this;
    }
    Jet& operator*=(double c) {
        v *= c;
        g *= c;
        h *= c;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double c) {
        a.v += c;
        return a;
    }
    friend Jet operator+(double c, Jet a) {
        a.v += c;
        return a;
    }
    friend Jet operator-(Jet a, double c) {
        a.v -= c;
        return a;
    }
    friend Jet operator-(double c, const Jet& a) { return -a + c; }
    friend Jet operator*(Jet a, double c) { return a *= c; }
    friend Jet operator*(double c, Jet a) { return a *= c; }
    friend Jet operator/(Jet a, double c) { return a *= (1.0 / c); }

    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check(b);
        Jet out(a.v * b.v, a.dim());
        out.g = a.g * b.v + b.g * a.v;
        out.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
        return out;
    }

    friend Jet operator/(const Jet& a, const Jet& b) {
        if (b.v == 0.0) throw std::domain_error("Jet: division by zero value");
        return a * b.chain(1.0 / b.v, -1.0 / (b.v * b.v), 2.0 / (b.v * b.v * b.v));
    }

    friend Jet operator/(double c, const Jet& b) { return Jet(c, b.dim()) / b; }

    /// Compose with a scalar function given f(v), f'(v), f''(v).
    Jet chain(double f, double df, double ddf) const {
        Jet out(f, dim());
        out.g = df * g;
        out.h = df * h + ddf * (g * g.transpose());
        return out;
    }

private:
    void check(const Jet& o) const {
        if (g.size() != o.g.size()) throw std::invalid_argument("Jet: dimension mismatch");
    }

    double v = 0.0;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
};

inline Jet sin(const Jet& a) { return a.chain(std::sin(a.value()), std::cos(a.value()), -std::sin(a.value())); }
inline Jet cos(const Jet& a) { return a.chain(std::cos(a.value()), -std::sin(a.value()), -std::cos(a.value())); }
inline Jet exp(const Jet& a) {
    const double e = std::exp(a.value());
    return a.chain(e, e, e);
}
inline Jet log(const Jet& a) {
    if (a.value() <= 0.0) throw std::domain_error("Jet: log of non-positive value");
    return a.chain(std::log(a.value()), 1.0 / a.value(), -1.0 / (a.value() * a.value()));
}
inline Jet sqrt(const Jet& a) {
    if (a.value() <= 0.0) throw std::domain_error("Jet: sqrt of non-positive value");
    const double r = std::sqrt(a.value());
    return a.chain(r, 0.5 / r, -0.25 / (r * a.value()));
}
inline Jet pow(const Jet& a, double k) {
    const double f = std::pow(a.value(), k);
    return a.chain(f, k * std::pow(a.value(), k - 1.0), k * (k - 1.0) * std::pow(a.value(), k - 2.0));
}

/// Point of R^m seeded as jet variables.
inline std::vector<Jet> seed_point(const Eigen::VectorXd& x) {
    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(x.size()));
    for (int i = 0; i < x.size(); ++i)
        out.push_back(Jet::variable(x[i], static_cast<int>(x.size()), i));
    return out;
}

/// Euclidean dot product of jet vectors.
inline Jet dot(const std::vector<Jet>& a, const std::vector<Jet>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("jet dot: size mismatch");
    if (a.empty()) throw std::invalid_argument("jet dot: empty vectors");
    Jet acc = a[0] * b[0];
    for (std::size_t i = 1; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline Jet squared_norm(const std::vector<Jet>& a) { return dot(a, a); }

}  // namespace gnt
