#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "gnt/multiindex.hpp"
#include "gnt/operator_system.hpp"

namespace gnt {

/// Polynomial in q commuting variables t_1,...,t_q with real coefficients,
/// truncated at a fixed total degree.  Sparse: absent monomials are zero.
///
/// This is deliberately naive arithmetic -- it exists as an independent check
/// on the Newton recursion, so it must not share any code path with it.
class TruncatedPoly {
public:
    TruncatedPoly(int q, int max_degree) : q_(q), max_degree_(max_degree) {
        if (q < 1) throw std::invalid_argument("TruncatedPoly: q must be >= 1");
        if (max_degree < 0) throw std::invalid_argument("TruncatedPoly: max_degree must be >= 0");
    }

    static TruncatedPoly constant(int q, int max_degree, double c) {
        TruncatedPoly p(q, max_degree);
        if (c != 0.0) p.coeff_[MultiIndex::zero(q)] = c;
        return p;
    }

    /// scale * t_axis (0-based axis).
    static TruncatedPoly variable(int q, int max_degree, int axis, double scale) {
        TruncatedPoly p(q, max_degree);
        if (scale != 0.0 && max_degree >= 1) {
            std::vector<int> e(static_cast<std::size_t>(q), 0);
            e[static_cast<std::size_t>(axis)] = 1;
            p.coeff_[MultiIndex(std::move(e))] = scale;
        }
        return p;
    }

    int q() const { return q_; }
    int max_degree() const { return max_degree_; }

    double coefficient(const MultiIndex& u) const {
        auto it = coeff_.find(u);
        return it == coeff_.end() ? 0.0 : it->second;
    }

    TruncatedPoly& operator+=(const TruncatedPoly& other) {
        for (const auto& [mono, c] : other.coeff_) coeff_[mono] += c;
        return *this;
    }

    TruncatedPoly& operator-=(const TruncatedPoly& other) {
        for (const auto& [mono, c] : other.coeff_) coeff_[mono] -= c;
        return *this;
    }

    friend TruncatedPoly operator+(TruncatedPoly a, const TruncatedPoly& b) { return a += b; }
    friend TruncatedPoly operator-(TruncatedPoly a, const TruncatedPoly& b) { return a -= b; }

    friend TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) {
        TruncatedPoly out(a.q_, a.max_degree_);
        for (const auto& [ma, ca] : a.coeff_) {
            for (const auto& [mb, cb] : b.coeff_) {
                if (ma.degree() + mb.degree() > out.max_degree_) continue;
                out.coeff_[ma + mb] += ca * cb;
            }
        }
        return out;
    }

    const std::map<MultiIndex, double>& terms() const { return coeff_; }

private:
    int q_;
    int max_degree_;
    std::map<MultiIndex, double> coeff_;
};

namespace detail {

/// Minor of P over the given column bitmask, expanding along row
/// n - popcount(mask).  Memoized on the mask: rows are always consumed
/// top-down, so the remaining row set is determined by the column set.
inline TruncatedPoly truncated_det(const std::vector<std::vector<TruncatedPoly>>& P,
                                   std::uint64_t mask, int n, int q, int max_degree,
                                   std::unordered_map<std::uint64_t, TruncatedPoly>& memo) {
    if (mask == 0) return TruncatedPoly::constant(q, max_degree, 1.0);
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;

    int remaining = 0;
    for (std::uint64_t m = mask; m; m &= m - 1) ++remaining;
    const int row = n - remaining;

    TruncatedPoly acc(q, max_degree);
    double sign = 1.0;
    for (int col = 0; col < n; ++col) {
        const std::uint64_t bit = std::uint64_t{1} << col;
        if (!(mask & bit)) continue;
        const TruncatedPoly minor =
            truncated_det(P, mask & ~bit, n, q, max_degree, memo);
        acc += TruncatedPoly::constant(q, max_degree, sign) *
               P[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] * minor;
        sign = -sign;
    }
    memo.emplace(mask, acc);
    return acc;
}

}  // namespace detail

/// Coefficients of det(I + t_1 A_1 + ... + t_q A_q) up to total degree
/// max_degree, computed by exact truncated-polynomial Laplace expansion.
/// The coefficient of t^u is sigma_u; this is the reference oracle the
/// Newton recursion is validated against.
inline std::map<MultiIndex, double> sigma_oracle(const OperatorSystem& sys, int max_degree) {
    const int n = sys.n;
    const int q = sys.q;
    if (n > 62) throw std::invalid_argument("sigma_oracle: n too large for bitmask expansion");

    std::vector<std::vector<TruncatedPoly>> P(
        static_cast<std::size_t>(n),
        std::vector<TruncatedPoly>(static_cast<std::size_t>(n), TruncatedPoly(q, max_degree)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            TruncatedPoly entry = TruncatedPoly::constant(q, max_degree, i == j ? 1.0 : 0.0);
            for (int alpha = 0; alpha < q; ++alpha)
                entry += TruncatedPoly::variable(q, max_degree, alpha, sys[alpha](i, j));
            P[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = entry;
        }
    }

    std::unordered_map<std::uint64_t, TruncatedPoly> memo;
    const std::uint64_t full = (n == 62) ? ~std::uint64_t{0} >> 2 : (std::uint64_t{1} << n) - 1;
    const TruncatedPoly det = detail::truncated_det(P, full, n, q, max_degree, memo);

    std::map<MultiIndex, double> out;
    for (const MultiIndex& u : enumerate_multi_indices(q, max_degree))
        out[u] = det.coefficient(u);
    return out;
}

}  // namespace gnt
