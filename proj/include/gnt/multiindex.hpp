#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnt {

/// Multi-index u = (u_1,...,u_q) of non-negative integer exponents.
///
/// Indexes the mixed symmetric functions sigma_u and Newton transformations
/// T_u of a q-tuple of operators.  The degree |u| is the sum of the entries.
class MultiIndex {
public:
    MultiIndex() = default;

    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int e : entries_)
            if (e < 0) throw std::invalid_argument("MultiIndex: entries must be non-negative");
    }

    MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

    /// The zero index (0,...,0) of length q.
    static MultiIndex zero(int q) {
        if (q < 1) throw std::invalid_argument("MultiIndex: q must be >= 1");
        return MultiIndex(std::vector<int>(static_cast<std::size_t>(q), 0));
    }

    int size() const { return static_cast<int>(entries_.size()); }

    /// Degree |u| = sum of entries.
    int degree() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

    int operator[](int axis) const { return entries_[static_cast<std::size_t>(axis)]; }

    const std::vector<int>& entries() const { return entries_; }

    bool operator==(const MultiIndex& other) const { return entries_ == other.entries_; }
    bool operator!=(const MultiIndex& other) const { return !(*this == other); }

    /// Graded order: by degree first; ties broken so that indices with larger
    /// leading entries come first, e.g. (1,0) precedes (0,1).  This is the
    /// canonical iteration order of the Newton table.
    bool operator<(const MultiIndex& other) const {
        const int da = degree(), db = other.degree();
        if (da != db) return da < db;
        return std::lexicographical_compare(other.entries_.begin(), other.entries_.end(),
                                            entries_.begin(), entries_.end());
    }

    std::string to_string() const {
        std::string s = "(";
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(entries_[i]);
        }
        s += ')';
        return s;
    }

private:
    std::vector<int> entries_;
};

/// |u|.
inline int length(const MultiIndex& u) { return u.degree(); }

/// alpha_flat(u): subtract 1 at `axis` (0-based).  Returns nullopt -- the
/// annihilated index -- when the entry is already zero; every quantity
/// indexed by an annihilated index contributes zero downstream.
inline std::optional<MultiIndex> lower(int axis, const MultiIndex& u) {
    if (axis < 0 || axis >= u.size())
        throw std::invalid_argument("lower: axis out of range");
    if (u[axis] == 0) return std::nullopt;
    std::vector<int> e = u.entries();
    e[static_cast<std::size_t>(axis)] -= 1;
    return MultiIndex(std::move(e));
}

/// alpha_sharp(u): add 1 at `axis` (0-based).
inline MultiIndex raise(int axis, const MultiIndex& u) {
    if (axis < 0 || axis >= u.size())
        throw std::invalid_argument("raise: axis out of range");
    std::vector<int> e = u.entries();
    e[static_cast<std::size_t>(axis)] += 1;
    return MultiIndex(std::move(e));
}

/// Entrywise sum (exponent of a product of monomials).
inline MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("MultiIndex sum: size mismatch");
    std::vector<int> e = a.entries();
    for (int i = 0; i < b.size(); ++i) e[static_cast<std::size_t>(i)] += b[i];
    return MultiIndex(std::move(e));
}

/// u composed with a permutation: result[i] = u[perm[i]].
inline MultiIndex permute(const MultiIndex& u, const std::vector<int>& perm) {
    if (static_cast<int>(perm.size()) != u.size())
        throw std::invalid_argument("permute: permutation size mismatch");
    std::vector<int> e(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) e[i] = u[perm[i]];
    return MultiIndex(std::move(e));
}

namespace detail {
inline void enumerate_grade(int grade, int q, std::vector<int>& prefix,
                            std::vector<MultiIndex>& out) {
    if (static_cast<int>(prefix.size()) == q - 1) {
        prefix.push_back(grade);
        out.emplace_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int e = grade; e >= 0; --e) {
        prefix.push_back(e);
        enumerate_grade(grade - e, q, prefix, out);
        prefix.pop_back();
    }
}
}  // namespace detail

/// All u in N^q with |u| <= max_degree, in graded order (the order of
/// MultiIndex::operator<).  The count is C(max_degree + q, q).
inline std::vector<MultiIndex> enumerate_multi_indices(int q, int max_degree) {
    if (q < 1) throw std::invalid_argument("enumerate_multi_indices: q must be >= 1");
    if (max_degree < 0) throw std::invalid_argument("enumerate_multi_indices: max_degree must be >= 0");
    std::vector<MultiIndex> out;
    std::vector<int> prefix;
    for (int g = 0; g <= max_degree; ++g) detail::enumerate_grade(g, q, prefix, out);
    return out;
}

}  // namespace gnt
