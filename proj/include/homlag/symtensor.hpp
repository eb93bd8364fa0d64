#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "homlag/errors.hpp"
#include "homlag/jet.hpp"

namespace homlag {

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 0; i < k; ++i) r = r * static_cast<std::uint64_t>(n - i) / (i + 1);
    return r;
}

/// Number of packed components of a rank-n totally symmetric tensor over an
/// m-dimensional chart: multisets of size n from m symbols.
inline std::size_t sym_size(int rank, int dim) {
    return static_cast<std::size_t>(binomial(dim + rank - 1, rank));
}

/// Offset of a multi-index into packed (sorted multiset, lex order) storage.
/// Invariant under permutations of the tuple.
inline std::size_t pack_index(int rank, int dim, std::span<const int> idx) {
    std::array<int, 16> s{};
    for (int t = 0; t < rank; ++t) {
        if (idx[static_cast<size_t>(t)] < 0 || idx[static_cast<size_t>(t)] >= dim)
            throw Error(ErrorCode::IndexOutOfRange, "tensor index out of range");
        s[static_cast<size_t>(t)] = idx[static_cast<size_t>(t)];
    }
    std::sort(s.begin(), s.begin() + rank);
    std::size_t off = 0;
    int prev = 0;
    for (int t = 0; t < rank; ++t) {
        for (int j = prev; j < s[static_cast<size_t>(t)]; ++j)
            off += static_cast<std::size_t>(binomial(dim - j + rank - t - 2, rank - t - 1));
        prev = s[static_cast<size_t>(t)];
    }
    return off;
}

inline std::size_t pack_index(int rank, int dim, std::initializer_list<int> idx) {
    std::vector<int> v(idx);
    return pack_index(rank, dim, std::span<const int>(v));
}

/// Iterates sorted multi-indices (0,...,0) .. (m-1,...,m-1) in packed order.
/// next() returns false after the last one.
struct MultiIndexIter {
    int rank, dim;
    std::array<int, 16> idx{};

    MultiIndexIter(int rank_, int dim_) : rank(rank_), dim(dim_) { idx.fill(0); }

    bool next() {
        for (int t = rank - 1; t >= 0; --t) {
            if (idx[static_cast<size_t>(t)] < dim - 1) {
                const int v = ++idx[static_cast<size_t>(t)];
                for (int u = t + 1; u < rank; ++u) idx[static_cast<size_t>(u)] = v;
                return true;
            }
        }
        return false;
    }

    /// n! / prod(count_i!) — number of ordered tuples equal to this multiset.
    std::uint64_t multiplicity() const {
        std::uint64_t fact = 1;
        for (int i = 2; i <= rank; ++i) fact *= static_cast<std::uint64_t>(i);
        int run = 1;
        for (int t = 1; t < rank; ++t) {
            if (idx[static_cast<size_t>(t)] == idx[static_cast<size_t>(t - 1)]) {
                ++run;
                fact /= static_cast<std::uint64_t>(run);
            } else {
                run = 1;
            }
        }
        return fact;
    }
};

/// Rank-n totally symmetric tensor, packed by sorted multi-index. Rank 0 is a
/// single scalar (shows up as a full contraction result).
template <class T>
class SymTensor {
public:
    SymTensor() = default;
    SymTensor(int rank, int dim)
        : rank_(rank), dim_(dim), comp_(sym_size(rank, dim), T{}) {
        if (rank < 0 || rank > 6 || dim < 1)
            throw Error(ErrorCode::DimMismatch, "bad tensor shape (supported ranks: 0..6)");
    }

    static SymTensor diag(int rank, int dim, std::span<const T> d) {
        SymTensor s(rank, dim);
        std::array<int, 16> idx{};
        for (int i = 0; i < dim; ++i) {
            idx.fill(i);
            s.comp_[pack_index(rank, dim, std::span<const int>(idx.data(), static_cast<size_t>(rank)))] =
                d[static_cast<size_t>(i)];
        }
        return s;
    }

    int rank() const { return rank_; }
    int dim() const { return dim_; }
    std::size_t size() const { return comp_.size(); }

    T& operator[](std::size_t packed) { return comp_[packed]; }
    const T& operator[](std::size_t packed) const { return comp_[packed]; }

    T& at(std::span<const int> idx) { return comp_[pack_index(rank_, dim_, idx)]; }
    const T& at(std::span<const int> idx) const { return comp_[pack_index(rank_, dim_, idx)]; }
    T& at(std::initializer_list<int> idx) {
        std::vector<int> v(idx);
        return comp_[pack_index(rank_, dim_, std::span<const int>(v))];
    }
    const T& at(std::initializer_list<int> idx) const {
        std::vector<int> v(idx);
        return comp_[pack_index(rank_, dim_, std::span<const int>(v))];
    }

    std::span<const T> components() const { return comp_; }
    std::span<T> components() { return comp_; }

private:
    int rank_ = 0;
    int dim_ = 1;
    std::vector<T> comp_{T{}};
};

/// S_n(v,...,v): full contraction over all ordered index tuples, expanded
/// from packed storage with multinomial multiplicities. Fixed summation
/// order (packed order) for reproducibility.
template <class T>
T contract_full(const SymTensor<T>& S, std::span<const T> v) {
    if (static_cast<int>(v.size()) != S.dim())
        throw Error(ErrorCode::DimMismatch, "contract_full: vector dim != tensor dim");
    if (S.rank() == 0) return S[0];
    T acc{};
    MultiIndexIter it(S.rank(), S.dim());
    std::size_t off = 0;
    do {
        T term = S[off] * static_cast<double>(it.multiplicity());
        for (int t = 0; t < S.rank(); ++t) term = term * v[static_cast<size_t>(it.idx[static_cast<size_t>(t)])];
        acc += term;
        ++off;
    } while (it.next());
    return acc;
}

/// Contracts k of the n slots with v: T_{b1..b(n-k)} = S_{b1..b(n-k) g1..gk} v^{g1}..v^{gk}.
/// No combinatorial prefactor; the k-th Jet2 derivative of contract_full
/// equals n!/(n-k)! times this tensor's own contraction pattern.
template <class T>
SymTensor<T> contract_partial(const SymTensor<T>& S, std::span<const T> v, int k) {
    if (static_cast<int>(v.size()) != S.dim())
        throw Error(ErrorCode::DimMismatch, "contract_partial: vector dim != tensor dim");
    if (k < 0 || k > S.rank())
        throw Error(ErrorCode::RankUnderflow, "contract_partial: k exceeds tensor rank");
    if (k == 0) return S;
    const int n = S.rank(), m = S.dim();
    SymTensor<T> out(n - k, m);
    std::array<int, 16> joint{};
    MultiIndexIter keep(n - k, m);
    std::size_t ko = 0;
    do {
        T acc{};
        MultiIndexIter sum(k, m);
        do {
            for (int t = 0; t < n - k; ++t) joint[static_cast<size_t>(t)] = keep.idx[static_cast<size_t>(t)];
            for (int t = 0; t < k; ++t) joint[static_cast<size_t>(n - k + t)] = sum.idx[static_cast<size_t>(t)];
            T term = S[pack_index(n, m, std::span<const int>(joint.data(), static_cast<size_t>(n)))] *
                     static_cast<double>(sum.multiplicity());
            for (int t = 0; t < k; ++t) term = term * v[static_cast<size_t>(sum.idx[static_cast<size_t>(t)])];
            acc += term;
        } while (sum.next());
        out[ko] = acc;
        ++ko;
    } while (n - k > 0 ? keep.next() : false);
    return out;
}

}  // namespace homlag
