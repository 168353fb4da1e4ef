#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaborcs {

inline constexpr const char* kVersion = "0.1.0";

using cxd = std::complex<double>;
using cvec = std::vector<cxd>;

/// Thrown when a file or stream operation fails; the CLI maps this to exit
/// code 2 while domain/argument errors map to exit code 1.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double l2_norm_sq(const cvec& v) {
    double acc = 0.0;
    for (const cxd& z : v) acc += std::norm(z);
    return acc;
}

inline double l2_norm(const cvec& v) { return std::sqrt(l2_norm_sq(v)); }

inline double l1_norm(const cvec& v) {
    double acc = 0.0;
    for (const cxd& z : v) acc += std::abs(z);
    return acc;
}

/// Inner product sum_q u_q * conj(v_q), linear in the first argument.
inline cxd inner(const cvec& u, const cvec& v) {
    if (u.size() != v.size())
        throw std::invalid_argument("inner: length mismatch (" + std::to_string(u.size()) +
                                    " vs " + std::to_string(v.size()) + ")");
    cxd acc(0.0, 0.0);
    for (std::size_t q = 0; q < u.size(); ++q) acc += u[q] * std::conj(v[q]);
    return acc;
}

/// Dense complex matrix in column-major storage.  Only used at desk scale
/// (Gram submatrices, reference synthesis matrices); sizes stay modest.
struct CMatrix {
    int rows = 0;
    int cols = 0;
    cvec data;  // column-major, data[c * rows + r]

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {
        if (r < 0 || c < 0) throw std::invalid_argument("CMatrix: negative dimension");
    }

    cxd& at(int r, int c) { return data[static_cast<std::size_t>(c) * rows + r]; }
    const cxd& at(int r, int c) const { return data[static_cast<std::size_t>(c) * rows + r]; }
};

/// Time-frequency shift label (k = cyclic time shift, l = modulation index).
/// Stored already reduced into [0, n); reduction happens where an index is
/// formed from free integers (tf_index below).
struct TFIndex {
    int k = 0;
    int l = 0;

    friend bool operator==(const TFIndex&, const TFIndex&) = default;
};

/// Reduce arbitrary integers into [0, n) and form an index.
inline TFIndex tf_index(long long k, long long l, int n) {
    if (n <= 0) throw std::invalid_argument("tf_index: n must be positive");
    auto red = [n](long long v) {
        long long r = v % n;
        return static_cast<int>(r < 0 ? r + n : r);
    };
    return TFIndex{red(k), red(l)};
}

/// Column position of index (k, l) in the synthesis matrix: k * n + l.
inline int tf_column(const TFIndex& idx, int n) { return idx.k * n + idx.l; }

inline TFIndex tf_from_column(int column, int n) {
    if (n <= 0 || column < 0 || column >= n * n)
        throw std::invalid_argument("tf_from_column: column out of range");
    return TFIndex{column / n, column % n};
}

/// Ordered set of distinct time-frequency indices over an n x n grid.
class SupportSet {
public:
    SupportSet(int n, std::vector<TFIndex> indices) : n_(n), indices_(std::move(indices)) {
        if (n_ <= 0) throw std::invalid_argument("SupportSet: n must be positive");
        std::vector<char> seen(static_cast<std::size_t>(n_) * n_, 0);
        for (const TFIndex& idx : indices_) {
            if (idx.k < 0 || idx.k >= n_ || idx.l < 0 || idx.l >= n_)
                throw std::invalid_argument("SupportSet: index (" + std::to_string(idx.k) + "," +
                                            std::to_string(idx.l) + ") outside grid of order " +
                                            std::to_string(n_));
            char& flag = seen[static_cast<std::size_t>(tf_column(idx, n_))];
            if (flag) throw std::invalid_argument("SupportSet: duplicate index");
            flag = 1;
        }
    }

    int n() const { return n_; }
    std::size_t size() const { return indices_.size(); }
    const std::vector<TFIndex>& indices() const { return indices_; }
    const TFIndex& operator[](std::size_t i) const { return indices_[i]; }
    int column(std::size_t i) const { return tf_column(indices_[i], n_); }

    bool contains(const TFIndex& idx) const {
        for (const TFIndex& own : indices_)
            if (own == idx) return true;
        return false;
    }

private:
    int n_;
    std::vector<TFIndex> indices_;
};

/// Sparse coefficient vector over the time-frequency grid.  Entries with an
/// exactly zero value are dropped on construction so that size() is the
/// genuine sparsity level.
class SparseCoeffs {
public:
    SparseCoeffs(const SupportSet& support, const cvec& values)
        : n_(support.n()), support_(support.n(), {}) {
        if (support.size() != values.size())
            throw std::invalid_argument("SparseCoeffs: support/value length mismatch");
        std::vector<TFIndex> kept;
        cvec kept_values;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] == cxd(0.0, 0.0)) continue;
            kept.push_back(support[i]);
            kept_values.push_back(values[i]);
        }
        support_ = SupportSet(n_, std::move(kept));
        values_ = std::move(kept_values);
    }

    static SparseCoeffs zero(int n) { return SparseCoeffs(SupportSet(n, {}), {}); }

    int n() const { return n_; }
    std::size_t size() const { return values_.size(); }
    const SupportSet& support() const { return support_; }
    const cvec& values() const { return values_; }

    cvec to_full() const {
        cvec full(static_cast<std::size_t>(n_) * n_, cxd(0.0, 0.0));
        for (std::size_t i = 0; i < values_.size(); ++i)
            full[static_cast<std::size_t>(support_.column(i))] = values_[i];
        return full;
    }

    /// Unit-modulus sign vector value / |value|, aligned with the support.
    cvec signs() const {
        cvec s(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) s[i] = values_[i] / std::abs(values_[i]);
        return s;
    }

    double norm() const { return l2_norm(values_); }

private:
    int n_;
    SupportSet support_;
    cvec values_;
};

enum class WindowKind { Alltop, Steinhaus, Custom };

inline const char* window_kind_name(WindowKind kind) {
    switch (kind) {
        case WindowKind::Alltop: return "alltop";
        case WindowKind::Steinhaus: return "steinhaus";
        case WindowKind::Custom: return "custom";
    }
    return "custom";
}

/// Gabor window of length n.  Alltop and Steinhaus windows are unimodular
/// with |g_q| = n^{-1/2}, hence unit l2 norm; Custom carries arbitrary values.
struct Window {
    cvec values;
    WindowKind kind = WindowKind::Custom;
    std::optional<std::uint64_t> seed;  // set for Steinhaus windows

    int n() const { return static_cast<int>(values.size()); }
};

}  // namespace gaborcs
