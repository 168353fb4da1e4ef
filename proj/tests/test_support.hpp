#pragma once

// Shared helpers for the unit-test suites: deterministic random vectors and
// reference (slow, obviously-correct) linear algebra to compare against.

#include <cmath>
#include <complex>
#include <vector>

#include "gaborcs/rng.hpp"
#include "gaborcs/types.hpp"

namespace gaborcs::testing {

inline cvec random_cvec(int n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    cvec v(static_cast<std::size_t>(n));
    for (auto& z : v) z = cxd(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
    return v;
}

inline double rel_diff(const cvec& a, const cvec& b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

/// y = M x by the definition of the matrix product; the reference for all
/// fast-path comparisons.
inline cvec dense_apply(const CMatrix& m, const cvec& x) {
    cvec y(static_cast<std::size_t>(m.rows), cxd(0.0, 0.0));
    for (int c = 0; c < m.cols; ++c)
        for (int r = 0; r < m.rows; ++r)
            y[static_cast<std::size_t>(r)] += m.at(r, c) * x[static_cast<std::size_t>(c)];
    return y;
}

/// y = M* x (conjugate transpose product).
inline cvec dense_apply_adjoint(const CMatrix& m, const cvec& x) {
    cvec y(static_cast<std::size_t>(m.cols), cxd(0.0, 0.0));
    for (int c = 0; c < m.cols; ++c)
        for (int r = 0; r < m.rows; ++r)
            y[static_cast<std::size_t>(c)] += std::conj(m.at(r, c)) * x[static_cast<std::size_t>(r)];
    return y;
}

}  // namespace gaborcs::testing
