#include "gaborcs/tf_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gaborcs/rng.hpp"

namespace gaborcs {

namespace {

int reduce_mod(long long v, int n) {
    long long r = v % n;
    return static_cast<int>(r < 0 ? r + n : r);
}

void require_nonempty(const cvec& h, const char* who) {
    if (h.empty()) throw std::invalid_argument(std::string(who) + ": empty vector");
}

}  // namespace

cvec translate(const cvec& h, int k) {
    require_nonempty(h, "translate");
    const int n = static_cast<int>(h.size());
    const int kk = reduce_mod(k, n);
    cvec out(h.size());
    for (int q = 0; q < n; ++q) out[static_cast<std::size_t>(q)] = h[static_cast<std::size_t>((q + kk) % n)];
    return out;
}

cvec modulate(const cvec& h, int l) {
    require_nonempty(h, "modulate");
    const int n = static_cast<int>(h.size());
    const int ll = reduce_mod(l, n);
    cvec out(h.size());
    for (int q = 0; q < n; ++q) {
        const double angle = 2.0 * std::numbers::pi * (static_cast<long long>(ll) * q % n) / n;
        out[static_cast<std::size_t>(q)] = cxd(std::cos(angle), std::sin(angle)) * h[static_cast<std::size_t>(q)];
    }
    return out;
}

cvec tf_shift(const cvec& h, const TFIndex& idx) { return modulate(translate(h, idx.k), idx.l); }

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; static_cast<long long>(d) * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

Window alltop_window(int n) {
    if (n < 5 || !is_prime(n))
        throw std::domain_error("alltop_window: length must be a prime >= 5 (got " +
                                std::to_string(n) + ")");
    Window w;
    w.kind = WindowKind::Alltop;
    w.values.resize(static_cast<std::size_t>(n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int q = 0; q < n; ++q) {
        // q^3 mod n without overflow: reduce after each multiplication.
        const long long q2 = static_cast<long long>(q) * q % n;
        const long long q3 = q2 * q % n;
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(q3) / n;
        w.values[static_cast<std::size_t>(q)] = scale * cxd(std::cos(angle), std::sin(angle));
    }
    return w;
}

Window steinhaus_window(int n, std::uint64_t seed) {
    if (n <= 0) throw std::domain_error("steinhaus_window: length must be positive");
    Window w;
    w.kind = WindowKind::Steinhaus;
    w.seed = seed;
    w.values.resize(static_cast<std::size_t>(n));
    SplitMix64 rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int q = 0; q < n; ++q) {
        const double theta = 2.0 * std::numbers::pi * rng.next_double();
        w.values[static_cast<std::size_t>(q)] = scale * cxd(std::cos(theta), std::sin(theta));
    }
    return w;
}

Window custom_window(cvec values) {
    if (values.empty()) throw std::invalid_argument("custom_window: empty value vector");
    Window w;
    w.kind = WindowKind::Custom;
    w.values = std::move(values);
    return w;
}

GaborOperator::GaborOperator(Window window)
    : window_(std::move(window)), n_(window_.n()), plan_(window_.n() > 0 ? window_.n() : 1) {
    if (n_ <= 0) throw std::invalid_argument("GaborOperator: window must be nonempty");
}

cvec GaborOperator::column(const TFIndex& idx) const {
    if (idx.k < 0 || idx.k >= n_ || idx.l < 0 || idx.l >= n_)
        throw std::invalid_argument("GaborOperator::column: index outside grid");
    return tf_shift(window_.values, idx);
}

cvec GaborOperator::synthesize(const SparseCoeffs& coeffs) const {
    if (coeffs.n() != n_)
        throw std::invalid_argument("GaborOperator::synthesize: coefficient grid order mismatch");
    cvec y(static_cast<std::size_t>(n_), cxd(0.0, 0.0));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const cvec col = column(coeffs.support()[i]);
        const cxd c = coeffs.values()[i];
        for (int q = 0; q < n_; ++q) y[static_cast<std::size_t>(q)] += c * col[static_cast<std::size_t>(q)];
    }
    return y;
}

cvec GaborOperator::synthesize(std::span<const cxd> coeffs) const {
    cvec y(static_cast<std::size_t>(n_));
    synthesize_into(coeffs, y);
    return y;
}

void GaborOperator::synthesize_into(std::span<const cxd> coeffs, std::span<cxd> out) const {
    if (static_cast<long long>(coeffs.size()) != static_cast<long long>(n_) * n_)
        throw std::invalid_argument("GaborOperator::synthesize: expected n^2 coefficients");
    if (static_cast<int>(out.size()) != n_)
        throw std::invalid_argument("GaborOperator::synthesize: output must have length n");
    // Row k of the coefficient grid contributes g_{(q+k) mod n} * u_k(q)
    // where u_k is the length-n unnormalised inverse DFT of that row.
    std::fill(out.begin(), out.end(), cxd(0.0, 0.0));
    cvec u(static_cast<std::size_t>(n_));
    const cvec& g = window_.values;
    for (int k = 0; k < n_; ++k) {
        plan_.inverse_scaled(coeffs.subspan(static_cast<std::size_t>(k) * n_, static_cast<std::size_t>(n_)), u);
        for (int q = 0; q < n_; ++q)
            out[static_cast<std::size_t>(q)] += g[static_cast<std::size_t>((q + k) % n_)] * u[static_cast<std::size_t>(q)];
    }
}

cvec GaborOperator::analyze(std::span<const cxd> y) const {
    cvec out(static_cast<std::size_t>(n_) * n_);
    analyze_into(y, out);
    return out;
}

void GaborOperator::analyze_into(std::span<const cxd> y, std::span<cxd> out) const {
    if (static_cast<int>(y.size()) != n_)
        throw std::invalid_argument("GaborOperator::analyze: expected a length-n signal");
    if (static_cast<long long>(out.size()) != static_cast<long long>(n_) * n_)
        throw std::invalid_argument("GaborOperator::analyze: output must have length n^2");
    // <y, psi_(k,l)> = DFT_l of q -> y_q conj(g_{(q+k) mod n}).
    cvec v(static_cast<std::size_t>(n_));
    const cvec& g = window_.values;
    for (int k = 0; k < n_; ++k) {
        for (int q = 0; q < n_; ++q)
            v[static_cast<std::size_t>(q)] =
                y[static_cast<std::size_t>(q)] * std::conj(g[static_cast<std::size_t>((q + k) % n_)]);
        plan_.forward(v, out.subspan(static_cast<std::size_t>(k) * n_, static_cast<std::size_t>(n_)));
    }
}

CMatrix GaborOperator::dense_matrix(int max_n) const {
    if (n_ > max_n)
        throw std::invalid_argument("GaborOperator::dense_matrix: n = " + std::to_string(n_) +
                                    " exceeds cap " + std::to_string(max_n) +
                                    "; use the transform paths at this size");
    CMatrix m(n_, n_ * n_);
    for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
            const cvec col = column(TFIndex{k, l});
            for (int q = 0; q < n_; ++q) m.at(q, k * n_ + l) = col[static_cast<std::size_t>(q)];
        }
    return m;
}

}  // namespace gaborcs
