#include "gaborcs/dft.hpp"

#include <cmath>
#include <numbers>

namespace gaborcs {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

DftPlan::DftPlan(int n) : n_(n), radix2_(is_power_of_two(n)) {
    if (n <= 0) throw std::invalid_argument("DftPlan: length must be positive");
    twiddles_.resize(static_cast<std::size_t>(n_));
    for (int j = 0; j < n_; ++j) {
        const double angle = -2.0 * std::numbers::pi * j / n_;
        twiddles_[static_cast<std::size_t>(j)] = cxd(std::cos(angle), std::sin(angle));
    }
    if (radix2_) {
        bit_reverse_.resize(static_cast<std::size_t>(n_));
        int bits = 0;
        while ((1 << bits) < n_) ++bits;
        for (int i = 0; i < n_; ++i) {
            int rev = 0;
            for (int b = 0; b < bits; ++b)
                if (i & (1 << b)) rev |= 1 << (bits - 1 - b);
            bit_reverse_[static_cast<std::size_t>(i)] = rev;
        }
    }
}

void DftPlan::forward_radix2(std::span<cxd> data) const {
    for (int len = 2; len <= n_; len <<= 1) {
        const int half = len / 2;
        const int step = n_ / len;  // twiddle stride for this stage
        for (int block = 0; block < n_; block += len) {
            for (int j = 0; j < half; ++j) {
                const cxd w = twiddles_[static_cast<std::size_t>(j * step)];
                cxd& a = data[static_cast<std::size_t>(block + j)];
                cxd& b = data[static_cast<std::size_t>(block + j + half)];
                const cxd t = w * b;
                b = a - t;
                a = a + t;
            }
        }
    }
}

void DftPlan::forward(std::span<const cxd> in, std::span<cxd> out) const {
    if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
        throw std::invalid_argument("DftPlan::forward: buffer length mismatch");
    if (radix2_) {
        if (in.data() == out.data()) {
            // Permute in place: each swap orbit of the bit-reversal is a 2-cycle.
            for (int i = 0; i < n_; ++i) {
                const int r = bit_reverse_[static_cast<std::size_t>(i)];
                if (i < r) std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(r)]);
            }
        } else {
            for (int i = 0; i < n_; ++i)
                out[static_cast<std::size_t>(bit_reverse_[static_cast<std::size_t>(i)])] = in[static_cast<std::size_t>(i)];
        }
        forward_radix2(out);
        return;
    }
    cvec scratch(in.begin(), in.end());
    for (int l = 0; l < n_; ++l) {
        cxd acc(0.0, 0.0);
        for (int q = 0; q < n_; ++q) {
            const int j = static_cast<int>((static_cast<long long>(l) * q) % n_);
            acc += scratch[static_cast<std::size_t>(q)] * twiddles_[static_cast<std::size_t>(j)];
        }
        out[static_cast<std::size_t>(l)] = acc;
    }
}

void DftPlan::inverse_scaled(std::span<const cxd> in, std::span<cxd> out) const {
    if (static_cast<int>(in.size()) != n_ || static_cast<int>(out.size()) != n_)
        throw std::invalid_argument("DftPlan::inverse_scaled: buffer length mismatch");
    // Conjugation identity: sum_l X_l e^{+i...} = conj(forward(conj(X))).
    cvec scratch(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) scratch[static_cast<std::size_t>(i)] = std::conj(in[static_cast<std::size_t>(i)]);
    forward(scratch, scratch);
    for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = std::conj(scratch[static_cast<std::size_t>(i)]);
}

}  // namespace gaborcs
