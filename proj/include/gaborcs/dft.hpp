#pragma once

#include <span>

#include "gaborcs/types.hpp"

namespace gaborcs {

/// Discrete Fourier transform plan for a fixed length n.
///
/// forward computes X_l = sum_q x_q e^{-2 pi i l q / n}; inverse_scaled
/// computes x_q = sum_l X_l e^{+2 pi i l q / n} (the unnormalised inverse,
/// i.e. n times the inverse DFT).  When n is a power of two an iterative
/// radix-2 transform is used; otherwise a direct O(n^2) evaluation with
/// precomputed twiddles.  Plans are immutable after construction and safe to
/// share across threads.
class DftPlan {
public:
    explicit DftPlan(int n);

    int size() const { return n_; }
    bool uses_fft() const { return radix2_; }

    /// out and in may alias.  Both must have length n.
    void forward(std::span<const cxd> in, std::span<cxd> out) const;
    void inverse_scaled(std::span<const cxd> in, std::span<cxd> out) const;

private:
    void forward_radix2(std::span<cxd> data) const;

    int n_;
    bool radix2_;
    cvec twiddles_;              // e^{-2 pi i j / n}, j = 0 .. n-1
    std::vector<int> bit_reverse_;  // permutation table when radix2_
};

}  // namespace gaborcs
