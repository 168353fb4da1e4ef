#pragma once

#include <span>

#include "gaborcs/dft.hpp"
#include "gaborcs/types.hpp"

namespace gaborcs {

/// Cyclic translation: (translate(h, k))_q = h_{(q + k) mod n}.
cvec translate(const cvec& h, int k);

/// Modulation: (modulate(h, l))_q = e^{2 pi i l q / n} h_q.
cvec modulate(const cvec& h, int l);

/// Time-frequency shift: modulate(translate(h, k), l).
cvec tf_shift(const cvec& h, const TFIndex& idx);

/// Alltop window g_q = n^{-1/2} e^{2 pi i q^3 / n}.  Requires prime n >= 5;
/// the cube residues degenerate otherwise and the coherence guarantee fails.
Window alltop_window(int n);

/// Random unimodular window g_q = n^{-1/2} e^{i theta_q} with theta_q drawn
/// uniformly from [0, 2 pi) by the seeded generator.
Window steinhaus_window(int n, std::uint64_t seed);

/// Window with caller-supplied values (no normalisation applied).
Window custom_window(cvec values);

bool is_prime(int n);

/// Gabor synthesis operator for a fixed window: maps coefficient vectors on
/// the n x n time-frequency grid (column order (k, l) -> k*n + l) to signals
/// of length n.  Holds a DFT plan so transforms cost n FFTs of length n
/// rather than dense n x n^2 products.
class GaborOperator {
public:
    explicit GaborOperator(Window window);

    int n() const { return n_; }
    const Window& window() const { return window_; }
    const DftPlan& plan() const { return plan_; }

    /// Column psi_(k,l) = tf_shift(g, (k, l)) of the synthesis matrix.
    cvec column(const TFIndex& idx) const;

    /// Synthesis from a sparse coefficient vector, O(S n) work.
    cvec synthesize(const SparseCoeffs& coeffs) const;

    /// Synthesis from a full coefficient vector of length n^2.
    cvec synthesize(std::span<const cxd> coeffs) const;
    void synthesize_into(std::span<const cxd> coeffs, std::span<cxd> out) const;

    /// Adjoint (analysis) map: out[k*n + l] = <y, psi_(k,l)>.
    cvec analyze(std::span<const cxd> y) const;
    void analyze_into(std::span<const cxd> y, std::span<cxd> out) const;

    /// Dense n x n^2 synthesis matrix, for reference and desk-scale checks.
    /// Refuses n beyond the cap: the dense matrix grows as n^3 and the fast
    /// paths above are the intended route past toy sizes.
    CMatrix dense_matrix(int max_n = 64) const;

private:
    Window window_;
    int n_;
    DftPlan plan_;
};

}  // namespace gaborcs
