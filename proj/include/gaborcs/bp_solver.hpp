#pragma once

#include "gaborcs/gram_analysis.hpp"
#include "gaborcs/tf_core.hpp"

namespace gaborcs {

/// Chambolle-Pock step sizes and stopping rules for the equality-constrained
/// l1 problem min ||x||_1 s.t. synthesize(x) = y.  The operator norm of the
/// synthesis map is exactly sqrt(n) (tight frame), so defaults_for picks
/// primal_step = dual_step = 0.99 / sqrt(n), satisfying the convergence
/// requirement primal_step * dual_step * n <= 1 with margin.
struct BPConfig {
    int max_iterations = 20000;
    double primal_step = 0.0;
    double dual_step = 0.0;
    double convergence_tol = 1e-9;  // relative residual ||Ax - y|| / ||y||
    double recovery_tol = 1e-5;     // relative error declaring recovery

    static BPConfig defaults_for(int n);
};

struct BPResult {
    cvec coefficients;   // length n^2
    double residual = 0.0;  // relative equality residual at exit
    double l1_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Basis Pursuit by the Chambolle-Pock primal-dual algorithm.  Non-convergence
/// within max_iterations is reported through the converged flag, not thrown:
/// a run that stalls is data, not a failure of the routine.
BPResult basis_pursuit(const GaborOperator& op, const cvec& y, const BPConfig& config);

/// Same, warm-started from an initial coefficient vector of length n^2.
BPResult basis_pursuit(const GaborOperator& op, const cvec& y, const BPConfig& config,
                       const cvec& initial);

/// Exactness certificate for a support/sign pattern: builds the dual vector
/// interpolating the signs on the support and checks its analysis magnitudes
/// stay strictly below 1 off the support.  When it certifies, the sparse
/// vector with that support and those signs is the unique Basis Pursuit
/// minimiser of its own measurements.
struct CertificateReport {
    double max_offsupport_magnitude = 0.0;
    ConditioningReport gram_condition;
    bool certifies_uniqueness = false;
    std::optional<std::vector<double>> magnitudes;  // |P_rho| by column, on request
};

CertificateReport dual_certificate(const GaborOperator& op, const SupportSet& support,
                                   const cvec& signs, bool want_magnitudes = false);

/// l2 norm of the row of the pseudo-inverse of Psi_Lambda applied to column
/// rho outside the support: ||(Psi_Lambda^* Psi_Lambda)^{-1} Psi_Lambda^* psi_rho||_2.
double pseudo_inverse_row_norm(const GaborOperator& op, const SupportSet& support,
                               const TFIndex& rho);

/// Exhaustive minimal-support solve for toy sizes (n <= 8, max_s <= 2):
/// scans supports in lexicographic column order by increasing size and
/// returns the least-squares fit of the first support reproducing y to
/// relative residual 1e-8.  Throws when nothing within max_s fits.
SparseCoeffs l0_oracle(const GaborOperator& op, const cvec& y, int max_s);

/// True iff the solver output matches the ground truth to relative l2 error
/// <= tol.  A zero truth vector is only matched by an (exactly) zero result.
bool verify_recovery(const SparseCoeffs& truth, const BPResult& result, double tol);

/// Relative l2 error ||result - truth|| / ||truth|| (infinity when the truth
/// is zero but the result is not, 0 when both are zero).
double relative_error(const SparseCoeffs& truth, const BPResult& result);

/// Indices whose recovered magnitude exceeds the threshold, in column order.
SupportSet identified_support(const BPResult& result, int n, double threshold);

}  // namespace gaborcs
