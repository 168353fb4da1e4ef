#pragma once

#include "gaborcs/stats.hpp"
#include "gaborcs/tf_core.hpp"

namespace gaborcs {

/// Largest inner-product magnitude between distinct synthesis columns,
/// max over (k, l) != (0, 0) of |<psi_(k,l), psi_(0,0)>| -- by shift
/// covariance this equals the maximum over all distinct pairs.  Computed via
/// one DFT per time shift rather than the n^4 pairwise scan.
double coherence(const GaborOperator& op);

/// Gram submatrix (Psi_Lambda)* Psi_Lambda restricted to a support set.
/// entries.at(i, j) = <psi_{lambda_j}, psi_{lambda_i}>; Hermitian by
/// construction (upper triangle computed, lower mirrored).
struct GramSubmatrix {
    CMatrix entries;
    SupportSet support;
};

GramSubmatrix gram_submatrix(const GaborOperator& op, const SupportSet& support);

/// Extremal eigenvalues of a Gram submatrix plus the deviation of the matrix
/// from the identity: op_norm_h = max(|lambda_min - 1|, |lambda_max - 1|) and
/// frobenius_h = ||G - I||_F.  The submatrix is well conditioned for sparse
/// recovery when op_norm_h stays well below 1.
struct ConditioningReport {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double op_norm_h = 0.0;
    double frobenius_h = 0.0;
};

ConditioningReport extremal_eigenvalues(const GramSubmatrix& gram);

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
/// Iterates until the off-diagonal Frobenius norm is <= 1e-12.
std::vector<double> hermitian_eigenvalues(const CMatrix& m);

struct FailureRateReport {
    long long events = 0;
    long long trials = 0;
    double rate = 0.0;
    WilsonInterval wilson;
};

/// Monte-Carlo estimate of P(||G - I||_op > delta) over random Steinhaus
/// windows and uniform random supports of size s.  Deterministic given the
/// master seed; trials are independent streams and may run in parallel.
FailureRateReport conditioning_failure_rate(int n, int s, double delta, int trials,
                                            std::uint64_t master_seed);

/// Monte-Carlo mean of trace((G - I)^2) = ||G - I||_F^2 under the same
/// random model; compares against the moment bounds in the bounds module.
double mean_trace_h2(int n, int s, int draws, std::uint64_t master_seed);

}  // namespace gaborcs
