#include "gaborcs/bp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gaborcs {

namespace {

/// Solve A x = b for Hermitian positive definite A via Cholesky A = L L*.
/// Throws when a pivot collapses (numerically singular system).
cvec cholesky_solve(const CMatrix& a, const cvec& b) {
    const int s = a.rows;
    if (a.cols != s || static_cast<int>(b.size()) != s)
        throw std::invalid_argument("cholesky_solve: dimension mismatch");
    CMatrix l(s, s);
    for (int j = 0; j < s; ++j) {
        double diag = a.at(j, j).real();
        for (int k = 0; k < j; ++k) diag -= std::norm(l.at(j, k));
        if (diag <= 0.0)
            throw std::runtime_error("cholesky_solve: matrix numerically singular (pivot " +
                                     std::to_string(diag) + " at " + std::to_string(j) + ")");
        const double ljj = std::sqrt(diag);
        l.at(j, j) = cxd(ljj, 0.0);
        for (int i = j + 1; i < s; ++i) {
            cxd acc = a.at(i, j);
            for (int k = 0; k < j; ++k) acc -= l.at(i, k) * std::conj(l.at(j, k));
            l.at(i, j) = acc / ljj;
        }
    }
    // Forward solve L z = b, then backward solve L* x = z.
    cvec z(static_cast<std::size_t>(s));
    for (int i = 0; i < s; ++i) {
        cxd acc = b[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k) acc -= l.at(i, k) * z[static_cast<std::size_t>(k)];
        z[static_cast<std::size_t>(i)] = acc / l.at(i, i).real();
    }
    cvec x(static_cast<std::size_t>(s));
    for (int i = s - 1; i >= 0; --i) {
        cxd acc = z[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < s; ++k) acc -= std::conj(l.at(k, i)) * x[static_cast<std::size_t>(k)];
        x[static_cast<std::size_t>(i)] = acc / l.at(i, i).real();
    }
    return x;
}

}  // namespace

BPConfig BPConfig::defaults_for(int n) {
    if (n <= 0) throw std::invalid_argument("BPConfig::defaults_for: n must be positive");
    BPConfig config;
    config.primal_step = 0.99 / std::sqrt(static_cast<double>(n));
    config.dual_step = config.primal_step;
    return config;
}

BPResult basis_pursuit(const GaborOperator& op, const cvec& y, const BPConfig& config) {
    const cvec zeros(static_cast<std::size_t>(op.n()) * op.n(), cxd(0.0, 0.0));
    return basis_pursuit(op, y, config, zeros);
}

BPResult basis_pursuit(const GaborOperator& op, const cvec& y, const BPConfig& config,
                       const cvec& initial) {
    const int n = op.n();
    const std::size_t grid = static_cast<std::size_t>(n) * n;
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("basis_pursuit: measurement length must equal n");
    if (initial.size() != grid)
        throw std::invalid_argument("basis_pursuit: initial point must have length n^2");
    if (config.max_iterations < 1)
        throw std::invalid_argument("basis_pursuit: max_iterations must be >= 1");
    const double tau = config.primal_step;
    const double sigma = config.dual_step;
    if (!(tau > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("basis_pursuit: step sizes must be positive");
    if (tau * sigma * n > 1.0 + 1e-12)
        throw std::invalid_argument(
            "basis_pursuit: primal_step * dual_step * n must be <= 1 for convergence");

    BPResult result;
    const double norm_y = l2_norm(y);
    if (norm_y == 0.0) {
        // Zero measurement: the minimiser is exactly zero, no iteration needed.
        result.coefficients.assign(grid, cxd(0.0, 0.0));
        result.converged = true;
        return result;
    }

    cvec x = initial;
    cvec x_next(grid);
    cvec gradient(grid);
    cvec dual(static_cast<std::size_t>(n), cxd(0.0, 0.0));
    cvec synth_cur(static_cast<std::size_t>(n));
    cvec synth_prev(static_cast<std::size_t>(n));
    op.synthesize_into(x, synth_cur);
    synth_prev = synth_cur;  // overrelaxed point coincides with x initially

    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    for (int it = 1; it <= config.max_iterations; ++it) {
        // Dual ascent against the overrelaxed synthesis 2 A x_k - A x_{k-1}.
        for (int q = 0; q < n; ++q) {
            const std::size_t qi = static_cast<std::size_t>(q);
            dual[qi] += sigma * (2.0 * synth_cur[qi] - synth_prev[qi] - y[qi]);
        }
        op.analyze_into(dual, gradient);
        // Primal descent plus complex soft threshold with radius tau.
        for (std::size_t i = 0; i < grid; ++i) {
            const cxd v = x[i] - tau * gradient[i];
            const double mag = std::abs(v);
            x_next[i] = mag <= tau ? cxd(0.0, 0.0) : v * (1.0 - tau / mag);
        }
        x.swap(x_next);
        op.synthesize_into(x, synth_prev);
        synth_prev.swap(synth_cur);  // synth_cur = A x_{k+1}, synth_prev = A x_k

        double dist_sq = 0.0;
        for (int q = 0; q < n; ++q) dist_sq += std::norm(synth_cur[static_cast<std::size_t>(q)] - y[static_cast<std::size_t>(q)]);
        residual = std::sqrt(dist_sq) / norm_y;
        iterations = it;
        if (residual <= config.convergence_tol) {
            converged = true;
            break;
        }
    }

    result.coefficients = std::move(x);
    result.residual = residual;
    result.l1_value = l1_norm(result.coefficients);
    result.iterations = iterations;
    result.converged = converged;
    return result;
}

CertificateReport dual_certificate(const GaborOperator& op, const SupportSet& support,
                                   const cvec& signs, bool want_magnitudes) {
    const int n = op.n();
    if (support.n() != n) throw std::invalid_argument("dual_certificate: support grid order mismatch");
    const std::size_t s = support.size();
    if (s == 0) throw std::invalid_argument("dual_certificate: empty support");
    if (signs.size() != s)
        throw std::invalid_argument("dual_certificate: sign vector length must equal support size");
    for (const cxd& sg : signs)
        if (std::abs(std::abs(sg) - 1.0) > 1e-8)
            throw std::invalid_argument("dual_certificate: signs must be unit modulus");

    const GramSubmatrix gram = gram_submatrix(op, support);
    CertificateReport report;
    report.gram_condition = extremal_eigenvalues(gram);
    if (report.gram_condition.lambda_min <= 1e-10)
        throw std::runtime_error("dual_certificate: Gram submatrix numerically singular (lambda_min = " +
                                 std::to_string(report.gram_condition.lambda_min) + ")");

    // v = (Psi_L^* Psi_L)^{-1} signs, then P = Psi^* (Psi_L v); on the support
    // P reproduces the signs, off the support |P| < 1 certifies uniqueness.
    const cvec v = cholesky_solve(gram.entries, signs);
    const cvec interpolant = op.synthesize(SparseCoeffs(support, v));
    const cvec p = op.analyze(interpolant);

    std::vector<char> on_support(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t i = 0; i < s; ++i) on_support[static_cast<std::size_t>(support.column(i))] = 1;
    double max_off = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c)
        if (!on_support[c]) max_off = std::max(max_off, std::abs(p[c]));
    report.max_offsupport_magnitude = max_off;
    report.certifies_uniqueness = max_off < 1.0 && report.gram_condition.lambda_min > 0.0;
    if (want_magnitudes) {
        std::vector<double> mags(p.size());
        for (std::size_t c = 0; c < p.size(); ++c) mags[c] = std::abs(p[c]);
        report.magnitudes = std::move(mags);
    }
    return report;
}

double pseudo_inverse_row_norm(const GaborOperator& op, const SupportSet& support,
                               const TFIndex& rho) {
    if (support.n() != op.n())
        throw std::invalid_argument("pseudo_inverse_row_norm: support grid order mismatch");
    if (support.size() == 0) throw std::invalid_argument("pseudo_inverse_row_norm: empty support");
    if (support.contains(rho))
        throw std::invalid_argument("pseudo_inverse_row_norm: rho must lie outside the support");
    const GramSubmatrix gram = gram_submatrix(op, support);
    const cvec col_rho = op.column(rho);
    cvec b(support.size());
    for (std::size_t i = 0; i < support.size(); ++i)
        b[i] = inner(col_rho, op.column(support[i]));
    return l2_norm(cholesky_solve(gram.entries, b));
}

SparseCoeffs l0_oracle(const GaborOperator& op, const cvec& y, int max_s) {
    const int n = op.n();
    if (n > 8 || max_s > 2 || max_s < 0)
        throw std::invalid_argument("l0_oracle: exhaustive search is limited to n <= 8, max_s <= 2");
    if (static_cast<int>(y.size()) != n)
        throw std::invalid_argument("l0_oracle: measurement length must equal n");
    const double norm_y = l2_norm(y);
    if (norm_y == 0.0) return SparseCoeffs::zero(n);
    const double tol = 1e-8 * norm_y;
    const int grid = n * n;

    std::vector<cvec> cols(static_cast<std::size_t>(grid));
    for (int c = 0; c < grid; ++c) cols[static_cast<std::size_t>(c)] = op.column(tf_from_column(c, n));

    auto residual_norm = [&](const cvec& fit) {
        double acc = 0.0;
        for (int q = 0; q < n; ++q) acc += std::norm(y[static_cast<std::size_t>(q)] - fit[static_cast<std::size_t>(q)]);
        return std::sqrt(acc);
    };

    if (max_s >= 1) {
        for (int c = 0; c < grid; ++c) {
            const cvec& col = cols[static_cast<std::size_t>(c)];
            const double gram = l2_norm_sq(col);
            if (gram == 0.0) continue;
            const cxd coef = inner(y, col) / gram;
            cvec fit(static_cast<std::size_t>(n));
            for (int q = 0; q < n; ++q) fit[static_cast<std::size_t>(q)] = coef * col[static_cast<std::size_t>(q)];
            if (residual_norm(fit) <= tol)
                return SparseCoeffs(SupportSet(n, {tf_from_column(c, n)}), {coef});
        }
    }
    if (max_s >= 2) {
        for (int c1 = 0; c1 < grid; ++c1) {
            for (int c2 = c1 + 1; c2 < grid; ++c2) {
                const cvec& a = cols[static_cast<std::size_t>(c1)];
                const cvec& b = cols[static_cast<std::size_t>(c2)];
                const double g11 = l2_norm_sq(a);
                const double g22 = l2_norm_sq(b);
                const cxd g12 = inner(b, a);  // <b, a>, entry (1,2) of the Gram
                const double det = g11 * g22 - std::norm(g12);
                if (det <= 1e-14 * g11 * g22) continue;  // effectively collinear pair
                const cxd b1 = inner(y, a);
                const cxd b2 = inner(y, b);
                const cxd coef1 = (g22 * b1 - g12 * b2) / det;
                const cxd coef2 = (g11 * b2 - std::conj(g12) * b1) / det;
                cvec fit(static_cast<std::size_t>(n));
                for (int q = 0; q < n; ++q)
                    fit[static_cast<std::size_t>(q)] =
                        coef1 * a[static_cast<std::size_t>(q)] + coef2 * b[static_cast<std::size_t>(q)];
                if (residual_norm(fit) <= tol)
                    return SparseCoeffs(SupportSet(n, {tf_from_column(c1, n), tf_from_column(c2, n)}),
                                        {coef1, coef2});
            }
        }
    }
    throw std::runtime_error("l0_oracle: no support of size <= " + std::to_string(max_s) +
                             " reproduces the measurement");
}

double relative_error(const SparseCoeffs& truth, const BPResult& result) {
    const cvec full = truth.to_full();
    if (full.size() != result.coefficients.size())
        throw std::invalid_argument("relative_error: grid order mismatch");
    const double norm_truth = l2_norm(full);
    if (norm_truth == 0.0)
        return l2_norm(result.coefficients) == 0.0 ? 0.0
                                                   : std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t i = 0; i < full.size(); ++i) acc += std::norm(result.coefficients[i] - full[i]);
    return std::sqrt(acc) / norm_truth;
}

bool verify_recovery(const SparseCoeffs& truth, const BPResult& result, double tol) {
    if (!(tol >= 0.0)) throw std::invalid_argument("verify_recovery: tolerance must be nonnegative");
    return relative_error(truth, result) <= tol;
}

SupportSet identified_support(const BPResult& result, int n, double threshold) {
    if (static_cast<long long>(result.coefficients.size()) != static_cast<long long>(n) * n)
        throw std::invalid_argument("identified_support: grid order mismatch");
    std::vector<TFIndex> picked;
    for (std::size_t c = 0; c < result.coefficients.size(); ++c)
        if (std::abs(result.coefficients[c]) > threshold)
            picked.push_back(tf_from_column(static_cast<int>(c), n));
    return SupportSet(n, std::move(picked));
}

}  // namespace gaborcs
