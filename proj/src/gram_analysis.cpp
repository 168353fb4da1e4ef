#include "gaborcs/gram_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "gaborcs/parallel.hpp"
#include "gaborcs/rng.hpp"

namespace gaborcs {

double coherence(const GaborOperator& op) {
    const int n = op.n();
    if (n < 2) throw std::domain_error("coherence: needs n >= 2 (no distinct column pairs)");
    const cvec& g = op.window().values;
    cvec v(static_cast<std::size_t>(n));
    cvec f(static_cast<std::size_t>(n));
    double best = 0.0;
    for (int k = 0; k < n; ++k) {
        // |<psi_(k,l), psi_(0,0)>| = |DFT_l of q -> g_q conj(g_{(q+k) mod n})|.
        for (int q = 0; q < n; ++q)
            v[static_cast<std::size_t>(q)] =
                g[static_cast<std::size_t>(q)] * std::conj(g[static_cast<std::size_t>((q + k) % n)]);
        op.plan().forward(v, f);
        for (int l = 0; l < n; ++l) {
            if (k == 0 && l == 0) continue;
            best = std::max(best, std::abs(f[static_cast<std::size_t>(l)]));
        }
    }
    return best;
}

GramSubmatrix gram_submatrix(const GaborOperator& op, const SupportSet& support) {
    if (support.n() != op.n())
        throw std::invalid_argument("gram_submatrix: support grid order mismatch");
    const std::size_t s = support.size();
    if (s == 0) throw std::invalid_argument("gram_submatrix: empty support");
    std::vector<cvec> cols(s);
    for (std::size_t i = 0; i < s; ++i) cols[i] = op.column(support[i]);
    CMatrix m(static_cast<int>(s), static_cast<int>(s));
    for (std::size_t i = 0; i < s; ++i) {
        m.at(static_cast<int>(i), static_cast<int>(i)) = cxd(l2_norm_sq(cols[i]), 0.0);
        for (std::size_t j = i + 1; j < s; ++j) {
            const cxd e = inner(cols[j], cols[i]);
            m.at(static_cast<int>(i), static_cast<int>(j)) = e;
            m.at(static_cast<int>(j), static_cast<int>(i)) = std::conj(e);
        }
    }
    return GramSubmatrix{std::move(m), support};
}

std::vector<double> hermitian_eigenvalues(const CMatrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("hermitian_eigenvalues: matrix not square");
    const int s = m.rows;
    if (s == 0) return {};

    double scale = 0.0;
    for (const cxd& z : m.data) scale = std::max(scale, std::abs(z));
    const double herm_tol = 1e-10 * std::max(1.0, scale);
    for (int r = 0; r < s; ++r)
        for (int c = 0; c < s; ++c)
            if (std::abs(m.at(r, c) - std::conj(m.at(c, r))) > herm_tol)
                throw std::invalid_argument("hermitian_eigenvalues: input not Hermitian within tolerance");

    // Work on an exactly Hermitian copy (symmetrise away roundoff).
    cvec a = m.data;
    auto A = [&a, s](int r, int c) -> cxd& { return a[static_cast<std::size_t>(c) * s + r]; };
    for (int r = 0; r < s; ++r) {
        A(r, r) = cxd(A(r, r).real(), 0.0);
        for (int c = r + 1; c < s; ++c) {
            const cxd mean = 0.5 * (A(r, c) + std::conj(A(c, r)));
            A(r, c) = mean;
            A(c, r) = std::conj(mean);
        }
    }

    auto off_diag_norm = [&]() {
        double acc = 0.0;
        for (int r = 0; r < s; ++r)
            for (int c = 0; c < s; ++c)
                if (r != c) acc += std::norm(A(r, c));
        return std::sqrt(acc);
    };

    constexpr double kOffTol = 1e-12;
    constexpr int kMaxSweeps = 60;
    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_diag_norm() <= kOffTol) {
            converged = true;
            break;
        }
        for (int p = 0; p < s; ++p) {
            for (int q = p + 1; q < s; ++q) {
                const cxd apq = A(p, q);
                const double b = std::abs(apq);
                if (b == 0.0) continue;
                const cxd u = apq / b;  // e^{i arg(apq)}
                const double app = A(p, p).real();
                const double aqq = A(q, q).real();
                // Rotation angle from the 2x2 block [[app, b], [b, aqq]].
                const double tau = (aqq - app) / (2.0 * b);
                const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                            : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (int r = 0; r < s; ++r) {
                    if (r == p || r == q) continue;
                    const cxd arp = A(r, p);
                    const cxd arq = A(r, q);
                    A(r, p) = c * arp - sn * std::conj(u) * arq;
                    A(r, q) = sn * u * arp + c * arq;
                    A(p, r) = std::conj(A(r, p));
                    A(q, r) = std::conj(A(r, q));
                }
                A(p, p) = cxd(app * c * c - 2.0 * sn * c * b + aqq * sn * sn, 0.0);
                A(q, q) = cxd(app * sn * sn + 2.0 * sn * c * b + aqq * c * c, 0.0);
                A(p, q) = cxd(0.0, 0.0);
                A(q, p) = cxd(0.0, 0.0);
            }
        }
    }
    if (!converged && off_diag_norm() > kOffTol)
        throw std::runtime_error("hermitian_eigenvalues: Jacobi sweeps did not converge");

    std::vector<double> eigs(static_cast<std::size_t>(s));
    for (int r = 0; r < s; ++r) eigs[static_cast<std::size_t>(r)] = A(r, r).real();
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

namespace {

double frobenius_deviation_from_identity(const CMatrix& g) {
    double acc = 0.0;
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const cxd v = r == c ? g.at(r, c) - cxd(1.0, 0.0) : g.at(r, c);
            acc += std::norm(v);
        }
    return std::sqrt(acc);
}

}  // namespace

ConditioningReport extremal_eigenvalues(const GramSubmatrix& gram) {
    const std::vector<double> eigs = hermitian_eigenvalues(gram.entries);
    if (eigs.empty()) throw std::invalid_argument("extremal_eigenvalues: empty Gram matrix");
    double lo = eigs.front();
    const double hi = eigs.back();
    // Gram matrices are positive semidefinite; tiny negative eigenvalues are
    // roundoff and get clamped to zero.
    if (lo < 0.0 && lo >= -1e-10) lo = 0.0;
    ConditioningReport report;
    report.lambda_min = lo;
    report.lambda_max = hi;
    report.op_norm_h = std::max(std::abs(lo - 1.0), std::abs(hi - 1.0));
    report.frobenius_h = frobenius_deviation_from_identity(gram.entries);
    return report;
}

namespace {

GramSubmatrix random_gram_draw(int n, int s, std::uint64_t master_seed, int trial) {
    const std::uint64_t key = trial_key(s, trial);
    const Window w = steinhaus_window(n, derive_seed(master_seed, key, SeedRole::Window));
    const GaborOperator op(w);
    const SupportSet support =
        sample_uniform_support(n, s, derive_seed(master_seed, key, SeedRole::Support));
    return gram_submatrix(op, support);
}

}  // namespace

FailureRateReport conditioning_failure_rate(int n, int s, double delta, int trials,
                                            std::uint64_t master_seed) {
    if (n < 2) throw std::domain_error("conditioning_failure_rate: n must be >= 2");
    if (s < 1 || static_cast<long long>(s) > static_cast<long long>(n) * n)
        throw std::domain_error("conditioning_failure_rate: sparsity outside [1, n^2]");
    if (delta <= 0.0) throw std::domain_error("conditioning_failure_rate: delta must be positive");
    if (trials < 1) throw std::domain_error("conditioning_failure_rate: trials must be >= 1");

    std::vector<char> failed(static_cast<std::size_t>(trials), 0);
    parallel_for_index(static_cast<std::size_t>(trials), [&](std::size_t t) {
        const GramSubmatrix gram = random_gram_draw(n, s, master_seed, static_cast<int>(t));
        const ConditioningReport report = extremal_eigenvalues(gram);
        failed[t] = report.op_norm_h > delta ? 1 : 0;
    });

    FailureRateReport out;
    out.trials = trials;
    for (char f : failed) out.events += f;
    out.rate = static_cast<double>(out.events) / static_cast<double>(out.trials);
    out.wilson = wilson_interval(out.events, out.trials);
    return out;
}

double mean_trace_h2(int n, int s, int draws, std::uint64_t master_seed) {
    if (draws < 1) throw std::domain_error("mean_trace_h2: draws must be >= 1");
    std::vector<double> trace(static_cast<std::size_t>(draws), 0.0);
    parallel_for_index(static_cast<std::size_t>(draws), [&](std::size_t t) {
        const GramSubmatrix gram = random_gram_draw(n, s, master_seed, static_cast<int>(t));
        const double f = frobenius_deviation_from_identity(gram.entries);
        trace[t] = f * f;  // trace(H^2) = ||H||_F^2 for Hermitian H
    });
    double acc = 0.0;
    for (double v : trace) acc += v;
    return acc / static_cast<double>(draws);
}

}  // namespace gaborcs
