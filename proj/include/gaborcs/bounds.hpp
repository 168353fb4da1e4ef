#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <utility>
#include <vector>

#include "gaborcs/types.hpp"

namespace gaborcs {

using BigInt = boost::multiprecision::cpp_int;

/// Triangular table of 2-associated Stirling numbers of the first kind:
/// d2(m, s) counts permutations of m elements with exactly s cycles, all of
/// length >= 2.  Built from the recursion
///     d2(m+1, s) = m * (d2(m, s) + d2(m-1, s-1)),
/// d2(0, 0) = 1, in exact big-integer arithmetic; natural logs of all
/// entries are precomputed for the log-domain evaluators.
class StirlingTable {
public:
    explicit StirlingTable(int max_m);

    int max_m() const { return max_m_; }

    /// Exact value; returns zero outside the triangle (s < 0, s > m/2, or
    /// m >= 1 with s = 0).  Throws for m outside [0, max_m].
    const BigInt& d2(int m, int s) const;

    /// Natural log of d2(m, s); -infinity where the entry is zero.
    double log_d2(int m, int s) const;

private:
    int max_m_;
    std::vector<std::vector<BigInt>> rows_;      // rows_[m][s], s = 0 .. m/2
    std::vector<std::vector<double>> log_rows_;  // same shape
};

StirlingTable stirling_table(int max_m);

/// Natural log of a positive big integer, exact to double precision.
double log_big(const BigInt& v);

/// G_{2m}(z) = z^{-2m} sum_{s=1}^m d2(2m, s) z^s.  g2m evaluates in the log
/// domain with compensated summation and throws std::overflow_error when the
/// result exceeds double range; g2m_log returns the natural log directly and
/// never overflows; g2m_exact_small sums the definition term by term in
/// extended precision for 2m <= 20 and exists to cross-check the log path.
double g2m(double z, int m, const StirlingTable& table);
double g2m_log(double z, int m, const StirlingTable& table);
double g2m_exact_small(double z, int m, const StirlingTable& table);

/// Moment bound E[Tr H^m] <= S * G_m(n/S) for even m, where H = G - I of a
/// random size-S Gram submatrix.
double moment_bound(int n, int s, int m, const StirlingTable& table);

/// Parameters shared by the probability evaluators.  Each evaluator reads
/// only the fields it documents and validates them on use.
struct BoundParams {
    int n = 0;
    int s = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    double sigma = 0.0;
    double kappa = 0.0;
    double kappa_prime = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    int big_m = 0;               // the integer M >= 6 of the constant derivation
    int m = 0;                   // moment order
    std::vector<int> schedule;   // L_t, t = 1 .. schedule.size()
};

/// Evaluator output: raw value (never clamped in storage), a named breakdown
/// of terms, the parameters used, and a feasibility flag whose meaning is
/// documented per evaluator.  clamped() is the presentation form for values
/// that are probabilities.
struct BoundReport {
    double value = 1.0;
    bool feasible = false;
    std::vector<std::pair<std::string, double>> terms;
    BoundParams params;

    double clamped() const { return std::min(1.0, std::max(0.0, value)); }
};

/// C = e^2 / (4(e - 1)) ~ 1.075 and its log c ~ 0.0724, the constants of the
/// operator-norm tail bound.
double tail_constant_C();
double tail_constant_c();

/// Operator-norm tail P(||G - I|| > delta) <= C * S * exp(-delta^2 n / (4eS)).
/// Terms also record the minimised Markov bound min over even p of
/// delta^{-p} * moment_bound(n, S, p); feasible means the closed form can be
/// met by some failure probability below 1.
BoundReport thm31_probability(int n, int s, double delta, const StirlingTable& table);

/// Coherence-based recovery guarantee: true iff S < (1 + 1/mu) / 2.  With
/// mu = 1/sqrt(n) this is the S < (sqrt(n) + 1)/2 regime.
bool thm11_coherence_guarantee(int n, int s, double mu);

/// Sparsity threshold (1/4) sqrt(n / (2 ln n + ln 4 + t)) + 1/2 below which
/// recovery holds with probability >= 1 - e^{-t} (even n).
double thm12b_sparsity_threshold(int n, double t);

/// Random-phase failure bound: sum of three terms
///   2 (n^2 - S) exp(-n / (8 sigma S ln n))
///   C S exp(-n / (16 e S))
///   4 n^{-(sigma/4 - 2)}
BoundReport thm21_failure_probability(int n, int s, double sigma);

/// Feasibility side of the chaining lemma: a = sum_t beta^{m / L_t}; feasible
/// iff a < 1 and kappa/(1 - kappa) <= ((1 - a)/(1 + a)) S^{-3/2}.  value = a.
BoundReport lemma51_conditions(const BoundParams& params);

/// Probability side: kappa^{-2} S G_{2m}(n/S) + n^2 beta^{-2m} sum_t
/// G_{2 t L_t}(n/S).  Infeasible parameter sets report feasible = false with
/// value 1 rather than throwing.
BoundReport lemma51_probability(const BoundParams& params, const StirlingTable& table);

/// L_t = m/t rounded to the nearest integer (ties rounding up), t = 1 .. m.
std::vector<int> l_schedule(int m);

/// Minimise lemma51_probability over m in [1, m_max] with the rounded
/// schedule and kappa set to its equality case from the feasibility bound.
/// Needs table.max_m >= 2 * floor(4 * m_max / 3).
BoundReport lemma51_minimize(int n, int s, double beta, int m_max, const StirlingTable& table);

struct RecoveryConstants {
    double c1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

/// The explicit constants of the n >= C1 S^{3/2} ln^{C3}(...) recovery
/// condition, reproduced from their defining expressions at beta = 0.47.
RecoveryConstants thm22_constants();

/// Coherence tail for Steinhaus windows:
/// P(mu > alpha / sqrt(n)) <= 2 (1 - kappa')^{-1} n (n - 1) exp(-kappa' alpha^2 / 2).
double coherence_tail_bound(int n, double alpha, double kappa_prime);

/// Bernstein-type tail for Steinhaus sums: e^{-kappa u^2} / (1 - kappa).
double bernstein_tail(double u, double kappa);

}  // namespace gaborcs
