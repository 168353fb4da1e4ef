#include "gaborcs/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace gaborcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogDoubleMax = 709.0;  // just under log(DBL_MAX)

double log_sum_exp2(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double hi = std::max(a, b);
    const double lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

StirlingTable::StirlingTable(int max_m) : max_m_(max_m) {
    if (max_m < 0) throw std::invalid_argument("StirlingTable: max_m must be >= 0");
    rows_.resize(static_cast<std::size_t>(max_m_) + 1);
    rows_[0] = {BigInt(1)};
    auto entry = [this](int m, int s) -> BigInt {
        if (s < 0 || s > m / 2) return BigInt(0);
        return rows_[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
    };
    for (int m = 1; m <= max_m_; ++m) {
        std::vector<BigInt> row(static_cast<std::size_t>(m / 2) + 1);
        for (int s = 0; s <= m / 2; ++s)
            row[static_cast<std::size_t>(s)] =
                BigInt(m - 1) * (entry(m - 1, s) + entry(m - 2, s - 1));
        rows_[static_cast<std::size_t>(m)] = std::move(row);
    }
    log_rows_.resize(rows_.size());
    for (std::size_t m = 0; m < rows_.size(); ++m) {
        log_rows_[m].resize(rows_[m].size());
        for (std::size_t s = 0; s < rows_[m].size(); ++s) {
            const BigInt& v = rows_[m][s];
            log_rows_[m][s] = v == 0 ? -kInf : log_big(v);
        }
    }
}

const BigInt& StirlingTable::d2(int m, int s) const {
    static const BigInt zero(0);
    if (m < 0 || m > max_m_)
        throw std::out_of_range("StirlingTable::d2: m = " + std::to_string(m) +
                                    " outside [0, " + std::to_string(max_m_) + "]");
    if (s < 0 || s > m / 2) return zero;
    return rows_[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
}

double StirlingTable::log_d2(int m, int s) const {
    if (m < 0 || m > max_m_)
        throw std::out_of_range("StirlingTable::log_d2: m outside table range");
    if (s < 0 || s > m / 2) return -kInf;
    return log_rows_[static_cast<std::size_t>(m)][static_cast<std::size_t>(s)];
}

StirlingTable stirling_table(int max_m) { return StirlingTable(max_m); }

double log_big(const BigInt& v) {
    if (v <= 0) throw std::invalid_argument("log_big: argument must be positive");
    const unsigned bits = boost::multiprecision::msb(v);
    if (bits <= 52) return std::log(v.convert_to<double>());
    // Keep the top 53 bits exactly and account for the shifted-out scale.
    const BigInt top = v >> (bits - 52);
    return std::log(top.convert_to<double>()) + static_cast<double>(bits - 52) * std::numbers::ln2;
}

double g2m_log(double z, int m, const StirlingTable& table) {
    if (!(z > 0.0)) throw std::domain_error("g2m: z must be positive");
    if (m < 1) throw std::domain_error("g2m: m must be >= 1");
    if (2 * m > table.max_m())
        throw std::invalid_argument("g2m: 2m = " + std::to_string(2 * m) +
                                    " exceeds table.max_m = " + std::to_string(table.max_m()));
    const double log_z = std::log(z);
    double peak = -kInf;
    for (int s = 1; s <= m; ++s)
        peak = std::max(peak, table.log_d2(2 * m, s) + s * log_z);
    if (peak == -kInf) return -kInf;
    // Compensated (Kahan) accumulation of the shifted exponentials.
    double sum = 0.0, carry = 0.0;
    for (int s = 1; s <= m; ++s) {
        const double ls = table.log_d2(2 * m, s) + s * log_z;
        if (ls == -kInf) continue;
        const double term = std::exp(ls - peak);
        const double y = term - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return peak + std::log(sum) - 2.0 * m * log_z;
}

double g2m(double z, int m, const StirlingTable& table) {
    const double lv = g2m_log(z, m, table);
    if (lv > kLogDoubleMax)
        throw std::overflow_error("g2m: value exceeds double range (log = " + std::to_string(lv) +
                                  " at z = " + std::to_string(z) + ", m = " + std::to_string(m) + ")");
    return std::exp(lv);
}

double g2m_exact_small(double z, int m, const StirlingTable& table) {
    if (!(z > 0.0)) throw std::domain_error("g2m_exact_small: z must be positive");
    if (m < 1 || 2 * m > 20)
        throw std::invalid_argument("g2m_exact_small: exact path only covers 2m <= 20");
    if (2 * m > table.max_m())
        throw std::invalid_argument("g2m_exact_small: table too small");
    long double acc = 0.0L;
    for (int s = 1; s <= m; ++s)
        acc += table.d2(2 * m, s).convert_to<long double>() * std::pow(static_cast<long double>(z), s);
    return static_cast<double>(acc / std::pow(static_cast<long double>(z), 2 * m));
}

double moment_bound(int n, int s, int m, const StirlingTable& table) {
    if (m <= 0 || m % 2 != 0) throw std::domain_error("moment_bound: moment order must be even and positive");
    if (s < 1 || static_cast<long long>(s) > static_cast<long long>(n) * n)
        throw std::domain_error("moment_bound: sparsity outside [1, n^2]");
    return s * g2m(static_cast<double>(n) / s, m / 2, table);
}

double tail_constant_C() {
    const double e = std::numbers::e;
    return e * e / (4.0 * (e - 1.0));
}

double tail_constant_c() { return std::log(tail_constant_C()); }

BoundReport thm31_probability(int n, int s, double delta, const StirlingTable& table) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("thm31_probability: delta must lie in (0,1)");
    if (s < 1 || static_cast<long long>(s) > static_cast<long long>(n) * n)
        throw std::domain_error("thm31_probability: sparsity outside [1, n^2]");
    const double closed =
        tail_constant_C() * s * std::exp(-delta * delta * n / (4.0 * std::numbers::e * s));

    // Markov route: P(||H|| >= delta) <= delta^{-p} E[Tr H^p] for every even
    // p; minimise the bound over the orders the table covers.
    const double z = static_cast<double>(n) / s;
    const double log_delta = std::log(delta);
    double markov = kInf;
    int markov_order = 0;
    for (int p = 2; p <= table.max_m(); p += 2) {
        const double lv = -p * log_delta + std::log(static_cast<double>(s)) + g2m_log(z, p / 2, table);
        const double v = lv > kLogDoubleMax ? kInf : std::exp(lv);
        if (v < markov) {
            markov = v;
            markov_order = p;
        }
    }

    BoundReport report;
    report.value = closed;
    report.feasible = closed < 1.0;
    report.terms = {{"closed_form", closed},
                    {"markov_min", markov},
                    {"markov_order", static_cast<double>(markov_order)}};
    report.params.n = n;
    report.params.s = s;
    report.params.delta = delta;
    return report;
}

bool thm11_coherence_guarantee(int n, int s, double mu) {
    if (n < 1) throw std::domain_error("thm11_coherence_guarantee: n must be positive");
    if (!(mu > 0.0 && mu <= 1.0)) throw std::domain_error("thm11_coherence_guarantee: mu must lie in (0,1]");
    return s < 0.5 * (1.0 + 1.0 / mu);
}

double thm12b_sparsity_threshold(int n, double t) {
    if (n < 2 || n % 2 != 0) throw std::domain_error("thm12b_sparsity_threshold: n must be even and >= 2");
    if (!(t > 0.0)) throw std::domain_error("thm12b_sparsity_threshold: t must be positive");
    return 0.25 * std::sqrt(n / (2.0 * std::log(static_cast<double>(n)) + std::log(4.0) + t)) + 0.5;
}

BoundReport thm21_failure_probability(int n, int s, double sigma) {
    if (n < 2 || n % 2 != 0) throw std::domain_error("thm21_failure_probability: n must be even and >= 2");
    if (!(sigma > 8.0)) throw std::domain_error("thm21_failure_probability: sigma must exceed 8");
    if (s < 1 || static_cast<long long>(s) >= static_cast<long long>(n) * n)
        throw std::domain_error("thm21_failure_probability: sparsity outside [1, n^2)");
    const double nn = static_cast<double>(n);
    const double log_n = std::log(nn);
    const double term_phase = 2.0 * (nn * nn - s) * std::exp(-nn / (8.0 * sigma * s * log_n));
    const double term_conditioning =
        tail_constant_C() * s * std::exp(-nn / (16.0 * std::numbers::e * s));
    const double term_coherence = 4.0 * std::pow(nn, -(sigma / 4.0 - 2.0));
    BoundReport report;
    report.value = term_phase + term_conditioning + term_coherence;
    report.feasible = report.value < 1.0;
    report.terms = {{"random_phase_tail", term_phase},
                    {"gram_conditioning", term_conditioning},
                    {"coherence_tail", term_coherence}};
    report.params.n = n;
    report.params.s = s;
    report.params.sigma = sigma;
    return report;
}

BoundReport lemma51_conditions(const BoundParams& params) {
    if (params.m < 1) throw std::domain_error("lemma51_conditions: m must be >= 1");
    if (!(params.beta > 0.0 && params.beta < 1.0))
        throw std::domain_error("lemma51_conditions: beta must lie in (0,1)");
    if (!(params.kappa > 0.0 && params.kappa < 1.0))
        throw std::domain_error("lemma51_conditions: kappa must lie in (0,1)");
    if (params.s < 1) throw std::domain_error("lemma51_conditions: sparsity must be >= 1");
    if (params.schedule.empty()) throw std::domain_error("lemma51_conditions: empty schedule");
    double a = 0.0;
    for (std::size_t t = 0; t < params.schedule.size(); ++t) {
        const int lt = params.schedule[t];
        if (lt < 1) throw std::domain_error("lemma51_conditions: schedule entries must be >= 1");
        a += std::pow(params.beta, static_cast<double>(params.m) / lt);
    }
    const double ratio = params.kappa / (1.0 - params.kappa);
    const double limit = a < 1.0
                             ? ((1.0 - a) / (1.0 + a)) * std::pow(static_cast<double>(params.s), -1.5)
                             : 0.0;
    // Relative slack admits the kappa-equality construction despite roundoff.
    const bool feasible = a < 1.0 && ratio <= limit * (1.0 + 1e-9);
    BoundReport report;
    report.value = a;
    report.feasible = feasible;
    report.terms = {{"a", a}, {"kappa_ratio", ratio}, {"kappa_limit", limit}};
    report.params = params;
    return report;
}

BoundReport lemma51_probability(const BoundParams& params, const StirlingTable& table) {
    BoundReport cond = lemma51_conditions(params);
    if (!cond.feasible) {
        BoundReport report;
        report.value = 1.0;
        report.feasible = false;
        report.terms = {{"a", cond.value}};
        report.params = params;
        return report;
    }
    int max_tl = params.m;
    for (std::size_t t = 0; t < params.schedule.size(); ++t)
        max_tl = std::max(max_tl, static_cast<int>(t + 1) * params.schedule[t]);
    if (2 * max_tl > table.max_m())
        throw std::invalid_argument("lemma51_probability: table.max_m too small (need " +
                                    std::to_string(2 * max_tl) + ")");
    if (params.n < 1) throw std::domain_error("lemma51_probability: n must be positive");

    const double z = static_cast<double>(params.n) / params.s;
    const double log_cond = -2.0 * std::log(params.kappa) +
                            std::log(static_cast<double>(params.s)) + g2m_log(z, params.m, table);
    double log_sum_g = -kInf;
    for (std::size_t t = 0; t < params.schedule.size(); ++t) {
        const int order = static_cast<int>(t + 1) * params.schedule[t];
        log_sum_g = log_sum_exp2(log_sum_g, g2m_log(z, order, table));
    }
    const double log_union = 2.0 * std::log(static_cast<double>(params.n)) -
                             2.0 * params.m * std::log(params.beta) + log_sum_g;
    const double log_total = log_sum_exp2(log_cond, log_union);

    auto from_log = [](double lv) { return lv > kLogDoubleMax ? kInf : std::exp(lv); };
    BoundReport report;
    report.value = from_log(log_total);
    report.feasible = true;
    report.terms = {{"conditioning_term", from_log(log_cond)},
                    {"union_term", from_log(log_union)},
                    {"a", cond.value}};
    report.params = params;
    return report;
}

std::vector<int> l_schedule(int m) {
    if (m < 1) throw std::domain_error("l_schedule: m must be >= 1");
    std::vector<int> schedule(static_cast<std::size_t>(m));
    for (int t = 1; t <= m; ++t)
        schedule[static_cast<std::size_t>(t - 1)] = (2 * m + t) / (2 * t);  // round half up
    return schedule;
}

BoundReport lemma51_minimize(int n, int s, double beta, int m_max, const StirlingTable& table) {
    if (m_max < 1) throw std::domain_error("lemma51_minimize: m_max must be >= 1");
    if (s < 1) throw std::domain_error("lemma51_minimize: sparsity must be >= 1");
    const int needed = 2 * ((4 * m_max) / 3 + 1);
    if (needed > table.max_m())
        throw std::invalid_argument("lemma51_minimize: table.max_m must be >= " + std::to_string(needed));

    BoundReport best;
    best.value = kInf;
    bool found = false;
    for (int m = 1; m <= m_max; ++m) {
        BoundParams params;
        params.n = n;
        params.s = s;
        params.beta = beta;
        params.m = m;
        params.schedule = l_schedule(m);
        double a = 0.0;
        for (std::size_t t = 0; t < params.schedule.size(); ++t)
            a += std::pow(beta, static_cast<double>(m) / params.schedule[t]);
        if (a >= 1.0) continue;
        // Equality case of the feasibility condition fixes kappa.
        const double r = ((1.0 - a) / (1.0 + a)) * std::pow(static_cast<double>(s), -1.5);
        params.kappa = r / (1.0 + r);
        const BoundReport candidate = lemma51_probability(params, table);
        if (candidate.feasible && candidate.value < best.value) {
            best = candidate;
            best.terms.emplace_back("best_m", static_cast<double>(m));
            best.terms.emplace_back("kappa", params.kappa);
            found = true;
        }
    }
    if (!found) {
        best = BoundReport{};
        best.value = 1.0;
        best.feasible = false;
        best.params.n = n;
        best.params.s = s;
        best.params.beta = beta;
    }
    return best;
}

RecoveryConstants thm22_constants() {
    const double beta = 0.47;
    const double alpha = beta * beta * beta * std::exp(-1.5);
    const double growth = 1.0 / alpha;  // beta^{-3} e^{3/2}

    const double m1 = 20.0;
    const double q = (3.0 * m1 / (16.0 * (m1 + 1.0))) * alpha *
                     (1.0 - std::log(m1 / (2.0 * (1.0 - alpha))) / m1);
    const double c1 = 1.0 / q;

    const double m2 = 21.0;
    const double c2 = (16.0 * (m2 + 1.0) * growth) / (3.0 * m2 * std::log(growth));

    const double a = 0.957;
    const double c3 =
        std::log(2.0 * (1.0 + a) * (1.0 + a) / ((1.0 - a) * (1.0 - a)) / (1.0 - alpha));

    return RecoveryConstants{c1, c2, c3};
}

double coherence_tail_bound(int n, double alpha, double kappa_prime) {
    if (n < 2) throw std::domain_error("coherence_tail_bound: n must be >= 2");
    if (!(kappa_prime > 0.0 && kappa_prime < 1.0))
        throw std::domain_error("coherence_tail_bound: kappa' must lie in (0,1)");
    if (!(alpha > 0.0)) throw std::domain_error("coherence_tail_bound: alpha must be positive");
    const double nn = static_cast<double>(n);
    return 2.0 / (1.0 - kappa_prime) * nn * (nn - 1.0) * std::exp(-kappa_prime * alpha * alpha / 2.0);
}

double bernstein_tail(double u, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::domain_error("bernstein_tail: kappa must lie in (0,1)");
    if (u < 0.0) throw std::domain_error("bernstein_tail: u must be nonnegative");
    return std::exp(-kappa * u * u) / (1.0 - kappa);
}

}  // namespace gaborcs
