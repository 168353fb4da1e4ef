#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gaborcs/bounds.hpp"

using namespace gaborcs;

namespace {

/// Count permutations of m elements with exactly s cycles, all of length
/// >= 2, by enumerating every permutation: the ground truth for the table.
long long count_cycle_restricted(int m, int s) {
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    long long count = 0;
    do {
        std::vector<bool> seen(static_cast<std::size_t>(m), false);
        int cycles = 0;
        bool ok = true;
        for (int i = 0; i < m && ok; ++i) {
            if (seen[static_cast<std::size_t>(i)]) continue;
            int len = 0;
            int j = i;
            while (!seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = true;
                j = perm[static_cast<std::size_t>(j)];
                ++len;
            }
            if (len < 2) ok = false;
            ++cycles;
        }
        if (ok && cycles == s) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

}  // namespace

TEST_CASE("Stirling table matches brute-force permutation counts") {
    const StirlingTable table = stirling_table(12);
    for (int m = 1; m <= 8; ++m)
        for (int s = 0; s <= m / 2 + 1; ++s) {
            const long long brute = count_cycle_restricted(m, s);
            CHECK(table.d2(m, s) == BigInt(brute));
        }
    CHECK(table.d2(0, 0) == 1);
}

TEST_CASE("Stirling table fixed values and row sums") {
    const StirlingTable table = stirling_table(10);
    CHECK(table.d2(2, 1) == 1);
    CHECK(table.d2(3, 1) == 2);
    CHECK(table.d2(4, 1) == 6);
    CHECK(table.d2(4, 2) == 3);
    CHECK(table.d2(5, 1) == 24);
    CHECK(table.d2(5, 2) == 20);
    CHECK(table.d2(6, 1) == 120);
    CHECK(table.d2(6, 2) == 130);
    CHECK(table.d2(6, 3) == 15);
    CHECK(table.d2(8, 4) == 105);
    CHECK(table.d2(10, 5) == 945);

    SUBCASE("row sums are the derangement numbers") {
        const long long derangements[] = {1, 0, 1, 2, 9, 44, 265, 1854, 14833, 133496, 1334961};
        for (int m = 0; m <= 10; ++m) {
            BigInt sum = 0;
            for (int s = 0; s <= m / 2; ++s) sum += table.d2(m, s);
            CHECK(sum == BigInt(derangements[m]));
        }
    }
    SUBCASE("entries outside the triangle are zero") {
        CHECK(table.d2(5, 3) == 0);
        CHECK(table.d2(7, 0) == 0);
        CHECK(table.d2(3, -1) == 0);
    }
    SUBCASE("orders beyond the table throw") {
        CHECK_THROWS_AS(table.d2(11, 1), std::out_of_range);
        CHECK_THROWS_AS(table.d2(-1, 0), std::out_of_range);
    }
}

TEST_CASE("recursion, positivity, and growth estimate hold at large order") {
    const StirlingTable table = stirling_table(200);
    for (int m = 2; m < 200; ++m)
        for (int s = 1; s <= (m + 1) / 2; ++s)
            CHECK(table.d2(m + 1, s) == BigInt(m) * (table.d2(m, s) + table.d2(m - 1, s - 1)));
    // In-triangle entries are strictly positive.
    for (int m = 2; m <= 200; ++m)
        for (int s = 1; s <= m / 2; ++s) CHECK(table.d2(m, s) > 0);
    // d2(m+1, s) <= (2m)^(m-s), compared in logs to avoid overflow.
    for (int m = 1; m < 200; ++m)
        for (int s = 1; s <= (m + 1) / 2; ++s) {
            const double lhs = table.log_d2(m + 1, s);
            const double rhs = (m - s) * std::log(2.0 * m);
            CHECK(lhs <= rhs + 1e-9);
        }
}

TEST_CASE("log entries agree with exact big-integer logarithms") {
    const StirlingTable table = stirling_table(120);
    // Spot-check a huge entry: log must be exact to double precision.
    const double direct = table.log_d2(120, 30);
    const BigInt& v = table.d2(120, 30);
    // Compare against log via string-based decimal magnitude.
    const std::string digits = v.str();
    const double approx =
        std::log(std::stod(digits.substr(0, 15)) ) + (static_cast<double>(digits.size()) - 15.0) * std::log(10.0);
    CHECK(direct == doctest::Approx(approx).epsilon(1e-12));
    CHECK(table.log_d2(7, 0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("G_2m evaluator agrees with exact small-order sums and closed forms") {
    const StirlingTable table = stirling_table(24);
    // G_2(z) = d2(2,1) z / z^2 = 1/z.
    CHECK(g2m(16.0, 1, table) == doctest::Approx(0.0625).epsilon(1e-14));
    // G_4(8) = (6*8 + 3*64) / 8^4 = 240/4096.
    CHECK(g2m(8.0, 2, table) == doctest::Approx(0.05859375).epsilon(1e-13));
    for (int m = 1; m <= 10; ++m)
        for (double z : {1.5, 4.0, 16.0, 100.0, 1000.0}) {
            CHECK(g2m(z, m, table) == doctest::Approx(g2m_exact_small(z, m, table)).epsilon(1e-11));
            CHECK(g2m_log(z, m, table) == doctest::Approx(std::log(g2m(z, m, table))).epsilon(1e-11));
        }
    SUBCASE("decreasing in z") {
        for (int m : {1, 3, 7}) {
            double prev = g2m(2.0, m, table);
            for (double z : {4.0, 8.0, 32.0, 256.0}) {
                const double cur = g2m(z, m, table);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }
    SUBCASE("overflow is reported, not returned") {
        const StirlingTable big = stirling_table(400);
        // At z barely above 1 and huge order the sum exceeds double range.
        CHECK_THROWS_AS(g2m(1.0000001, 200, big), std::overflow_error);
        CHECK(std::isfinite(g2m_log(1.0000001, 200, big)));
    }
    SUBCASE("domain checks") {
        CHECK_THROWS_AS(g2m(0.0, 2, table), std::domain_error);
        CHECK_THROWS_AS(g2m(8.0, 0, table), std::domain_error);
        CHECK_THROWS_AS(g2m_exact_small(8.0, 11, table), std::invalid_argument);  // 2m > 20
    }
}

TEST_CASE("moment bound reduces to S G_m(n/S)") {
    const StirlingTable table = stirling_table(24);
    // m = 2: S * G_2(n/S) = S^2 / n exactly.
    CHECK(moment_bound(64, 4, 2, table) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(moment_bound(1024, 4, 2, table) == doctest::Approx(16.0 / 1024.0).epsilon(1e-14));
    CHECK(moment_bound(64, 4, 4, table) ==
          doctest::Approx(4.0 * g2m(16.0, 2, table)).epsilon(1e-14));
    CHECK_THROWS_AS(moment_bound(64, 4, 3, table), std::domain_error);  // odd order
    CHECK_THROWS_AS(moment_bound(4, 64, 2, table), std::domain_error);  // S > n^2
}

TEST_CASE("operator-norm tail constants") {
    CHECK(tail_constant_C() == doctest::Approx(1.0750646338320928).epsilon(1e-15));
    CHECK(tail_constant_c() == doctest::Approx(0.072380784267191189).epsilon(1e-13));
}

TEST_CASE("conditioning tail bound reproduces the reference value") {
    const StirlingTable table = stirling_table(60);
    const BoundReport report = thm31_probability(1024, 4, 0.5, table);
    CHECK(report.value == doctest::Approx(0.011945556468975174).epsilon(1e-12));
    CHECK(report.feasible);
    REQUIRE(report.terms.size() == 3);
    CHECK(report.terms[0].first == "closed_form");
    CHECK(report.terms[0].second == report.value);
    CHECK(report.terms[1].first == "markov_min");
    CHECK(report.terms[1].second / 7.8225519013115197e-11 == doctest::Approx(1.0).epsilon(1e-9));
    // The minimised Markov route beats the closed form at this scale.
    CHECK(report.terms[1].second < report.value);

    SUBCASE("monotone in sparsity") {
        double prev = 0.0;
        for (int s : {1, 2, 4, 8, 16}) {
            const double v = thm31_probability(1024, s, 0.5, table).value;
            CHECK(v > prev);
            prev = v;
        }
    }
    SUBCASE("domain checks") {
        CHECK_THROWS_AS(thm31_probability(64, 4, 0.0, table), std::domain_error);
        CHECK_THROWS_AS(thm31_probability(64, 4, 1.0, table), std::domain_error);
        CHECK_THROWS_AS(thm31_probability(64, 0, 0.5, table), std::domain_error);
    }
}

TEST_CASE("coherence recovery guarantee thresholds exactly") {
    // S < (1 + 1/mu)/2; with mu = 1/sqrt(13), the cutoff is (sqrt(13)+1)/2 ~ 2.30.
    const double mu13 = 1.0 / std::sqrt(13.0);
    CHECK(thm11_coherence_guarantee(13, 1, mu13));
    CHECK(thm11_coherence_guarantee(13, 2, mu13));
    CHECK_FALSE(thm11_coherence_guarantee(13, 3, mu13));
    // Exact boundary: mu = 1/3 gives cutoff 2; S = 2 is excluded (strict).
    CHECK(thm11_coherence_guarantee(9, 1, 1.0 / 3.0));
    CHECK_FALSE(thm11_coherence_guarantee(9, 2, 1.0 / 3.0));
    CHECK_THROWS_AS(thm11_coherence_guarantee(9, 1, 0.0), std::domain_error);
    CHECK_THROWS_AS(thm11_coherence_guarantee(0, 1, 0.5), std::domain_error);
}

TEST_CASE("sparsity threshold closed form") {
    CHECK(thm12b_sparsity_threshold(1024, 1.0) ==
          doctest::Approx(2.4846022869537649).epsilon(1e-13));
    CHECK(thm12b_sparsity_threshold(64, 1.0) == doctest::Approx(1.1113018604795326).epsilon(1e-13));
    // Grows with n, shrinks with the confidence parameter t.
    CHECK(thm12b_sparsity_threshold(4096, 1.0) > thm12b_sparsity_threshold(1024, 1.0));
    CHECK(thm12b_sparsity_threshold(1024, 4.0) < thm12b_sparsity_threshold(1024, 1.0));
    CHECK_THROWS_AS(thm12b_sparsity_threshold(13, 1.0), std::domain_error);  // odd n
    CHECK_THROWS_AS(thm12b_sparsity_threshold(1024, 0.0), std::domain_error);
}

TEST_CASE("random-phase failure bound and its three terms") {
    const BoundReport report = thm21_failure_probability(1024, 4, 9.0);
    REQUIRE(report.terms.size() == 3);
    CHECK(report.terms[0].first == "random_phase_tail");
    CHECK(report.terms[0].second == doctest::Approx(1255605.821406838).epsilon(1e-12));
    CHECK(report.terms[1].first == "gram_conditioning");
    CHECK(report.terms[1].second == doctest::Approx(0.011945556468975174).epsilon(1e-12));
    CHECK(report.terms[2].first == "coherence_tail");
    CHECK(report.terms[2].second == doctest::Approx(0.70710678118654757).epsilon(1e-12));
    CHECK(report.value == doctest::Approx(1255606.5404591756).epsilon(1e-12));
    CHECK_FALSE(report.feasible);  // vacuous at this n, as expected
    CHECK(report.clamped() == 1.0);

    const BoundReport r64 = thm21_failure_probability(64, 4, 9.0);
    CHECK(r64.value == doctest::Approx(7762.5716960663358).epsilon(1e-12));

    SUBCASE("domain checks") {
        CHECK_THROWS_AS(thm21_failure_probability(13, 4, 9.0), std::domain_error);   // odd n
        CHECK_THROWS_AS(thm21_failure_probability(64, 4, 8.0), std::domain_error);   // sigma <= 8
        CHECK_THROWS_AS(thm21_failure_probability(64, 4096, 9.0), std::domain_error);  // S = n^2
        CHECK_THROWS_AS(thm21_failure_probability(64, 0, 9.0), std::domain_error);
    }
}

TEST_CASE("chaining schedule rounds half up") {
    CHECK(l_schedule(1) == std::vector<int>{1});
    CHECK(l_schedule(3) == std::vector<int>{3, 2, 1});
    CHECK(l_schedule(4) == std::vector<int>{4, 2, 1, 1});
    CHECK(l_schedule(10)[0] == 10);
    CHECK(l_schedule(10)[1] == 5);
    CHECK(l_schedule(10)[2] == 3);
    CHECK_THROWS_AS(l_schedule(0), std::domain_error);
    // Definition check: L_t = floor(m/t + 1/2).
    for (int m : {1, 2, 5, 17, 100}) {
        const std::vector<int> sched = l_schedule(m);
        REQUIRE(static_cast<int>(sched.size()) == m);
        for (int t = 1; t <= m; ++t)
            CHECK(sched[static_cast<std::size_t>(t - 1)] ==
                  static_cast<int>(std::floor(static_cast<double>(m) / t + 0.5)));
    }
}

TEST_CASE("chaining feasibility: a stays below 0.957 for beta = 0.47") {
    double worst = 0.0;
    for (int m = 1; m <= 200; ++m) {
        BoundParams params;
        params.s = 4;
        params.beta = 0.47;
        params.m = m;
        params.schedule = l_schedule(m);
        params.kappa = 0.001;
        const BoundReport report = lemma51_conditions(params);
        worst = std::max(worst, report.value);
    }
    CHECK(worst <= 0.957);
    CHECK(worst == doctest::Approx(0.95683340836050079).epsilon(1e-12));
}

TEST_CASE("chaining feasibility report") {
    BoundParams params;
    params.s = 4;
    params.beta = 0.47;
    params.m = 20;
    params.schedule = l_schedule(20);
    params.kappa = 0.001;
    const BoundReport report = lemma51_conditions(params);
    CHECK(report.value == doctest::Approx(0.90045904297757928).epsilon(1e-12));
    CHECK(report.feasible);  // kappa/(1-kappa) ~ 0.001 is far below the limit
    SUBCASE("infeasible when kappa is too large") {
        params.kappa = 0.9;
        CHECK_FALSE(lemma51_conditions(params).feasible);
    }
}

TEST_CASE("chaining probability needs a large enough table") {
    const StirlingTable small = stirling_table(10);
    BoundParams params;
    params.n = 1024;
    params.s = 4;
    params.beta = 0.47;
    params.m = 15;
    params.schedule = l_schedule(15);
    params.kappa = 0.004;
    CHECK_THROWS_AS(lemma51_probability(params, small), std::invalid_argument);
}

TEST_CASE("minimised chaining bound matches the reference value") {
    const StirlingTable table = stirling_table(280);
    const BoundReport report = lemma51_minimize(1024, 4, 0.47, 100, table);
    CHECK(report.value == doctest::Approx(1.4652917793090274).epsilon(1e-9));
    CHECK(report.params.m == 15);
    CHECK(report.params.kappa == doctest::Approx(0.0041587051403473687).epsilon(1e-12));
    SUBCASE("shrinks rapidly once n clears the recovery scale") {
        const BoundReport big = lemma51_minimize(4096, 4, 0.47, 100, table);
        CHECK(big.value / 1.0695935366436476e-13 == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(big.feasible);
        CHECK(big.params.m == 60);
    }
    SUBCASE("monotone improvement with n") {
        double prev = std::numeric_limits<double>::infinity();
        for (int n : {256, 1024, 4096, 16384}) {
            const double v = lemma51_minimize(n, 4, 0.47, 100, table).value;
            CHECK(v <= prev);
            prev = v;
        }
    }
    SUBCASE("table too small for the requested m range throws") {
        const StirlingTable small = stirling_table(40);
        CHECK_THROWS_AS(lemma51_minimize(1024, 4, 0.47, 100, small), std::invalid_argument);
    }
}

TEST_CASE("explicit recovery constants") {
    const RecoveryConstants constants = thm22_constants();
    CHECK(constants.c1 == doctest::Approx(273.54696653285555).epsilon(1e-12));
    CHECK(constants.c2 == doctest::Approx(64.05860359235868).epsilon(1e-12));
    CHECK(constants.c3 == doctest::Approx(8.352521476849347).epsilon(1e-12));
    // Tolerance bands of the published rounded values.
    CHECK(std::abs(constants.c1 - 273.5) <= 0.5);
    CHECK(std::abs(constants.c2 - 64.1) <= 0.5);
    CHECK(std::abs(constants.c3 - 8.35) <= 0.1);
}

TEST_CASE("Steinhaus coherence tail and Bernstein tail closed forms") {
    CHECK(coherence_tail_bound(64, 6.0, 0.5) ==
          doctest::Approx(1.9903533203099679).epsilon(1e-13));
    CHECK(bernstein_tail(3.0, 0.25) == doctest::Approx(0.1405322994158191).epsilon(1e-13));
    // Both decay in their deviation argument.
    CHECK(coherence_tail_bound(64, 8.0, 0.5) < coherence_tail_bound(64, 6.0, 0.5));
    CHECK(bernstein_tail(4.0, 0.25) < bernstein_tail(3.0, 0.25));
    CHECK_THROWS_AS(coherence_tail_bound(64, 6.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(bernstein_tail(3.0, 1.0), std::domain_error);
}
