#include "physcad/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace physcad::stats;

namespace {

/// Hypergeometric pmf of a for fixed margins, built by exact products.
long double hyper(long a, long row1, long col1, long n)
{
    // C(col1, a) C(n - col1, row1 - a) / C(n, row1)
    auto choose = [](long N, long k) {
        if (k < 0 || k > N)
            return 0.0L;
        long double r = 1.0L;
        for (long i = 1; i <= k; ++i)
            r = r * static_cast<long double>(N - k + i) / static_cast<long double>(i);
        return r;
    };
    return choose(col1, a) * choose(n - col1, row1 - a) / choose(n, row1);
}

double fisher_oracle(long a, long b, long c, long d, bool two_sided)
{
    const long row1 = a + b, col1 = a + c, n = a + b + c + d;
    const long lo = std::max(0L, row1 + col1 - n), hi = std::min(row1, col1);
    const long double p_obs = hyper(a, row1, col1, n);
    long double p = 0.0L;
    for (long x = lo; x <= hi; ++x) {
        const long double px = hyper(x, row1, col1, n);
        if (two_sided ? px <= p_obs * (1.0L + 1e-7L) : x >= a)
            p += px;
    }
    return static_cast<double>(std::min(p, 1.0L));
}

/// Two-sided Student-t p by composite Simpson integration of the density.
double t_oracle(double t, double df)
{
    const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) / std::sqrt(df * std::numbers::pi);
    auto f = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
    const double a = 0.0, b = std::abs(t);
    const int n = 20000;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i)
        s += f(a + i * h) * (i % 2 ? 4 : 2);
    const double central = s * h / 3.0;
    return 1.0 - 2.0 * central;
}

/// H with midranks and tie correction, written out directly.
double kw_oracle(const std::vector<std::vector<double>>& g)
{
    std::vector<double> all;
    for (const auto& x : g)
        all.insert(all.end(), x.begin(), x.end());
    const double N = static_cast<double>(all.size());
    auto rank = [&](double v) {
        double less = 0, equal = 0;
        for (double y : all) {
            less += y < v;
            equal += y == v;
        }
        return less + (equal + 1) / 2;
    };
    double h = 0;
    for (const auto& x : g) {
        double R = 0;
        for (double v : x)
            R += rank(v);
        h += R * R / static_cast<double>(x.size());
    }
    h = 12.0 / (N * (N + 1)) * h - 3 * (N + 1);
    double ties = 0;
    std::vector<bool> seen(all.size(), false);
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (seen[i])
            continue;
        double t = 0;
        for (std::size_t j = i; j < all.size(); ++j)
            if (all[j] == all[i]) {
                seen[j] = true;
                ++t;
            }
        ties += t * t * t - t;
    }
    return h / (1 - ties / (N * N * N - N));
}

} // namespace

TEST_SUITE("stats")
{
    TEST_CASE("fisher exact matches exhaustive enumeration")
    {
        std::mt19937 rng(11);
        std::uniform_int_distribution<long> u(0, 25);
        for (int i = 0; i < 200; ++i) {
            long a = u(rng), b = u(rng), c = u(rng), d = u(rng);
            if (a + b == 0 || c + d == 0 || a + c == 0 || b + d == 0)
                continue;
            CAPTURE(a);
            CAPTURE(b);
            CAPTURE(c);
            CAPTURE(d);
            CHECK(fisher_exact({{{a, b}, {c, d}}}) == doctest::Approx(fisher_oracle(a, b, c, d, true)).epsilon(1e-9));
            CHECK(fisher_exact({{{a, b}, {c, d}}}, Alternative::Greater)
                  == doctest::Approx(fisher_oracle(a, b, c, d, false)).epsilon(1e-9));
        }
    }

    TEST_CASE("fisher exact reference values")
    {
        // Reference values from scipy.stats.fisher_exact.
        CHECK(fisher_exact({{{49, 34}, {6, 21}}}) == doctest::Approx(0.0016031782081040258).epsilon(1e-9));
        CHECK(fisher_exact({{{49, 34}, {6, 21}}}, Alternative::Greater)
              == doctest::Approx(0.0008015891040520129).epsilon(1e-9));
        CHECK(fisher_exact({{{3, 1}, {1, 3}}}) == doctest::Approx(0.48571428571428565).epsilon(1e-9));
        CHECK(fisher_exact({{{10, 2}, {3, 15}}}) == doctest::Approx(0.0005367241191434357).epsilon(1e-9));
        CHECK(fisher_exact({{{5, 5}, {5, 5}}}) == doctest::Approx(1.0));
        // Lower tail on a = 1 is the complement of the upper tail from a = 2.
        CHECK(fisher_exact({{{1, 9}, {9, 1}}}, Alternative::Less)
              == doctest::Approx(1.0 - fisher_oracle(2, 8, 8, 2, false)).epsilon(1e-9));
        CHECK_THROWS(fisher_exact({{{-1, 2}, {3, 4}}}));
    }

    TEST_CASE("student t tail against numerical integration")
    {
        for (auto [t, df] : std::vector<std::pair<double, double>>{
                 {-3.17, 13.39}, {0.5, 4.0}, {2.0, 30.0}, {1.0, 1.0}, {4.2, 7.5}}) {
            CAPTURE(t);
            CAPTURE(df);
            CHECK(student_t_two_sided(t, df) == doctest::Approx(t_oracle(t, df)).epsilon(1e-7));
        }
        CHECK(student_t_two_sided(-3.17, 13.39) == doctest::Approx(0.0071482243392376).epsilon(1e-9));
    }

    TEST_CASE("welch t from samples and from summaries")
    {
        std::vector<double> a{1, 2, 3, 4, 9}, b{2, 2, 5, 7, 11, 13};
        auto r = welch_t(a, b);
        // Reference values from scipy.stats.ttest_ind(equal_var=False).
        CHECK(r.t == doctest::Approx(-1.2278199320619827).epsilon(1e-10));
        CHECK(r.df == doctest::Approx(8.722966285391424).epsilon(1e-10));
        CHECK(r.p == doctest::Approx(0.2516143548191442).epsilon(1e-9));

        // Summary form: Welch-Satterthwaite by hand.
        const double m1 = 4.44, s1 = 5.36, n1 = 80, m2 = 10.77, s2 = 10.11, n2 = 20;
        const double v1 = s1 * s1 / n1, v2 = s2 * s2 / n2;
        auto w = welch_t(m1, s1, n1, m2, s2, n2);
        CHECK(w.t == doctest::Approx((m1 - m2) / std::sqrt(v1 + v2)));
        CHECK(w.df == doctest::Approx((v1 + v2) * (v1 + v2) / (v1 * v1 / (n1 - 1) + v2 * v2 / (n2 - 1))));
        CHECK(w.p == doctest::Approx(student_t_two_sided(w.t, w.df)));
        CHECK_THROWS(welch_t(std::vector<double>{1.0}, b));
    }

    TEST_CASE("kruskal wallis")
    {
        std::vector<std::vector<double>> g{{1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}, {1, 1, 1, 9, 9}};
        auto k = kruskal_wallis(g);
        CHECK(k.h == doctest::Approx(kw_oracle(g)).epsilon(1e-12));
        // Reference values from scipy.stats.kruskal.
        CHECK(k.h == doctest::Approx(2.216453382084094).epsilon(1e-10));
        CHECK(k.p == doctest::Approx(0.3301438894090828).epsilon(1e-9));
        CHECK(k.df == 2);

        std::vector<std::vector<double>> bin{{0, 0, 1, 1, 1, 0}, {1, 1, 1, 1, 0, 1}, {0, 0, 0, 1, 0, 0}};
        auto kb = kruskal_wallis(bin);
        CHECK(kb.h == doctest::Approx(5.037037037037029).epsilon(1e-10));
        CHECK(kb.p == doctest::Approx(0.08057889450642326).epsilon(1e-9));

        std::vector<std::vector<double>> same{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
        CHECK(kruskal_wallis(same).h == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(kruskal_wallis(same).p == doctest::Approx(1.0));
        std::vector<std::vector<double>> flat{{1, 1}, {1, 1, 1}};
        CHECK(kruskal_wallis(flat).h == 0.0);
        CHECK(kruskal_wallis(flat).p == 1.0);

        std::mt19937 rng(8);
        std::uniform_int_distribution<int> u(0, 6);
        for (int i = 0; i < 30; ++i) {
            std::vector<std::vector<double>> r(3);
            for (auto& x : r)
                for (int j = 0; j < 7; ++j)
                    x.push_back(u(rng));
            if (kw_oracle(r) != kw_oracle(r)) // all tied: oracle divides by zero
                continue;
            CHECK(kruskal_wallis(r).h == doctest::Approx(kw_oracle(r)).epsilon(1e-10));
        }
    }
}
