#include "physcad/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace physcad::stats {

namespace {

double log_choose(long n, long k)
{
    return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1);
}

} // namespace

double fisher_exact(const std::array<std::array<long, 2>, 2>& t, Alternative alt)
{
    const long a = t[0][0], b = t[0][1], c = t[1][0], d = t[1][1];
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw std::invalid_argument("Fisher exact test needs non-negative counts");
    const long row1 = a + b, col1 = a + c, n = a + b + c + d;
    if (n == 0)
        return 1.0;
    const long lo = std::max(0L, row1 + col1 - n), hi = std::min(row1, col1);

    // P(X = x) for the top-left cell under fixed margins.
    const double log_denom = log_choose(n, col1);
    auto log_p = [&](long x) { return log_choose(row1, x) + log_choose(n - row1, col1 - x) - log_denom; };

    double p = 0.0;
    switch (alt) {
    case Alternative::Greater:
        for (long x = a; x <= hi; ++x)
            p += std::exp(log_p(x));
        break;
    case Alternative::Less:
        for (long x = lo; x <= a; ++x)
            p += std::exp(log_p(x));
        break;
    case Alternative::TwoSided: {
        const double observed = log_p(a);
        for (long x = lo; x <= hi; ++x) {
            double lp = log_p(x);
            if (lp <= observed + 1e-7)
                p += std::exp(lp);
        }
        break;
    }
    }
    return std::min(1.0, p);
}

double student_t_two_sided(double t, double df)
{
    if (!(df > 0.0))
        throw std::invalid_argument("degrees of freedom must be positive");
    boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

TTest welch_t(double m1, double s1, double n1, double m2, double s2, double n2)
{
    if (n1 < 2 || n2 < 2)
        throw std::invalid_argument("Welch t-test needs at least two samples per group");
    const double v1 = s1 * s1 / n1, v2 = s2 * s2 / n2;
    if (!(v1 + v2 > 0.0))
        throw std::invalid_argument("Welch t-test needs non-zero variance");
    TTest r;
    r.t = (m1 - m2) / std::sqrt(v1 + v2);
    r.df = (v1 + v2) * (v1 + v2) / (v1 * v1 / (n1 - 1) + v2 * v2 / (n2 - 1));
    r.p = student_t_two_sided(r.t, r.df);
    return r;
}

TTest welch_t(const std::vector<double>& a, const std::vector<double>& b)
{
    auto summary = [](const std::vector<double>& x) {
        const double n = double(x.size());
        const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : x)
            ss += (v - mean) * (v - mean);
        return std::pair{mean, std::sqrt(ss / (n - 1))};
    };
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("Welch t-test needs at least two samples per group");
    auto [ma, sa] = summary(a);
    auto [mb, sb] = summary(b);
    return welch_t(ma, sa, double(a.size()), mb, sb, double(b.size()));
}

KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups)
{
    if (groups.size() < 2)
        throw std::invalid_argument("Kruskal-Wallis needs at least two groups");
    struct Obs {
        double value;
        std::size_t group;
    };
    std::vector<Obs> all;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].empty())
            throw std::invalid_argument("Kruskal-Wallis groups must be non-empty");
        for (double v : groups[g])
            all.push_back({v, g});
    }
    std::sort(all.begin(), all.end(), [](const Obs& x, const Obs& y) { return x.value < y.value; });

    const double n = double(all.size());
    std::vector<double> rank_sum(groups.size(), 0.0);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j].value == all[i].value)
            ++j;
        const double avg = 0.5 * double(i + 1 + j); // mean of ranks i+1..j
        const double tsize = double(j - i);
        tie_term += tsize * tsize * tsize - tsize;
        for (std::size_t k = i; k < j; ++k)
            rank_sum[all[k].group] += avg;
        i = j;
    }

    KruskalWallis r;
    r.df = double(groups.size() - 1);
    const double correction = 1.0 - tie_term / (n * n * n - n);
    if (correction <= 0.0)
        return r;
    double h = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g)
        h += rank_sum[g] * rank_sum[g] / double(groups[g].size());
    h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
    r.h = std::max(0.0, h / correction);
    boost::math::chi_squared dist(r.df);
    r.p = r.h > 0.0 ? boost::math::cdf(boost::math::complement(dist, r.h)) : 1.0;
    return r;
}

} // namespace physcad::stats
