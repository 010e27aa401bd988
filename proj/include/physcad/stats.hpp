#pragma once

#include <array>
#include <vector>

namespace physcad::stats {

enum class Alternative { TwoSided, Greater, Less };

/// Fisher exact test on [[a, b], [c, d]]. TwoSided sums every table with the
/// observed margins whose probability is at most the observed one (with a
/// 1e-7 relative slack); Greater and Less are the one-sided tails on a.
double fisher_exact(const std::array<std::array<long, 2>, 2>& table, Alternative alt = Alternative::TwoSided);

struct TTest {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0; ///< two-sided
};

TTest welch_t(double mean1, double sd1, double n1, double mean2, double sd2, double n2);
TTest welch_t(const std::vector<double>& a, const std::vector<double>& b);

/// Two-sided p for a Student-t statistic.
double student_t_two_sided(double t, double df);

struct KruskalWallis {
    double h = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// Average ranks with the standard tie correction; p from chi-squared(k-1).
/// When every value is tied H is 0 and p is 1.
KruskalWallis kruskal_wallis(const std::vector<std::vector<double>>& groups);

} // namespace physcad::stats
