#include "riskcal/risk_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "riskcal/error.hpp"

namespace riskcal {

void check(const RiskSample& s) {
    if (s.n < 1) throw ValidationError("risk sample needs n >= 1");
    if (!(s.r_hat >= 0.0 && s.r_hat <= 1.0)) throw ValidationError("r_hat outside [0,1]");
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw ValidationError("alpha outside (0,1)");
}

namespace {

long double xlogy_ratio(long double a, long double b) { return a == 0.0L ? 0.0L : a * std::log(a / b); }

long double h1_long(long double a, long double b) {
    return xlogy_ratio(a, b) + xlogy_ratio(1.0L - a, 1.0L - b);
}

}  // namespace

double h1(double a, double b) {
    if (!(b > 0.0 && b < 1.0)) throw ValidationError("h1: b must lie in (0,1)");
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("h1: a must lie in [0,1]");
    return static_cast<double>(std::max(0.0L, h1_long(a, b)));
}

double binom_cdf_log(std::int64_t k, std::int64_t n, double p) {
    if (n < 0 || k < 0 || k > n) throw ValidationError("binom_cdf_log: need 0 <= k <= n");
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("binom_cdf_log: p must lie in (0,1)");
    if (k == n) return 0.0;

    const long double lp = std::log(static_cast<long double>(p));
    const long double lq = std::log1p(-static_cast<long double>(p));
    const long double nn = static_cast<long double>(n);
    const long double lg_n = std::lgamma(nn + 1.0L);

    auto log_pmf = [&](std::int64_t j) {
        const long double jj = static_cast<long double>(j);
        return lg_n - std::lgamma(jj + 1.0L) - std::lgamma(nn - jj + 1.0L) + jj * lp + (nn - jj) * lq;
    };

    long double peak = -std::numeric_limits<long double>::infinity();
    for (std::int64_t j = 0; j <= k; ++j) peak = std::max(peak, log_pmf(j));
    long double sum = 0.0L;
    for (std::int64_t j = 0; j <= k; ++j) sum += std::exp(log_pmf(j) - peak);
    return static_cast<double>(std::min(0.0L, peak + std::log(sum)));
}

std::int64_t risk_count(const RiskSample& s) {
    const double x = static_cast<double>(s.n) * s.r_hat;
    const double nearest = std::round(x);
    const double c = std::fabs(x - nearest) <= 1e-12 ? nearest : std::ceil(x);
    return std::clamp(static_cast<std::int64_t>(c), std::int64_t{0}, s.n);
}

double hb_log_pvalue(const RiskSample& s) {
    check(s);
    const long double a = std::min(s.r_hat, s.alpha);
    const long double log_hoeffding = -static_cast<long double>(s.n) * std::max(0.0L, h1_long(a, s.alpha));
    const long double log_bentkus = 1.0L + binom_cdf_log(risk_count(s), s.n, s.alpha);
    return static_cast<double>(std::min({log_hoeffding, log_bentkus, 0.0L}));
}

double hb_pvalue(const RiskSample& s) { return std::clamp(std::exp(hb_log_pvalue(s)), 0.0, 1.0); }

}  // namespace riskcal
