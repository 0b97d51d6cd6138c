#pragma once

#include <cstdint>

namespace riskcal {

// Empirical risk of one hypothesis on n calibration samples, tested against
// the level alpha (H0: true risk >= alpha). For precision control the risk is
// 1 - mean precision and alpha = 1 - P0.
struct RiskSample {
    double r_hat = 0.0;
    std::int64_t n = 1;
    double alpha = 0.5;
};

// Throws ValidationError unless n >= 1, r_hat in [0,1], alpha in (0,1).
void check(const RiskSample& s);

// Bernoulli KL divergence a log(a/b) + (1-a) log((1-a)/(1-b)), with 0 log 0 = 0.
double h1(double a, double b);

// log P(Bin(n, p) <= k), summed in log space so deep tails do not underflow.
double binom_cdf_log(std::int64_t k, std::int64_t n, double p);

// ceil(n * r_hat), after snapping values within 1e-12 of an integer.
std::int64_t risk_count(const RiskSample& s);

// Hoeffding-Bentkus p-value:
//   min{ exp(-n h1(min(r_hat, alpha), alpha)), e * P(Bin(n, alpha) <= ceil(n r_hat)) }
// clamped to [0, 1]. The log form stays finite where the p-value underflows.
double hb_log_pvalue(const RiskSample& s);
double hb_pvalue(const RiskSample& s);

}  // namespace riskcal
