#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <limits>

#include "support.hpp"

namespace riskcal::test {

namespace {

constexpr mpfr_prec_t kBits = 256;

class Big {
public:
    Big() { mpfr_init2(v_, kBits); }
    ~Big() { mpfr_clear(v_); }
    Big(const Big&) = delete;
    Big& operator=(const Big&) = delete;
    mpfr_ptr get() { return v_; }

private:
    mpfr_t v_;
};

// p = a / 2^s exactly.
void dyadic(double p, mpz_class& a, unsigned long& s) {
    int e = 0;
    const double fr = std::frexp(p, &e);
    a = static_cast<long>(std::ldexp(fr, 53));
    s = static_cast<unsigned long>(53 - e);
}

// log P(Bin(n,p) <= k) into `out`.
void binom_cdf_log_big(std::int64_t k, std::int64_t n, double p, mpfr_ptr out) {
    if (k >= n) {
        mpfr_set_zero(out, 1);
        return;
    }
    if (k < 0) {
        mpfr_set_inf(out, -1);
        return;
    }
    mpz_class a;
    unsigned long s = 0;
    dyadic(p, a, s);
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 2, s);
    const mpz_class b = scale - a;

    // Terms C(n,j) a^j b^(n-j), all over the common denominator 2^(s n).
    mpz_class term;
    mpz_pow_ui(term.get_mpz_t(), b.get_mpz_t(), static_cast<unsigned long>(n));
    mpz_class sum = term;
    for (std::int64_t j = 0; j < k; ++j) {
        term *= static_cast<unsigned long>(n - j);
        term *= a;
        mpz_class divisor = b * static_cast<unsigned long>(j + 1);
        mpz_divexact(term.get_mpz_t(), term.get_mpz_t(), divisor.get_mpz_t());
        sum += term;
    }
    Big log2;
    mpfr_const_log2(log2.get(), MPFR_RNDN);
    mpfr_set_z(out, sum.get_mpz_t(), MPFR_RNDN);
    mpfr_log(out, out, MPFR_RNDN);
    mpfr_mul_ui(log2.get(), log2.get(), s, MPFR_RNDN);
    mpfr_mul_ui(log2.get(), log2.get(), static_cast<unsigned long>(n), MPFR_RNDN);
    mpfr_sub(out, out, log2.get(), MPFR_RNDN);
}

// x log(x / y) with 0 log 0 = 0.
void xlogxy(mpfr_ptr out, mpfr_ptr x, mpfr_ptr y) {
    if (mpfr_zero_p(x)) {
        mpfr_set_zero(out, 1);
        return;
    }
    mpfr_div(out, x, y, MPFR_RNDN);
    mpfr_log(out, out, MPFR_RNDN);
    mpfr_mul(out, out, x, MPFR_RNDN);
}

}  // namespace

double oracle_binom_cdf_log(std::int64_t k, std::int64_t n, double p) {
    Big out;
    binom_cdf_log_big(k, n, p, out.get());
    return mpfr_get_d(out.get(), MPFR_RNDN);
}

double oracle_hb_log_pvalue(std::int64_t n, std::int64_t num, std::int64_t den, double alpha) {
    Big r, al, a, one_minus_a, one_minus_al, t1, t2, hoeffding, bentkus;
    const mpq_class rq(static_cast<long>(num), static_cast<long>(den));
    mpfr_set_q(r.get(), rq.get_mpq_t(), MPFR_RNDN);
    mpfr_set_d(al.get(), alpha, MPFR_RNDN);
    mpfr_min(a.get(), r.get(), al.get(), MPFR_RNDN);
    mpfr_ui_sub(one_minus_a.get(), 1, a.get(), MPFR_RNDN);
    mpfr_ui_sub(one_minus_al.get(), 1, al.get(), MPFR_RNDN);
    xlogxy(t1.get(), a.get(), al.get());
    xlogxy(t2.get(), one_minus_a.get(), one_minus_al.get());
    mpfr_add(hoeffding.get(), t1.get(), t2.get(), MPFR_RNDN);
    mpfr_mul_si(hoeffding.get(), hoeffding.get(), static_cast<long>(n), MPFR_RNDN);
    mpfr_neg(hoeffding.get(), hoeffding.get(), MPFR_RNDN);

    // ceil(n num / den) in exact integer arithmetic.
    const std::int64_t k = (n * num + den - 1) / den;
    binom_cdf_log_big(k, n, alpha, bentkus.get());
    mpfr_add_ui(bentkus.get(), bentkus.get(), 1, MPFR_RNDN);

    Big best;
    mpfr_min(best.get(), hoeffding.get(), bentkus.get(), MPFR_RNDN);
    if (mpfr_sgn(best.get()) > 0) mpfr_set_zero(best.get(), 1);
    return mpfr_get_d(best.get(), MPFR_RNDN);
}

long double direct_kl(long double a, long double b) {
    const long double p[2] = {1.0L - a, a};
    const long double q[2] = {1.0L - b, b};
    long double sum = 0.0L;
    for (int x = 0; x < 2; ++x) {
        if (p[x] > 0.0L) sum += p[x] * std::log(p[x] / q[x]);
    }
    return sum;
}

std::vector<std::int64_t> brute_force_sq_distance(const std::vector<std::uint8_t>& inside, int width, int height) {
    std::vector<std::int64_t> out(inside.size(), 0);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            if (!inside[static_cast<std::size_t>(r * width + c)]) continue;
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            for (int r2 = 0; r2 < height; ++r2) {
                for (int c2 = 0; c2 < width; ++c2) {
                    if (inside[static_cast<std::size_t>(r2 * width + c2)]) continue;
                    const std::int64_t dx = c - c2;
                    const std::int64_t dy = r - r2;
                    best = std::min(best, dx * dx + dy * dy);
                }
            }
            out[static_cast<std::size_t>(r * width + c)] = best;
        }
    }
    return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::path(RISKCAL_TEST_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace riskcal::test
