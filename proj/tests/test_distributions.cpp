#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "oracle_values.hpp"
#include "siglab/distributions.hpp"
#include "siglab/errors.hpp"
#include "siglab/random.hpp"

using namespace siglab;
using namespace siglab::dist;

namespace {

Moments empirical_moments(const std::vector<double>& x) {
    Moments m;
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= double(x.size());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(x.size());
    m3 /= double(x.size());
    m4 /= double(x.size());
    m.mean = mean;
    m.sd = std::sqrt(m2);
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    return m;
}

// Closed-form AGN raw moments, the independent route to the quadrature:
// E[X^r] = m_r (xi^{r+1} + (-1)^r xi^{-(r+1)}) / (xi + 1/xi),
// m_r = Gamma((r+1)/nu) / Gamma(1/nu).
std::pair<double, double> agn_closed_form(double xi, double nu) {
    auto raw = [&](int r) {
        const double m =
            std::exp(std::lgamma((r + 1) / nu) - std::lgamma(1.0 / nu));
        return m * (std::pow(xi, r + 1) + (r % 2 == 0 ? 1.0 : -1.0) * std::pow(xi, -(r + 1))) /
               (xi + 1.0 / xi);
    };
    const double m1 = raw(1), m2 = raw(2), m3 = raw(3), m4 = raw(4);
    const double var = m2 - m1 * m1;
    const double mu3 = m3 - 3 * m1 * m2 + 2 * m1 * m1 * m1;
    const double mu4 = m4 - 4 * m1 * m3 + 6 * m1 * m1 * m2 - 3 * m1 * m1 * m1 * m1;
    return {mu3 / std::pow(var, 1.5), mu4 / (var * var) - 3.0};
}

}  // namespace

TEST_CASE("sgn kurtosis closed form") {
    CHECK(sgn_excess_kurtosis(2.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sgn_excess_kurtosis(1.0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(sgn_excess_kurtosis(std::numeric_limits<double>::infinity()) ==
          doctest::Approx(-1.2).epsilon(1e-12));
    // Strictly decreasing in beta.
    double prev = sgn_excess_kurtosis(0.3);
    for (double b = 0.4; b < 12.0; b += 0.1) {
        const double k = sgn_excess_kurtosis(b);
        CHECK(k < prev);
        prev = k;
    }
}

TEST_CASE("agn quadrature matches the closed form") {
    for (double nu : {1.5, 2.0, 3.0}) {
        for (double xi : {1.0, 1.3, 2.0, 3.5}) {
            auto [skew_q, kurt_q] = agn_moments(xi, nu);
            auto [skew_c, kurt_c] = agn_closed_form(xi, nu);
            CHECK(skew_q == doctest::Approx(skew_c).epsilon(1e-9));
            CHECK(kurt_q == doctest::Approx(kurt_c).epsilon(1e-9));
        }
    }
    auto [skew, kurt] = agn_moments(2.0, 2.0);
    CHECK(skew == doctest::Approx(oracle::kAgnXi2Skewness).epsilon(1e-10));
    CHECK(kurt == doctest::Approx(oracle::kAgnXi2ExcessKurtosis).epsilon(1e-10));
    // Reflection: xi -> 1/xi flips the skewness sign.
    auto [skew_r, kurt_r] = agn_moments(0.5, 2.0);
    CHECK(skew_r == doctest::Approx(-skew).epsilon(1e-9));
    CHECK(kurt_r == doctest::Approx(kurt).epsilon(1e-9));
}

TEST_CASE("tgh closed-form moments") {
    auto [skew, kurt] = tgh_moments(0.5, 0.0);
    CHECK(skew == doctest::Approx(oracle::kTghG05Skewness).epsilon(1e-9));
    CHECK(kurt == doctest::Approx(oracle::kTghG05ExcessKurtosis).epsilon(1e-9));
    // g=0 is symmetric with positive excess kurtosis for h>0.
    auto [skew0, kurt0] = tgh_moments(0.0, 0.1);
    CHECK(skew0 == doctest::Approx(0.0));
    CHECK(kurt0 > 0.0);
    // g=0, h=0 is the standard normal.
    auto [sn, kn] = tgh_moments(0.0, 0.0);
    CHECK(sn == doctest::Approx(0.0));
    CHECK(kn == doctest::Approx(0.0).epsilon(1e-12));
    // Fourth moment diverges at h >= 1/4.
    CHECK_THROWS_AS(tgh_moments(0.0, 0.25), diverged_moment_error);
    // Reflection g -> -g.
    auto [skew_n, kurt_n] = tgh_moments(-0.5, 0.0);
    CHECK(skew_n == doctest::Approx(-oracle::kTghG05Skewness).epsilon(1e-9));
    CHECK(kurt_n == doctest::Approx(oracle::kTghG05ExcessKurtosis).epsilon(1e-9));
}

TEST_CASE("metric supports") {
    const auto p10 = ibb_support(Metric::precision_at_k, 10);
    CHECK(int(p10.values.size()) == oracle::kSupportP10);
    // P@k differences form the lattice {-1, ..., -1/k, 0, 1/k, ..., 1}.
    for (int i = -10; i <= 10; ++i) {
        const double v = double(i) / 10.0;
        CHECK(std::binary_search(p10.values.begin(), p10.values.end(), v));
    }
    CHECK(int(ibb_support(Metric::precision_at_k, 5).values.size()) == oracle::kSupportP5);
    CHECK(int(ibb_support(Metric::precision_at_k, 1000).values.size()) == oracle::kSupportP1000);
    const auto rr10 = ibb_support(Metric::reciprocal_rank_at_k, 10);
    CHECK(int(rr10.values.size()) == oracle::kSupportRR10);
    CHECK(int(ibb_support(Metric::reciprocal_rank_at_k, 5).values.size()) == oracle::kSupportRR5);
    // Sorted, deduplicated, symmetric about zero, includes 0 and the extremes.
    CHECK(std::is_sorted(rr10.values.begin(), rr10.values.end()));
    CHECK(std::adjacent_find(rr10.values.begin(), rr10.values.end()) == rr10.values.end());
    CHECK(rr10.values.front() == doctest::Approx(-1.0));
    CHECK(rr10.values.back() == doctest::Approx(1.0));
    for (double v : rr10.values)
        CHECK(std::binary_search(rr10.values.begin(), rr10.values.end(), -v));
    // Every value carries exactly 3 decimals.
    for (double v : rr10.values) CHECK(v * 1000.0 == doctest::Approx(std::round(v * 1000.0)));
}

TEST_CASE("ibb pmf and sd against the lattice closed form") {
    // For P@k the support is a regular lattice D = (J - k)/k with
    // J ~ BetaBin(2k, p, p), so sd(D) = sqrt(Var J)/k with
    // Var J = n(n+2p) / (4(2p+1)), n = 2k.
    const auto p10 = ibb_support(Metric::precision_at_k, 10);
    for (double p : {0.5, 1.0, 4.31, 12.0}) {
        const double n = 20.0;
        const double expected = std::sqrt(n * (n + 2 * p) / (4.0 * (2 * p + 1))) / 10.0;
        CHECK(ibb_sd(p10, p) == doctest::Approx(expected).epsilon(1e-12));
    }
    const auto pmf = ibb_pmf(p10, 2.0);
    CHECK(pmf.size() == p10.values.size());
    double total = 0.0;
    for (double q : pmf) {
        CHECK(q >= 0.0);
        total += q;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    // Symmetric support + symmetric BetaBin -> symmetric pmf.
    for (std::size_t i = 0; i < pmf.size(); ++i)
        CHECK(pmf[i] == doctest::Approx(pmf[pmf.size() - 1 - i]).epsilon(1e-12));
}

TEST_CASE("samplers reproduce their theoretical moments") {
    const std::size_t reps = 200000;
    auto check_spec = [&](DistributionSpec spec, double tol_mean, double tol_sd,
                          double tol_skew, double tol_kurt) {
        const auto theo = theoretical_moments(spec);
        const auto draws = sample(spec, reps, RandomStream(2024, {1}));
        const auto emp = empirical_moments(draws);
        CHECK(std::fabs(emp.mean - theo.mean) < tol_mean);
        CHECK(std::fabs(emp.sd - theo.sd) < tol_sd);
        CHECK(std::fabs(emp.skewness - theo.skewness) < tol_skew);
        CHECK(std::fabs(emp.excess_kurtosis - theo.excess_kurtosis) < tol_kurt);
    };

    DistributionSpec normal;
    normal.loc = 0.3;
    normal.scale = 0.22;
    check_spec(normal, 0.005, 0.005, 0.05, 0.1);

    DistributionSpec laplace;
    laplace.family = Family::sgn;
    laplace.beta = 1.0;
    check_spec(laplace, 0.01, 0.01, 0.1, 0.5);

    DistributionSpec uniform;
    uniform.family = Family::sgn;
    uniform.beta = std::numeric_limits<double>::infinity();
    check_spec(uniform, 0.01, 0.01, 0.05, 0.1);

    DistributionSpec agn;
    agn.family = Family::agn;
    agn.xi = 2.0;
    check_spec(agn, 0.01, 0.01, 0.05, 0.2);

    DistributionSpec tgh;
    tgh.family = Family::tgh;
    tgh.g = 0.3;
    tgh.h = 0.05;
    check_spec(tgh, 0.01, 0.02, 0.2, 2.0);

    DistributionSpec bimodal;
    bimodal.family = Family::bimodal;
    bimodal.separation = 3.0;
    check_spec(bimodal, 0.01, 0.01, 0.05, 0.1);
}

TEST_CASE("uniform draws stay inside the theoretical range") {
    DistributionSpec uniform;
    uniform.family = Family::sgn;
    uniform.beta = std::numeric_limits<double>::infinity();
    const auto draws = sample(uniform, 20000, RandomStream(5, {0}));
    const double bound = std::sqrt(3.0) + 1e-12;
    for (double v : draws) CHECK(std::fabs(v) < bound);
}

TEST_CASE("ibb draws live on the support") {
    const auto rr10 = std::make_shared<MetricSupport>(ibb_support(Metric::reciprocal_rank_at_k, 10));
    DistributionSpec spec;
    spec.family = Family::ibb;
    spec.p = oracle::kIbbP_RR10;
    spec.support = rr10;
    const auto draws = sample(spec, 50000, RandomStream(9, {4}));
    std::set<double> seen;
    for (double v : draws) {
        CHECK(std::binary_search(rr10->values.begin(), rr10->values.end(), v));
        seen.insert(v);
    }
    CHECK(seen.size() > 10);  // spread across the support, not stuck on an atom
    const auto emp = empirical_moments(draws);
    const auto theo = theoretical_moments(spec);
    CHECK(std::fabs(emp.mean - theo.mean) < 0.005);
    CHECK(std::fabs(emp.sd - theo.sd) < 0.005);
    CHECK(theo.mean == doctest::Approx(0.0));
    CHECK(theo.sd == doctest::Approx(0.22).epsilon(1e-8));
}

TEST_CASE("bimodal kurtosis closed form") {
    DistributionSpec spec;
    spec.family = Family::bimodal;
    spec.separation = 3.0;
    const double d = 3.0;
    const double expected = (3 + 6 * d * d + d * d * d * d) / ((1 + d * d) * (1 + d * d)) - 3.0;
    const auto theo = theoretical_moments(spec);
    CHECK(theo.excess_kurtosis == doctest::Approx(expected).epsilon(1e-12));
    CHECK(theo.skewness == doctest::Approx(0.0));
    CHECK(theo.sd == doctest::Approx(1.0));
}

TEST_CASE("spec config round-trips") {
    DistributionSpec tgh;
    tgh.family = Family::tgh;
    tgh.g = 0.4434928128;
    tgh.h = 0.0;
    tgh.loc = -0.012;
    tgh.scale = 0.22;
    const auto back = from_config(to_config(tgh));
    CHECK(back.family == Family::tgh);
    CHECK(back.g == doctest::Approx(tgh.g).epsilon(1e-15));
    CHECK(back.loc == doctest::Approx(tgh.loc).epsilon(1e-15));
    CHECK(back.scale == doctest::Approx(tgh.scale).epsilon(1e-15));

    DistributionSpec uniform;
    uniform.family = Family::sgn;
    uniform.beta = std::numeric_limits<double>::infinity();
    CHECK(std::isinf(from_config(to_config(uniform)).beta));

    DistributionSpec ibb;
    ibb.family = Family::ibb;
    ibb.p = oracle::kIbbP_RR5;
    ibb.support = std::make_shared<MetricSupport>(ibb_support(Metric::reciprocal_rank_at_k, 5));
    const auto ibb_back = from_config(to_config(ibb));
    REQUIRE(ibb_back.support != nullptr);
    CHECK(ibb_back.support->values == ibb.support->values);
    CHECK(ibb_back.p == doctest::Approx(ibb.p).epsilon(1e-15));
}

TEST_CASE("config parse errors carry line numbers") {
    CHECK_THROWS_AS(from_config("family=tgh\ng=not-a-number\n"), parse_error);
    try {
        from_config("family=tgh\ng=bad\n");
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(from_config("family=tgh\nwhatever=1\n"), parse_error);
    CHECK_THROWS_AS(from_config(""), parse_error);
}

TEST_CASE("parameter domains are enforced") {
    DistributionSpec bad;
    bad.family = Family::sgn;
    bad.beta = -1.0;
    CHECK_THROWS_AS(bad.validate(), parameter_domain_error);
    bad.family = Family::agn;
    bad.beta = 2.0;
    bad.xi = 0.0;
    CHECK_THROWS_AS(bad.validate(), parameter_domain_error);
    bad.family = Family::tgh;
    bad.xi = 1.0;
    bad.h = -0.01;
    CHECK_THROWS_AS(bad.validate(), parameter_domain_error);
    bad.h = 0.0;
    bad.family = Family::ibb;
    bad.p = 1.0;  // no support attached
    CHECK_THROWS_AS(bad.validate(), parameter_domain_error);
}
