#include "siglab/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace siglab {

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace {

// Continued-fraction core of the incomplete beta (Lentz's method).
// Converges quickly for x < (a+1)/(a+b+2); callers use the symmetry
// I_x(a,b) = 1 - I_{1-x}(b,a) otherwise.
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    const double tiny = std::numeric_limits<double>::min() / kEps;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

// I_x(a,b) given both x and its complement xc = 1-x. Callers that know xc
// in closed form must pass it directly: forming 1-x in floating point
// cancels catastrophically when x is close to 1 (e.g. the t-distribution
// argument df/(df+t^2) at small |t|), and the reflection branch is only as
// accurate as the complement it is handed.
double incomplete_beta_split(double a, double b, double x, double xc) {
    if (x == 0.0) return 0.0;
    if (xc == 0.0) return 1.0;
    const double lx = x > 0.5 ? std::log1p(-xc) : std::log(x);
    const double lxc = xc > 0.5 ? std::log1p(-x) : std::log(xc);
    const double front = std::exp(a * lx + b * lxc - log_beta(a, b));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, xc) / b;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete_beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete_beta: x must be in [0,1]");
    return incomplete_beta_split(a, b, x, 1.0 - x);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("student_t_cdf: df must be positive");
    if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
    const double x = df / (df + t * t);
    const double xc = t * t / (df + t * t);
    const double tail = 0.5 * incomplete_beta_split(0.5 * df, 0.5, x, xc);  // P(T >= |t|)
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("student_t_two_sided_p: df must be positive");
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    const double xc = t * t / (df + t * t);
    double p = incomplete_beta_split(0.5 * df, 0.5, x, xc);
    if (p > 1.0) p = 1.0;
    return p;
}

}  // namespace siglab
