#include "siglab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "siglab/errors.hpp"

namespace siglab::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Round half away from zero at 3 decimals; deterministic across platforms.
double round3(double x) {
    return std::copysign(std::floor(std::fabs(x) * 1000.0 + 0.5) / 1000.0, x);
}

double lgamma_ratio(double a, double b) {  // Gamma(a)/Gamma(b) via logs
    return std::exp(std::lgamma(a) - std::lgamma(b));
}

}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::normal: return "normal";
        case Family::sgn: return "sgn";
        case Family::agn: return "agn";
        case Family::tgh: return "tgh";
        case Family::ibb: return "ibb";
        case Family::bimodal: return "bimodal";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    if (name == "normal") return Family::normal;
    if (name == "sgn") return Family::sgn;
    if (name == "agn") return Family::agn;
    if (name == "tgh") return Family::tgh;
    if (name == "ibb") return Family::ibb;
    if (name == "bimodal") return Family::bimodal;
    throw parse_error("unknown family: " + name);
}

std::string metric_name(Metric m, int k) {
    return (m == Metric::precision_at_k ? "P@" : "RR@") + std::to_string(k);
}

MetricSupport ibb_support(Metric metric, int k) {
    if (k < 1) throw parameter_domain_error("ibb_support: k must be >= 1");
    std::set<double> vals;
    if (metric == Metric::precision_at_k) {
        for (int i = 0; i <= k; ++i)
            for (int j = 0; j <= k; ++j)
                vals.insert(round3(double(i - j) / k));
    } else {
        std::vector<double> scores{0.0};
        for (int r = 1; r <= k; ++r) scores.push_back(1.0 / r);
        for (double a : scores)
            for (double b : scores) vals.insert(round3(a - b));
    }
    MetricSupport s{metric, k, std::vector<double>(vals.begin(), vals.end())};
    return s;
}

void DistributionSpec::validate() const {
    if (!(scale > 0.0)) throw parameter_domain_error("spec: scale must be positive");
    if (!std::isfinite(loc)) throw parameter_domain_error("spec: loc must be finite");
    switch (family) {
        case Family::normal:
            break;
        case Family::sgn:
            if (!(beta > 0.0)) throw parameter_domain_error("sgn: beta must be positive");
            break;
        case Family::agn:
            if (!(xi > 0.0) || !std::isfinite(xi)) throw parameter_domain_error("agn: xi must be positive finite");
            if (!(nu > 0.0) || !std::isfinite(nu)) throw parameter_domain_error("agn: nu must be positive finite");
            break;
        case Family::tgh:
            if (!std::isfinite(g)) throw parameter_domain_error("tgh: g must be finite");
            if (!(h >= 0.0)) throw parameter_domain_error("tgh: h must be nonnegative");
            break;
        case Family::ibb:
            if (!(p > 0.0) || !std::isfinite(p)) throw parameter_domain_error("ibb: p must be positive finite");
            if (!support || support->values.size() < 2)
                throw parameter_domain_error("ibb: support must have at least 2 values");
            break;
        case Family::bimodal:
            if (!(separation >= 0.0) || !std::isfinite(separation))
                throw parameter_domain_error("bimodal: separation must be nonnegative finite");
            break;
    }
}

double sgn_excess_kurtosis(double beta) {
    if (!(beta > 0.0)) throw parameter_domain_error("sgn_excess_kurtosis: beta must be positive");
    if (std::isinf(beta)) return -1.2;  // uniform limit
    const double l1 = std::lgamma(1.0 / beta);
    const double l3 = std::lgamma(3.0 / beta);
    const double l5 = std::lgamma(5.0 / beta);
    return std::exp(l5 + l1 - 2.0 * l3) - 3.0;
}

namespace {

// Raw moments of the two-piece generalized normal by adaptive quadrature of
// its density (the calibration-grade route; the closed-form construction is
// kept in the test suite as an independent check).
std::array<double, 5> agn_raw_moments_quadrature(double xi, double nu) {
    using boost::math::quadrature::gauss_kronrod;
    const double cnorm = nu / (2.0 * std::exp(std::lgamma(1.0 / nu)));
    const double w = 2.0 / (xi + 1.0 / xi);
    std::array<double, 5> mom{1.0, 0, 0, 0, 0};
    for (int r = 1; r <= 4; ++r) {
        auto pos = [&](double x) { return std::pow(x, r) * cnorm * std::exp(-std::pow(x / xi, nu)); };
        auto neg = [&](double x) { return std::pow(x, r) * cnorm * std::exp(-std::pow(x * xi, nu)); };
        double err = 0.0;
        const double ip = gauss_kronrod<double, 61>::integrate(pos, 0.0, kInf, 15, 1e-12, &err);
        const double in = gauss_kronrod<double, 61>::integrate(neg, 0.0, kInf, 15, 1e-12, &err);
        mom[r] = w * (ip + (r % 2 == 0 ? in : -in));
    }
    return mom;
}

std::pair<double, double> standardized_from_raw(const std::array<double, 5>& m) {
    const double mu = m[1];
    const double var = m[2] - mu * mu;
    const double m3 = m[3] - 3.0 * mu * m[2] + 2.0 * mu * mu * mu;
    const double m4 = m[4] - 4.0 * mu * m[3] + 6.0 * mu * mu * m[2] - 3.0 * mu * mu * mu * mu;
    return {m3 / std::pow(var, 1.5), m4 / (var * var) - 3.0};
}

// Raw moments E[T(Z)^k] of the g-and-h transform, k = 0..4.
std::array<double, 5> tgh_raw_moments(double g, double h) {
    std::array<double, 5> m{1.0, 0, 0, 0, 0};
    for (int k = 1; k <= 4; ++k) {
        const double d = 1.0 - k * h;
        if (!(d > 0.0))
            throw diverged_moment_error("tgh: moment of order " + std::to_string(k) +
                                        " diverges (k*h >= 1)");
        if (g == 0.0) {
            // E[Z^k e^{khZ^2/2}] : zero for odd k, (k-1)!! (1-kh)^{-(k+1)/2} for even
            if (k % 2 == 1) {
                m[k] = 0.0;
            } else {
                const double dfact = (k == 2) ? 1.0 : 3.0;  // (k-1)!!
                m[k] = dfact * std::pow(d, -(k + 1) / 2.0);
            }
            continue;
        }
        double acc = 0.0;
        double binom = 1.0;  // C(k, i)
        for (int i = 0; i <= k; ++i) {
            const double term = binom * std::exp(i * i * g * g / (2.0 * d));
            acc += ((k - i) % 2 == 0 ? term : -term);
            binom = binom * (k - i) / (i + 1.0);
        }
        m[k] = acc / (std::pow(g, k) * std::sqrt(d));
    }
    return m;
}

}  // namespace

std::pair<double, double> agn_moments(double xi, double nu) {
    if (!(xi > 0.0)) throw parameter_domain_error("agn_moments: xi must be positive");
    if (!(nu > 0.0)) throw parameter_domain_error("agn_moments: nu must be positive");
    const auto raw = agn_raw_moments_quadrature(xi, nu);
    if (!std::isfinite(raw[4])) throw diverged_moment_error("agn: fourth moment diverged");
    return standardized_from_raw(raw);
}

std::pair<double, double> tgh_moments(double g, double h) {
    if (!(h >= 0.0 && h < 0.25))
        throw diverged_moment_error("tgh_moments: need 0 <= h < 1/4 for a finite fourth moment");
    return standardized_from_raw(tgh_raw_moments(g, h));
}

std::vector<double> ibb_pmf(const MetricSupport& support, double p) {
    if (!(p > 0.0)) throw parameter_domain_error("ibb_pmf: p must be positive");
    const std::size_t count = support.values.size();
    if (count < 2) throw parameter_domain_error("ibb_pmf: support too small");
    const double n = double(count - 1);
    std::vector<double> logpmf(count);
    const double lb_pp = std::lgamma(p) + std::lgamma(p) - std::lgamma(2.0 * p);
    double maxlog = -kInf;
    for (std::size_t j = 0; j < count; ++j) {
        const double jj = double(j);
        const double lchoose = std::lgamma(n + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(n - jj + 1.0);
        const double lb = std::lgamma(jj + p) + std::lgamma(n - jj + p) - std::lgamma(n + 2.0 * p);
        logpmf[j] = lchoose + lb - lb_pp;
        maxlog = std::max(maxlog, logpmf[j]);
    }
    std::vector<double> pmf(count);
    double total = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
        pmf[j] = std::exp(logpmf[j] - maxlog);
        total += pmf[j];
    }
    for (double& v : pmf) v /= total;
    return pmf;
}

double ibb_sd(const MetricSupport& support, double p) {
    const auto pmf = ibb_pmf(support, p);
    // Fold symmetric pairs: mean is exactly 0, compute the second moment.
    double m2 = 0.0;
    for (std::size_t j = 0; j < pmf.size(); ++j) m2 += pmf[j] * support.values[j] * support.values[j];
    return std::sqrt(m2);
}

Moments theoretical_moments(const DistributionSpec& spec) {
    spec.validate();
    Moments out;
    out.mean = spec.loc;
    out.sd = spec.scale;
    switch (spec.family) {
        case Family::normal:
            out.skewness = 0.0;
            out.excess_kurtosis = 0.0;
            break;
        case Family::sgn:
            out.skewness = 0.0;
            out.excess_kurtosis = sgn_excess_kurtosis(spec.beta);
            break;
        case Family::agn: {
            auto [sk, ku] = agn_moments(spec.xi, spec.nu);
            out.skewness = sk;
            out.excess_kurtosis = ku;
            break;
        }
        case Family::tgh: {
            auto [sk, ku] = tgh_moments(spec.g, spec.h);
            out.skewness = sk;
            out.excess_kurtosis = ku;
            break;
        }
        case Family::ibb: {
            const auto pmf = ibb_pmf(*spec.support, spec.p);
            double m2 = 0.0, m4 = 0.0;
            for (std::size_t j = 0; j < pmf.size(); ++j) {
                const double v = spec.support->values[j];
                m2 += pmf[j] * v * v;
                m4 += pmf[j] * v * v * v * v;
            }
            out.mean = 0.0;               // symmetric support and pmf
            out.sd = std::sqrt(m2);       // IBB is exempt from affine scaling
            out.skewness = 0.0;           // exact, by construction symmetry
            out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
            break;
        }
        case Family::bimodal: {
            const double d2 = spec.separation * spec.separation;
            out.skewness = 0.0;
            out.excess_kurtosis = (3.0 + 6.0 * d2 + d2 * d2) / ((1.0 + d2) * (1.0 + d2)) - 3.0;
            break;
        }
    }
    return out;
}

CompiledSampler::CompiledSampler(const DistributionSpec& spec) : spec_(spec) {
    spec.validate();
    switch (spec.family) {
        case Family::normal:
        case Family::bimodal:
            if (spec.family == Family::bimodal) {
                spread_ = std::sqrt(1.0 + spec.separation * spec.separation);
            }
            break;
        case Family::sgn: {
            if (!std::isinf(spec.beta)) {
                spread_ = std::sqrt(lgamma_ratio(3.0 / spec.beta, 1.0 / spec.beta));
            }
            break;
        }
        case Family::agn: {
            // Standardize with the quadrature moments for mean/sd as well.
            const auto raw = agn_raw_moments_quadrature(spec.xi, spec.nu);
            shift_ = raw[1];
            spread_ = std::sqrt(raw[2] - raw[1] * raw[1]);
            break;
        }
        case Family::tgh: {
            const auto raw = tgh_raw_moments(spec.g, spec.h == 0.0 ? 0.0 : spec.h);
            shift_ = raw[1];
            spread_ = std::sqrt(raw[2] - raw[1] * raw[1]);
            break;
        }
        case Family::ibb: {
            const auto pmf = ibb_pmf(*spec.support, spec.p);
            ibb_cdf_.resize(pmf.size());
            double acc = 0.0;
            for (std::size_t j = 0; j < pmf.size(); ++j) {
                acc += pmf[j];
                ibb_cdf_[j] = acc;
            }
            ibb_cdf_.back() = 1.0;
            break;
        }
    }
}

void CompiledSampler::operator()(std::mt19937_64& eng, double* out, std::size_t count) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (spec_.family) {
        case Family::normal:
            for (std::size_t i = 0; i < count; ++i) out[i] = spec_.loc + spec_.scale * normal(eng);
            break;
        case Family::sgn: {
            if (std::isinf(spec_.beta)) {
                const double half = std::sqrt(3.0);
                for (std::size_t i = 0; i < count; ++i)
                    out[i] = spec_.loc + spec_.scale * ((2.0 * unit(eng) - 1.0) * half);
                break;
            }
            std::gamma_distribution<double> gamma(1.0 / spec_.beta, 1.0);
            for (std::size_t i = 0; i < count; ++i) {
                const double mag = std::pow(gamma(eng), 1.0 / spec_.beta);
                const double signed_draw = (unit(eng) < 0.5 ? -mag : mag);
                out[i] = spec_.loc + spec_.scale * (signed_draw / spread_);
            }
            break;
        }
        case Family::agn: {
            std::gamma_distribution<double> gamma(1.0 / spec_.nu, 1.0);
            const double pos_prob = spec_.xi * spec_.xi / (1.0 + spec_.xi * spec_.xi);
            for (std::size_t i = 0; i < count; ++i) {
                const double mag = std::pow(gamma(eng), 1.0 / spec_.nu);
                const double raw = (unit(eng) < pos_prob) ? spec_.xi * mag : -mag / spec_.xi;
                out[i] = spec_.loc + spec_.scale * ((raw - shift_) / spread_);
            }
            break;
        }
        case Family::tgh: {
            for (std::size_t i = 0; i < count; ++i) {
                const double z = normal(eng);
                double raw;
                if (spec_.g == 0.0) {
                    raw = z * std::exp(spec_.h * z * z / 2.0);
                } else {
                    raw = std::expm1(spec_.g * z) / spec_.g * std::exp(spec_.h * z * z / 2.0);
                }
                out[i] = spec_.loc + spec_.scale * ((raw - shift_) / spread_);
            }
            break;
        }
        case Family::ibb: {
            const auto& vals = spec_.support->values;
            for (std::size_t i = 0; i < count; ++i) {
                const double u = unit(eng);
                const auto it = std::lower_bound(ibb_cdf_.begin(), ibb_cdf_.end(), u);
                const std::size_t j = std::min<std::size_t>(it - ibb_cdf_.begin(), vals.size() - 1);
                out[i] = vals[j];
            }
            break;
        }
        case Family::bimodal: {
            for (std::size_t i = 0; i < count; ++i) {
                const double mode = (unit(eng) < 0.5 ? -spec_.separation : spec_.separation);
                out[i] = spec_.loc + spec_.scale * ((mode + normal(eng)) / spread_);
            }
            break;
        }
    }
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t count,
                           const RandomStream& stream) {
    std::vector<double> out(count);
    sample_into(spec, stream, out.data(), count);
    return out;
}

void sample_into(const DistributionSpec& spec, const RandomStream& stream,
                 double* out, std::size_t count) {
    CompiledSampler sampler(spec);
    auto eng = stream.engine();
    sampler(eng, out, count);
}

std::vector<double> sample_ibb(const MetricSupport& support, double p,
                               std::size_t count, const RandomStream& stream) {
    DistributionSpec spec;
    spec.family = Family::ibb;
    spec.p = p;
    spec.support = std::make_shared<MetricSupport>(support);
    return sample(spec, count, stream);
}

std::string to_config(const DistributionSpec& spec) {
    std::ostringstream os;
    os.precision(17);  // lossless double round-trip
    os << "family=" << family_name(spec.family) << "\n";
    switch (spec.family) {
        case Family::normal: break;
        case Family::sgn:
            os << "beta=";
            if (std::isinf(spec.beta)) os << "inf"; else os << spec.beta;
            os << "\n";
            break;
        case Family::agn: os << "xi=" << spec.xi << "\nnu=" << spec.nu << "\n"; break;
        case Family::tgh: os << "g=" << spec.g << "\nh=" << spec.h << "\n"; break;
        case Family::ibb:
            os << "metric=" << metric_name(spec.support->metric, spec.support->k) << "\n"
               << "p=" << spec.p << "\n";
            break;
        case Family::bimodal: os << "separation=" << spec.separation << "\n"; break;
    }
    if (spec.family != Family::ibb) {
        os << "loc=" << spec.loc << "\nscale=" << spec.scale << "\n";
    }
    return os.str();
}

namespace {

double parse_double(const std::string& v, long line) {
    if (v == "inf") return kInf;
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw parse_error("trailing characters in number: " + v, line);
        return x;
    } catch (const std::invalid_argument&) {
        throw parse_error("not a number: " + v, line);
    } catch (const std::out_of_range&) {
        throw parse_error("number out of range: " + v, line);
    }
}

std::pair<Metric, int> parse_metric(const std::string& v, long line) {
    std::string name = v;
    Metric m;
    if (name.rfind("P@", 0) == 0 || name.rfind("p@", 0) == 0) {
        m = Metric::precision_at_k;
        name = name.substr(2);
    } else if (name.rfind("RR@", 0) == 0 || name.rfind("rr@", 0) == 0) {
        m = Metric::reciprocal_rank_at_k;
        name = name.substr(3);
    } else {
        throw parse_error("metric must look like P@10 or RR@10, got: " + v, line);
    }
    const int k = int(parse_double(name, line));
    if (k < 1) throw parse_error("metric cutoff must be >= 1", line);
    return {m, k};
}

}  // namespace

DistributionSpec from_config(const std::string& text) {
    DistributionSpec spec;
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string linebuf;
    long lineno = 0;
    bool metric_seen = false;
    bool family_seen = false;
    Metric metric = Metric::precision_at_k;
    int k = 0;
    while (std::getline(is, linebuf)) {
        ++lineno;
        const auto hash = linebuf.find('#');
        if (hash != std::string::npos) linebuf.erase(hash);
        // trim
        const auto b = linebuf.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = linebuf.find_last_not_of(" \t\r");
        linebuf = linebuf.substr(b, e - b + 1);
        const auto eq = linebuf.find('=');
        if (eq == std::string::npos) throw parse_error("expected key=value: " + linebuf, lineno);
        const std::string key = linebuf.substr(0, eq);
        const std::string val = linebuf.substr(eq + 1);
        if (key == "family") {
            spec.family = family_from_name(val);
            family_seen = true;
        } else if (key == "metric") {
            std::tie(metric, k) = parse_metric(val, lineno);
            metric_seen = true;
        } else {
            kv[key] = val;
            if (key == "beta") spec.beta = parse_double(val, lineno);
            else if (key == "xi") spec.xi = parse_double(val, lineno);
            else if (key == "nu") spec.nu = parse_double(val, lineno);
            else if (key == "g") spec.g = parse_double(val, lineno);
            else if (key == "h") spec.h = parse_double(val, lineno);
            else if (key == "p") spec.p = parse_double(val, lineno);
            else if (key == "separation") spec.separation = parse_double(val, lineno);
            else if (key == "loc") spec.loc = parse_double(val, lineno);
            else if (key == "scale") spec.scale = parse_double(val, lineno);
            else throw parse_error("unknown config key: " + key, lineno);
        }
    }
    if (!family_seen) throw parse_error("spec config must declare family=<name>");
    if (spec.family == Family::ibb) {
        if (!metric_seen) throw parse_error("ibb spec requires a metric=P@k or metric=RR@k line");
        spec.support = std::make_shared<MetricSupport>(ibb_support(metric, k));
    }
    spec.validate();
    return spec;
}

DistributionSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open spec file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_config(ss.str());
}

}  // namespace siglab::dist
