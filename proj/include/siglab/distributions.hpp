// Distribution families for the paired-difference variable D: samplers,
// exact/numeric moments, metric difference supports, and spec (de)serialization.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "siglab/random.hpp"

namespace siglab::dist {

enum class Family { normal, sgn, agn, tgh, ibb, bimodal };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

enum class Metric { precision_at_k, reciprocal_rank_at_k };

std::string metric_name(Metric m, int k);  // "P@10", "RR@10"

// All attainable values of a difference of two metric scores, rounded to
// 3 decimals (half away from zero), deduplicated, sorted ascending.
struct MetricSupport {
    Metric metric;
    int k;
    std::vector<double> values;
};

MetricSupport ibb_support(Metric metric, int k);

struct Moments {
    double mean = 0.0;
    double sd = 1.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

// A fully parameterized sampling mechanism. Draws are
// loc + scale * (standardized family draw); IBB ignores loc/scale (its
// support is semantically fixed) and is standardized through its p instead.
struct DistributionSpec {
    Family family = Family::normal;

    double beta = 2.0;  // SGN tail shape; +infinity encodes the uniform limit
    double xi = 1.0;    // AGN asymmetry
    double nu = 2.0;    // AGN tail shape
    double g = 0.0;     // TGH asymmetry
    double h = 0.0;     // TGH tail shape, in [0, 1/4) for finite kurtosis
    double p = 1.0;     // IBB concentration
    std::shared_ptr<const MetricSupport> support;  // IBB only
    double separation = 1.0;  // bimodal: mode offset in component-sd units

    double loc = 0.0;
    double scale = 1.0;

    // Throws parameter_domain_error when a field is outside its domain.
    void validate() const;
};

// Closed-form excess kurtosis of the symmetric generalized normal,
// Gamma(5/b)Gamma(1/b)/Gamma(3/b)^2 - 3; strictly decreasing in b.
double sgn_excess_kurtosis(double beta);

// Standardized skewness and excess kurtosis of the two-piece (skewed)
// generalized normal, computed by adaptive quadrature of the density.
std::pair<double, double> agn_moments(double xi, double nu);

// Standardized skewness and excess kurtosis of Tukey's g-and-h
// transform T(Z) = ((e^{gZ}-1)/g) e^{hZ^2/2} (limit Z e^{hZ^2/2} at g=0),
// from closed-form normal-exponential expectations. Requires h < 1/4.
std::pair<double, double> tgh_moments(double g, double h);

// Mean/sd/skewness/kurtosis of the spec after the affine transform
// (IBB: exact pmf moments of the support distribution).
Moments theoretical_moments(const DistributionSpec& spec);

// Exact pmf of BetaBin(|support|-1, p, p) over the support values.
std::vector<double> ibb_pmf(const MetricSupport& support, double p);

// Exact standard deviation of an IBB(support, p) draw.
double ibb_sd(const MetricSupport& support, double p);

// A spec compiled for repeated sampling: family dispatch and all
// standardization constants resolved once. Immutable and thread-safe.
class CompiledSampler {
public:
    explicit CompiledSampler(const DistributionSpec& spec);

    // Fill out[0..count) with i.i.d. draws using the given engine.
    void operator()(std::mt19937_64& eng, double* out, std::size_t count) const;

private:
    DistributionSpec spec_;
    double shift_ = 0.0;   // standardization: (raw - shift) / spread
    double spread_ = 1.0;
    std::vector<double> ibb_cdf_;  // cumulative pmf for IBB lookup
};

// One-shot sampling per the spec operation: count i.i.d. draws from the
// stream. Repeated calls with identical (spec, count, stream) are
// bitwise-identical.
std::vector<double> sample(const DistributionSpec& spec, std::size_t count,
                           const RandomStream& stream);

void sample_into(const DistributionSpec& spec, const RandomStream& stream,
                 double* out, std::size_t count);

// Draws from IBB over the given support (indexing by a symmetric
// Beta-Binomial); every draw is exactly a member of the support.
std::vector<double> sample_ibb(const MetricSupport& support, double p,
                               std::size_t count, const RandomStream& stream);

// Plain-text key=value config (one pair per line, '#' comments).
std::string to_config(const DistributionSpec& spec);
DistributionSpec from_config(const std::string& text);
DistributionSpec load_spec_file(const std::string& path);

}  // namespace siglab::dist
