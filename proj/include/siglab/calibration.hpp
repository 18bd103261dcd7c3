// Solve family shape parameters for target skewness/kurtosis/sd and build
// the graded departure grids (asymmetry, tail weight, discreteness).
#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "siglab/distributions.hpp"

namespace siglab::calib {

// The graded departure levels, one label per grid position.
struct DepartureGrid {
    static constexpr std::array<double, 6> asymmetry{0.25, 0.5, 1.0, 1.5, 3.0, 5.0};
    static constexpr std::array<double, 6> heavy_tails{0.5, 1.5, 3.0, 5.0, 15.0, 30.0};
    static constexpr std::array<double, 6> light_tails{-0.2, -0.4, -0.7, -0.9, -1.1, -1.2};
    static constexpr std::array<int, 6> discreteness{1000, 500, 100, 50, 10, 5};
    static const std::array<std::string, 6> labels;  // low ... pathologically-high
};

// sd the paired-difference distributions are standardized to.
inline constexpr double kTargetSd = 0.22;

// Largest skewness attainable by the two-piece generalized normal with a
// normal base (nu=2), approached as xi -> infinity.
double agn_max_skewness();

// Bisect a monotone objective f to |f(x)-target| tolerance on an [lo, hi]
// bracket. The objective is first checked for monotonicity on a 100-point
// grid; violations abort with a calibration_range_error diagnostic.
double bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                       double target, double xtol, const std::string& what);

// Solve the asymmetry parameter (AGN xi at nu=2, or TGH g at h=0) so the
// theoretical skewness hits target_gamma; negative targets by reflection.
// Result is standardized to mean 0, sd kTargetSd.
dist::DistributionSpec calibrate_skewness(dist::Family family, double target_gamma);

// Solve the tail parameter (SGN beta or TGH h at g=0) for a target excess
// kurtosis; kappa = -1.2 maps to the uniform limit. Standardized likewise.
dist::DistributionSpec calibrate_tails(dist::Family family, double target_kappa);

// Solve the IBB concentration p so the exact pmf sd equals target_sd
// (within 1e-9); errors when the support cannot reach the target.
dist::DistributionSpec calibrate_ibb(const dist::MetricSupport& support, double target_sd);

// Set loc/scale so the theoretical mean and sd equal the arguments exactly.
// IBB is exempt (standardized through calibrate_ibb); calling it is an error.
dist::DistributionSpec standardize(dist::DistributionSpec spec, double mean, double sd);

// One calibrated grid cell (before crossing with sample sizes).
struct GridCell {
    std::string dimension;  // asymmetric | heavy | light | discrete | demo
    std::string label;      // low ... pathologically-high
    std::string family;     // agn | tgh | sgn | ibb-P@k | ibb-RR@k | ...
    double target = 0.0;    // gamma, kappa, or k
    dist::DistributionSpec spec;
    bool sd_unattained = false;  // IBB fallback: target sd out of range
    double achieved_sd = kTargetSd;
};

std::vector<GridCell> build_asymmetric_grid();
std::vector<GridCell> build_heavy_grid();
std::vector<GridCell> build_light_grid();
std::vector<GridCell> build_discrete_grid();
// Four illustrative mechanisms (asymmetric, heavy, discrete, multimodal).
std::vector<GridCell> build_demo_grid();

std::vector<GridCell> build_grid(const std::string& selection);  // "all" | dimension

// Audit table: label, dimension, target, family, solved parameters, achieved moment.
std::string grid_to_csv(const std::vector<GridCell>& cells);

}  // namespace siglab::calib
