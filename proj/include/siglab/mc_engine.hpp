// Monte Carlo Type I error estimation over departure grids, plus the
// empirical sampling-distribution machinery behind the CLT and skewness
// reference outputs. Deterministic for a fixed seed regardless of worker
// count: every replicate draws from a stream derived from
// (seed, cell index, replicate index).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siglab/calibration.hpp"
#include "siglab/distributions.hpp"
#include "siglab/random.hpp"
#include "siglab/stat_tests.hpp"

namespace siglab::mc {

struct TestSelection {
    bool t = true;
    bool wilcoxon = true;
};

struct SimulationConfig {
    std::uint64_t replicates = 100000;
    double alpha = 0.05;
    std::uint64_t seed = 42;
    TestSelection tests;
    stat::WilcoxonOptions wilcoxon_options;
    int workers = 1;

    void validate() const;  // throws parameter_domain_error
};

// One simulation cell: a calibrated mechanism at one sample size.
struct CellSpec {
    std::string dimension;  // asymmetric | heavy | light | discrete | ...
    std::string label;      // low ... pathologically-high
    std::string family;     // sgn | agn | tgh | ibb-P@k | ibb-RR@k | ...
    double target = 0.0;    // gamma, kappa, or k
    int n = 0;
    dist::DistributionSpec spec;
};

struct TestTally {
    std::uint64_t rejections = 0;
    std::uint64_t degenerate = 0;  // replicates the test could not run on
};

struct CellResult {
    CellSpec cell;
    std::uint64_t replicates = 0;
    TestTally t;
    TestTally wilcoxon;

    double rate(const TestTally& tally) const {
        return double(tally.rejections) / double(replicates);
    }
    double standard_error(const TestTally& tally) const;  // sqrt(r(1-r)/R)
};

struct SimulationReport {
    std::uint64_t seed = 0;
    double alpha = 0.05;
    TestSelection tests;
    std::vector<CellResult> cells;
    // Equal-replicate pools over the mechanisms sharing a
    // (dimension, label, n) triple; family tag "pooled".
    std::vector<CellResult> pooled;

    std::string to_csv() const;   // "# siglab-report v1" header
    std::string to_json() const;
};

// Rejection rates for one mechanism at one n. cell_index seeds the
// per-replicate streams, so reports are reproducible cell by cell.
CellResult type1_rate(const CellSpec& cell, std::size_t cell_index,
                      const SimulationConfig& config);

// type1_rate over an explicit cell list (cell_index = position).
SimulationReport run_cells(const std::vector<CellSpec>& cells, const SimulationConfig& config);

// Cross of grid cells with the benchmark sample sizes, pooled rows added.
extern const std::vector<int> kDefaultSampleSizes;  // 5, 50, 500, 5000
SimulationReport run_grid(const std::vector<calib::GridCell>& grid, const SimulationConfig& config,
                          const std::vector<int>& sample_sizes = kDefaultSampleSizes);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::uint64_t count = 0;
};

struct TSamplingSummary {
    int n = 0;
    std::uint64_t replicates = 0;
    std::uint64_t degenerate = 0;     // skipped zero-variance replicates
    double ks_distance = 0.0;         // sup |ecdf - F_{T(n-1)}|
    std::vector<HistogramBin> histogram;
    std::vector<double> ecdf_at_edges;  // ecdf at bin edges (bins+1 values)

    std::string histogram_csv() const;  // bin_left, bin_right, count
};

struct HistogramOptions {
    double lo = -8.0;
    double hi = 8.0;
    int bins = 200;  // out-of-range statistics land in the edge bins
};

// Empirical sampling distribution of the t statistic under the spec's null,
// with the Kolmogorov-Smirnov distance to the T(n-1) reference.
TSamplingSummary t_sampling_distribution(const dist::DistributionSpec& spec, int n,
                                         std::uint64_t replicates, const RandomStream& stream,
                                         const HistogramOptions& hist = {});

struct SkewnessReference {
    dist::DistributionSpec spec;       // the symmetric mechanism used
    std::vector<double> values;        // sample skewness, replicate order
    std::uint64_t degenerate = 0;      // zero-variance replicates skipped
};

// Distribution of the sample-skewness estimator at size n under a symmetric
// mechanism calibrated to the given excess kurtosis.
SkewnessReference symmetric_skewness_reference(double kappa, int n, std::uint64_t replicates,
                                               const RandomStream& stream);

}  // namespace siglab::mc
