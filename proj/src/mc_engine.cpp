#include "siglab/mc_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "siglab/errors.hpp"
#include "siglab/special.hpp"

namespace siglab::mc {

namespace {
constexpr std::uint64_t kBlockReplicates = 1024;
}

void SimulationConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw parameter_domain_error("simulation: alpha must be in (0,1)");
    if (replicates < 1) throw parameter_domain_error("simulation: replicates must be >= 1");
    if (workers < 1) throw parameter_domain_error("simulation: workers must be >= 1");
    if (!tests.t && !tests.wilcoxon)
        throw parameter_domain_error("simulation: no tests selected");
}

double CellResult::standard_error(const TestTally& tally) const {
    const double r = rate(tally);
    return std::sqrt(r * (1.0 - r) / double(replicates));
}

namespace {

struct BlockTally {
    TestTally t;
    TestTally wilcoxon;
};

// One block of consecutive replicates; integer tallies make the final
// reduction independent of which worker ran which block.
BlockTally run_block(const dist::CompiledSampler& sampler, int n, std::size_t cell_index,
                     std::uint64_t first_rep, std::uint64_t last_rep,
                     const SimulationConfig& config) {
    BlockTally tally;
    stat::PairedSample sample;
    sample.values.resize(n);
    RandomStream cell_stream(config.seed, {std::uint64_t(cell_index)});
    for (std::uint64_t rep = first_rep; rep < last_rep; ++rep) {
        auto eng = cell_stream.child(rep).engine();
        sampler(eng, sample.values.data(), std::size_t(n));
        if (config.tests.t) {
            try {
                if (stat::t_test(sample).p_value < config.alpha) ++tally.t.rejections;
            } catch (const degenerate_sample_error&) {
                ++tally.t.degenerate;
            }
        }
        if (config.tests.wilcoxon) {
            try {
                if (stat::wilcoxon_test(sample, config.wilcoxon_options).p_value < config.alpha)
                    ++tally.wilcoxon.rejections;
            } catch (const degenerate_sample_error&) {
                ++tally.wilcoxon.degenerate;
            }
        }
    }
    return tally;
}

void add(TestTally& into, const TestTally& from) {
    into.rejections += from.rejections;
    into.degenerate += from.degenerate;
}

}  // namespace

CellResult type1_rate(const CellSpec& cell, std::size_t cell_index,
                      const SimulationConfig& config) {
    config.validate();
    if (cell.n < 2) throw parameter_domain_error("type1_rate: n must be >= 2");
    const dist::CompiledSampler sampler(cell.spec);

    const std::uint64_t blocks = (config.replicates + kBlockReplicates - 1) / kBlockReplicates;
    std::vector<BlockTally> block_tallies(blocks);
    std::atomic<std::uint64_t> next_block{0};

    auto worker = [&]() {
        for (;;) {
            const std::uint64_t b = next_block.fetch_add(1);
            if (b >= blocks) return;
            const std::uint64_t first = b * kBlockReplicates;
            const std::uint64_t last = std::min(first + kBlockReplicates, config.replicates);
            block_tallies[b] = run_block(sampler, cell.n, cell_index, first, last, config);
        }
    };

    const int nthreads = int(std::min<std::uint64_t>(std::uint64_t(config.workers), blocks));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    CellResult result;
    result.cell = cell;
    result.replicates = config.replicates;
    for (const auto& bt : block_tallies) {
        add(result.t, bt.t);
        add(result.wilcoxon, bt.wilcoxon);
    }
    return result;
}

SimulationReport run_cells(const std::vector<CellSpec>& cells, const SimulationConfig& config) {
    config.validate();
    SimulationReport report;
    report.seed = config.seed;
    report.alpha = config.alpha;
    report.tests = config.tests;
    report.cells.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        report.cells.push_back(type1_rate(cells[i], i, config));
    return report;
}

const std::vector<int> kDefaultSampleSizes = {5, 50, 500, 5000};

SimulationReport run_grid(const std::vector<calib::GridCell>& grid, const SimulationConfig& config,
                          const std::vector<int>& sample_sizes) {
    std::vector<CellSpec> cells;
    cells.reserve(grid.size() * sample_sizes.size());
    for (const auto& gc : grid) {
        for (int n : sample_sizes) {
            CellSpec cs;
            cs.dimension = gc.dimension;
            cs.label = gc.label;
            cs.family = gc.family;
            cs.target = gc.target;
            cs.n = n;
            cs.spec = gc.spec;
            cells.push_back(std::move(cs));
        }
    }
    SimulationReport report = run_cells(cells, config);

    // Pool mechanisms that share (dimension, label, n): the published grid
    // reports one number per departure level, averaging its mechanisms.
    for (const auto& res : report.cells) {
        auto match = std::find_if(report.pooled.begin(), report.pooled.end(),
                                  [&](const CellResult& p) {
                                      return p.cell.dimension == res.cell.dimension &&
                                             p.cell.label == res.cell.label &&
                                             p.cell.n == res.cell.n;
                                  });
        if (match == report.pooled.end()) {
            CellResult pooled = res;
            pooled.cell.family = "pooled";
            pooled.cell.spec = dist::DistributionSpec{};
            report.pooled.push_back(std::move(pooled));
        } else {
            match->replicates += res.replicates;
            add(match->t, res.t);
            add(match->wilcoxon, res.wilcoxon);
        }
    }
    return report;
}

namespace {

void append_row(std::string& out, const CellResult& r, const char* test, const TestTally& tally) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), ",%.10g,%d,%s,%llu,%llu,%llu,%.10g,%.10g\n", r.cell.target,
                  r.cell.n, test, (unsigned long long)r.replicates,
                  (unsigned long long)tally.rejections, (unsigned long long)tally.degenerate,
                  r.rate(tally), r.standard_error(tally));
    out += r.cell.dimension + "," + r.cell.label + "," + r.cell.family + buf;
}

void append_rows(std::string& out, const std::vector<CellResult>& rows, const TestSelection& tests) {
    for (const auto& r : rows) {
        if (tests.t) append_row(out, r, "t", r.t);
        if (tests.wilcoxon) append_row(out, r, "wilcoxon", r.wilcoxon);
    }
}

nlohmann::json row_json(const CellResult& r, const char* test, const TestTally& tally) {
    return {{"dimension", r.cell.dimension}, {"label", r.cell.label},
            {"family", r.cell.family},       {"target", r.cell.target},
            {"n", r.cell.n},                 {"test", test},
            {"replicates", r.replicates},    {"rejections", tally.rejections},
            {"degenerate", tally.degenerate},{"rate", r.rate(tally)},
            {"se", r.standard_error(tally)}};
}

}  // namespace

std::string SimulationReport::to_csv() const {
    std::string out = "# siglab-report v1\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "# seed=%llu alpha=%.10g\n", (unsigned long long)seed, alpha);
    out += buf;
    out += "dimension,label,family,target,n,test,replicates,rejections,degenerate,rate,se\n";
    append_rows(out, cells, tests);
    append_rows(out, pooled, tests);
    return out;
}

std::string SimulationReport::to_json() const {
    nlohmann::json j;
    j["schema"] = "siglab-report v1";
    j["seed"] = seed;
    j["alpha"] = alpha;
    j["rows"] = nlohmann::json::array();
    j["pooled"] = nlohmann::json::array();
    for (const auto& r : cells) {
        if (tests.t) j["rows"].push_back(row_json(r, "t", r.t));
        if (tests.wilcoxon) j["rows"].push_back(row_json(r, "wilcoxon", r.wilcoxon));
    }
    for (const auto& r : pooled) {
        if (tests.t) j["pooled"].push_back(row_json(r, "t", r.t));
        if (tests.wilcoxon) j["pooled"].push_back(row_json(r, "wilcoxon", r.wilcoxon));
    }
    return j.dump(2) + "\n";
}

std::string TSamplingSummary::histogram_csv() const {
    std::string out = "# siglab-histogram v1\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# n=%d replicates=%llu degenerate=%llu ks=%.10g\n", n,
                  (unsigned long long)replicates, (unsigned long long)degenerate, ks_distance);
    out += buf;
    out += "bin_left,bin_right,count\n";
    for (const auto& b : histogram) {
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%llu\n", b.left, b.right,
                      (unsigned long long)b.count);
        out += buf;
    }
    return out;
}

TSamplingSummary t_sampling_distribution(const dist::DistributionSpec& spec, int n,
                                         std::uint64_t replicates, const RandomStream& stream,
                                         const HistogramOptions& hist) {
    if (n < 2) throw parameter_domain_error("t_sampling_distribution: n must be >= 2");
    if (!(hist.hi > hist.lo) || hist.bins < 1)
        throw parameter_domain_error("t_sampling_distribution: bad histogram range");
    const dist::CompiledSampler sampler(spec);
    std::vector<double> buf(n);
    std::vector<double> stats;
    stats.reserve(replicates);
    TSamplingSummary out;
    out.n = n;

    for (std::uint64_t rep = 0; rep < replicates; ++rep) {
        auto eng = stream.child(rep).engine();
        sampler(eng, buf.data(), std::size_t(n));
        double mean = 0.0;
        for (double v : buf) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : buf) ss += (v - mean) * (v - mean);
        const double var = ss / (n - 1);
        if (!(var > 0.0)) {
            ++out.degenerate;
            continue;
        }
        stats.push_back(mean / std::sqrt(var / n));
    }
    out.replicates = stats.size();
    std::sort(stats.begin(), stats.end());

    const double df = double(n - 1);
    const double R = double(stats.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const double F = student_t_cdf(stats[i], df);
        ks = std::max(ks, std::max(F - double(i) / R, double(i + 1) / R - F));
    }
    out.ks_distance = ks;

    const double width = (hist.hi - hist.lo) / hist.bins;
    out.histogram.resize(hist.bins);
    for (int b = 0; b < hist.bins; ++b) {
        out.histogram[b].left = hist.lo + b * width;
        out.histogram[b].right = hist.lo + (b + 1) * width;
    }
    for (double x : stats) {
        int b = int(std::floor((x - hist.lo) / width));
        b = std::clamp(b, 0, hist.bins - 1);  // tails land in the edge bins
        ++out.histogram[b].count;
    }
    out.ecdf_at_edges.resize(hist.bins + 1);
    for (int e = 0; e <= hist.bins; ++e) {
        const double edge = hist.lo + e * width;
        const auto it = std::upper_bound(stats.begin(), stats.end(), edge);
        out.ecdf_at_edges[e] = stats.empty() ? 0.0 : double(it - stats.begin()) / R;
    }
    return out;
}

SkewnessReference symmetric_skewness_reference(double kappa, int n, std::uint64_t replicates,
                                               const RandomStream& stream) {
    if (n < 3) throw parameter_domain_error("symmetric_skewness_reference: n must be >= 3");
    SkewnessReference out;
    out.spec = calib::calibrate_tails(dist::Family::sgn, kappa);
    const dist::CompiledSampler sampler(out.spec);
    std::vector<double> buf(n);
    out.values.reserve(replicates);
    for (std::uint64_t rep = 0; rep < replicates; ++rep) {
        auto eng = stream.child(rep).engine();
        sampler(eng, buf.data(), std::size_t(n));
        double mean = 0.0;
        for (double v : buf) mean += v;
        mean /= n;
        double m2 = 0.0, m3 = 0.0;
        for (double v : buf) {
            const double d = v - mean;
            m2 += d * d;
            m3 += d * d * d;
        }
        m2 /= n;
        m3 /= n;
        if (!(m2 > 0.0)) {
            ++out.degenerate;
            continue;
        }
        out.values.push_back(m3 / std::pow(m2, 1.5));
    }
    return out;
}

}  // namespace siglab::mc
