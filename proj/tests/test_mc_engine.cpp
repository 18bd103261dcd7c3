#include <doctest.h>

#include <cmath>
#include <memory>
#include <numeric>

#include "oracle_values.hpp"
#include "siglab/errors.hpp"
#include "siglab/mc_engine.hpp"
#include "siglab/special.hpp"

using namespace siglab;
using namespace siglab::mc;

namespace {

CellSpec normal_cell(int n) {
    CellSpec cell;
    cell.dimension = "demo";
    cell.label = "none";
    cell.family = "normal";
    cell.n = n;
    cell.spec.family = dist::Family::normal;
    cell.spec.scale = 0.22;
    return cell;
}

SimulationConfig small_config(std::uint64_t reps) {
    SimulationConfig cfg;
    cfg.replicates = reps;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_CASE("config validation") {
    SimulationConfig cfg;
    cfg.replicates = 0;
    CHECK_THROWS_AS(cfg.validate(), parameter_domain_error);
    cfg.replicates = 10;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(cfg.validate(), parameter_domain_error);
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), parameter_domain_error);
    cfg.alpha = 0.05;
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.validate(), parameter_domain_error);
}

TEST_CASE("reports are identical for any worker count") {
    auto cfg = small_config(4000);
    std::vector<CellSpec> cells = {normal_cell(5), normal_cell(20)};
    cfg.workers = 1;
    const auto one = run_cells(cells, cfg);
    cfg.workers = 4;
    const auto four = run_cells(cells, cfg);
    cfg.workers = 16;
    const auto sixteen = run_cells(cells, cfg);
    CHECK(one.to_csv() == four.to_csv());
    CHECK(one.to_csv() == sixteen.to_csv());
    CHECK(one.to_json() == four.to_json());
    // And a different seed genuinely changes the tallies.
    cfg.seed = 100;
    cfg.workers = 1;
    const auto other = run_cells(cells, cfg);
    CHECK(other.to_csv() != one.to_csv());
}

TEST_CASE("rates and standard errors follow the tallies") {
    auto cfg = small_config(20000);
    const auto res = type1_rate(normal_cell(20), 0, cfg);
    CHECK(res.replicates == 20000);
    const double rate = res.rate(res.t);
    CHECK(rate == doctest::Approx(double(res.t.rejections) / 20000.0));
    CHECK(res.standard_error(res.t) ==
          doctest::Approx(std::sqrt(rate * (1 - rate) / 20000.0)).epsilon(1e-12));
    // Normal data: both tests should sit near the nominal level.
    CHECK(rate > 0.03);
    CHECK(rate < 0.07);
    CHECK(res.t.degenerate == 0);
    CHECK(res.wilcoxon.degenerate == 0);
}

TEST_CASE("wilcoxon cannot reject two-sided at n=5 and alpha=.05") {
    // The exact two-sided floor at n=5 is 2/32 = 0.0625 > 0.05.
    auto cfg = small_config(20000);
    const auto res = type1_rate(normal_cell(5), 0, cfg);
    CHECK(res.wilcoxon.rejections == 0);
    CHECK(res.t.rejections > 0);
}

TEST_CASE("degenerate replicates are tallied, not rejected") {
    // A two-point lattice at n=5 collapses to all-equal samples often enough
    // that both tests must hit their degenerate branches.
    CellSpec cell;
    cell.dimension = "discrete";
    cell.label = "extreme";
    cell.family = "ibb-P@1";
    cell.n = 5;
    cell.spec.family = dist::Family::ibb;
    cell.spec.p = 0.5;
    cell.spec.support = std::make_shared<dist::MetricSupport>(
        dist::ibb_support(dist::Metric::precision_at_k, 1));
    auto cfg = small_config(8000);
    const auto res = type1_rate(cell, 0, cfg);
    CHECK(res.t.degenerate > 0);
    CHECK(res.wilcoxon.degenerate > 0);
    CHECK(res.t.degenerate < res.replicates);  // not everything collapses
    CHECK(res.rate(res.t) < 0.2);
}

TEST_CASE("grid runs pool mechanisms sharing a departure cell") {
    const auto grid = calib::build_grid("light");  // 6 cells, one family
    auto cfg = small_config(300);
    const auto report = run_grid(grid, cfg, {5, 50});
    CHECK(report.cells.size() == 12);   // 6 labels x 2 sizes
    CHECK(report.pooled.size() == 12);  // single-family pools mirror the cells
    for (const auto& p : report.pooled) {
        CHECK(p.cell.family == "pooled");
        bool found = false;
        for (const auto& c : report.cells) {
            if (c.cell.label == p.cell.label && c.cell.n == p.cell.n) {
                CHECK(p.replicates == c.replicates);
                CHECK(p.t.rejections == c.t.rejections);
                CHECK(p.wilcoxon.rejections == c.wilcoxon.rejections);
                found = true;
            }
        }
        CHECK(found);
    }

    const auto heavy = calib::build_grid("heavy");  // sgn + tgh per label
    const auto heavy_report = run_grid(heavy, cfg, {5});
    CHECK(heavy_report.cells.size() == 12);
    CHECK(heavy_report.pooled.size() == 6);
    for (const auto& p : heavy_report.pooled) {
        std::uint64_t reps = 0, t_rej = 0, w_rej = 0;
        for (const auto& c : heavy_report.cells) {
            if (c.cell.label == p.cell.label && c.cell.n == p.cell.n) {
                reps += c.replicates;
                t_rej += c.t.rejections;
                w_rej += c.wilcoxon.rejections;
            }
        }
        CHECK(p.replicates == reps);
        CHECK(p.t.rejections == t_rej);
        CHECK(p.wilcoxon.rejections == w_rej);
    }
}

TEST_CASE("csv report carries the provenance header and both sections") {
    const auto grid = calib::build_grid("light");
    auto cfg = small_config(200);
    cfg.seed = 31;
    const auto report = run_grid(grid, cfg, {5});
    const auto csv = report.to_csv();
    CHECK(csv.rfind("# siglab-report v1", 0) == 0);
    CHECK(csv.find("# seed=31") != std::string::npos);
    CHECK(csv.find("dimension,label,family,target,n,test,replicates,rejections,degenerate,"
                   "rate,se") != std::string::npos);
    CHECK(csv.find(",pooled,") != std::string::npos);
    std::size_t lines = 0;
    for (char ch : csv)
        if (ch == '\n') ++lines;
    // comments + header + 6 cells x 2 tests + 6 pools x 2 tests
    CHECK(lines >= 24);
}

TEST_CASE("t sampling distribution summary is internally consistent") {
    dist::DistributionSpec normal;
    normal.scale = 0.22;
    HistogramOptions hist;
    hist.bins = 50;
    const auto s5 = t_sampling_distribution(normal, 5, 20000, RandomStream(8, {0}), hist);
    CHECK(s5.n == 5);
    CHECK(s5.replicates == 20000);
    CHECK(s5.degenerate == 0);
    CHECK(s5.histogram.size() == 50);
    CHECK(s5.ecdf_at_edges.size() == 51);
    std::uint64_t total = 0;
    for (const auto& b : s5.histogram) {
        CHECK(b.left < b.right);
        total += b.count;
    }
    CHECK(total == s5.replicates - s5.degenerate);
    for (std::size_t i = 1; i < s5.ecdf_at_edges.size(); ++i)
        CHECK(s5.ecdf_at_edges[i] >= s5.ecdf_at_edges[i - 1]);
    CHECK(s5.ecdf_at_edges.back() == doctest::Approx(1.0).epsilon(5e-3));

    // Normal data: the t statistic follows T(n-1) exactly, so the KS distance
    // is pure noise ~ 1/sqrt(R).
    CHECK(s5.ks_distance < 1.95 / std::sqrt(20000.0));

    const auto csv = s5.histogram_csv();
    CHECK(csv.find("bin_left") != std::string::npos);

    // Heavily skewed data at n=5 vs n=50: convergence shrinks the distance.
    const auto spec = calib::calibrate_skewness(dist::Family::tgh, 3.0);
    const auto d5 = t_sampling_distribution(spec, 5, 20000, RandomStream(7, {1}), hist);
    const auto d50 = t_sampling_distribution(spec, 50, 20000, RandomStream(7, {2}), hist);
    CHECK(d5.ks_distance > 2.0 * d50.ks_distance);
    CHECK(d50.ks_distance > 1.95 / std::sqrt(20000.0));  // still visibly non-t
}

TEST_CASE("skewness reference spreads with kurtosis") {
    const auto flat = symmetric_skewness_reference(0.0, 50, 4000, RandomStream(11, {0}));
    const auto heavy = symmetric_skewness_reference(15.0, 50, 4000, RandomStream(11, {1}));
    REQUIRE(flat.values.size() == 4000);
    REQUIRE(heavy.values.size() + heavy.degenerate == 4000);
    auto mean_sd = [](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return std::pair<double, double>(mean, std::sqrt(ss / double(v.size())));
    };
    const auto [m0, s0] = mean_sd(flat.values);
    const auto [m15, s15] = mean_sd(heavy.values);
    // Symmetric mechanisms: the estimator is centered at zero either way,
    // but heavier tails inflate its spread.
    CHECK(std::fabs(m0) < 5 * s0 / std::sqrt(4000.0));
    CHECK(std::fabs(m15) < 5 * s15 / std::sqrt(4000.0));
    CHECK(s15 > 1.5 * s0);
    CHECK(flat.spec.family == dist::Family::sgn);
}
