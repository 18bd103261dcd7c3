#include "siglab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <CLI11.hpp>

#include "siglab/calibration.hpp"
#include "siglab/distributions.hpp"
#include "siglab/errors.hpp"
#include "siglab/ingest.hpp"
#include "siglab/mc_engine.hpp"
#include "siglab/random.hpp"

namespace siglab::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 42;

std::uint64_t seed_from_env() {
    const char* env = std::getenv("SIGLAB_SEED");
    if (!env || !*env) return kDefaultSeed;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw parameter_domain_error(std::string("SIGLAB_SEED is not an integer: '") + env + "'");
    return v;
}

void write_output(const std::string& path, const std::string& content) {
    if (path == "-") {
        std::fwrite(content.data(), 1, content.size(), stdout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write '" + path + "'");
    out << content;
}

struct SharedFlags {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string output = "-";

    std::uint64_t resolve_seed() const { return seed_given ? seed : seed_from_env(); }
};

void add_seed_output(CLI::App* cmd, SharedFlags& shared) {
    cmd->add_option("--seed", shared.seed, "RNG seed (default 42; env SIGLAB_SEED overrides)")
        ->each([&shared](const std::string&) { shared.seed_given = true; });
    cmd->add_option("-o,--output", shared.output, "Output path ('-' = stdout)");
}

struct WilcoxonFlags {
    std::string zero_policy = "drop";
    int exact_threshold = 50;
    bool no_continuity = false;

    stat::WilcoxonOptions resolve() const {
        stat::WilcoxonOptions opts;
        opts.zero_policy =
            zero_policy == "pratt" ? stat::ZeroPolicy::pratt : stat::ZeroPolicy::drop;
        opts.exact_threshold = exact_threshold;
        opts.continuity_correction = !no_continuity;
        return opts;
    }
};

void add_wilcoxon_flags(CLI::App* cmd, WilcoxonFlags& flags) {
    cmd->add_option("--zero-policy", flags.zero_policy, "Zero handling: drop | pratt")
        ->check(CLI::IsMember({"drop", "pratt"}));
    cmd->add_option("--exact-threshold", flags.exact_threshold,
                    "Max effective n for the exact Wilcoxon null (default 50)");
    cmd->add_flag("--no-continuity-correction", flags.no_continuity,
                  "Disable the +/-0.5 continuity correction");
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
    SharedFlags shared;
    WilcoxonFlags wilcoxon;
    std::string grid = "all";
    std::string format = "csv";
    std::string tests = "both";
    std::uint64_t replicates = 100000;
    bool replicates_given = false;
    bool desk = false;
    double alpha = 0.05;
    int workers = 1;
};

int cmd_simulate(const SimulateArgs& args) {
    mc::SimulationConfig config;
    config.replicates = args.desk && !args.replicates_given ? 10000 : args.replicates;
    config.alpha = args.alpha;
    config.seed = args.shared.resolve_seed();
    config.workers = args.workers;
    config.tests.t = args.tests != "wilcoxon";
    config.tests.wilcoxon = args.tests != "t";
    config.wilcoxon_options = args.wilcoxon.resolve();

    const auto grid = calib::build_grid(args.grid);
    const auto report = mc::run_grid(grid, config);
    write_output(args.shared.output,
                 args.format == "json" ? report.to_json() : report.to_csv());
    return 0;
}

// ---- clt ---------------------------------------------------------------

struct CltArgs {
    SharedFlags shared;
    std::string spec_path;
    double gamma = 0.0;
    bool gamma_given = false;
    std::vector<int> sizes = {5, 10, 50};
    std::uint64_t replicates = 1000000;
    mc::HistogramOptions hist;
};

int cmd_clt(const CltArgs& args) {
    dist::DistributionSpec spec;
    if (args.gamma_given) {
        spec = calib::calibrate_skewness(dist::Family::tgh, args.gamma);
    } else {
        spec = dist::load_spec_file(args.spec_path);
    }
    const std::uint64_t seed = args.shared.resolve_seed();
    std::string all;
    for (std::size_t i = 0; i < args.sizes.size(); ++i) {
        const int n = args.sizes[i];
        RandomStream stream(seed, {std::uint64_t(i)});
        const auto summary =
            mc::t_sampling_distribution(spec, n, args.replicates, stream, args.hist);
        std::fprintf(stderr, "n=%d ks=%.6g degenerate=%llu\n", n, summary.ks_distance,
                     (unsigned long long)summary.degenerate);
        if (args.shared.output == "-") {
            all += summary.histogram_csv();
        } else {
            write_output(args.shared.output + "_n" + std::to_string(n) + ".csv",
                         summary.histogram_csv());
        }
    }
    if (args.shared.output == "-") write_output("-", all);
    return 0;
}

// ---- moments-reference -------------------------------------------------

struct MomentsRefArgs {
    SharedFlags shared;
    double kappa = 0.0;
    int n = 50;
    std::uint64_t replicates = 100000;
    int bins = 101;
};

int cmd_moments_reference(const MomentsRefArgs& args) {
    RandomStream stream(args.shared.resolve_seed(), {0});
    auto ref = mc::symmetric_skewness_reference(args.kappa, args.n, args.replicates, stream);
    std::sort(ref.values.begin(), ref.values.end());

    double mean = 0.0;
    for (double v : ref.values) mean += v;
    mean /= ref.values.empty() ? 1.0 : double(ref.values.size());
    double var = 0.0;
    for (double v : ref.values) var += (v - mean) * (v - mean);
    var /= ref.values.empty() ? 1.0 : double(ref.values.size());

    std::string out = "# siglab-skewness-reference v1\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "# kappa=%.10g n=%d replicates=%llu degenerate=%llu\n",
                  args.kappa, args.n, (unsigned long long)(ref.values.size() + ref.degenerate),
                  (unsigned long long)ref.degenerate);
    out += buf;
    std::string spec_line = dist::to_config(ref.spec);
    for (char& ch : spec_line)
        if (ch == '\n') ch = ';';
    while (!spec_line.empty() && spec_line.back() == ';') spec_line.pop_back();
    std::snprintf(buf, sizeof(buf), "# spec=%s\n# mean=%.6g sd=%.6g\n", spec_line.c_str(), mean,
                  std::sqrt(var));
    out += buf;
    out += "bin_left,bin_right,count\n";
    if (!ref.values.empty()) {
        const double lo = ref.values.front();
        const double hi = ref.values.back();
        const double width = (hi > lo ? hi - lo : 1.0) / args.bins;
        std::vector<std::uint64_t> counts(args.bins, 0);
        for (double v : ref.values) {
            int b = int((v - lo) / width);
            if (b >= args.bins) b = args.bins - 1;
            if (b < 0) b = 0;
            ++counts[b];
        }
        for (int b = 0; b < args.bins; ++b) {
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%llu\n", lo + b * width,
                          lo + (b + 1) * width, (unsigned long long)counts[b]);
            out += buf;
        }
    }
    write_output(args.shared.output, out);
    return 0;
}

// ---- diagnose ----------------------------------------------------------

struct DiagnoseArgs {
    SharedFlags shared;
    WilcoxonFlags wilcoxon;
    std::string input;
    std::string format = "auto";
    int n = 50;
    double alpha = 0.05;
    double threshold = 0.5;
};

int cmd_diagnose(const DiagnoseArgs& args) {
    ingest::MatrixFormat format = ingest::MatrixFormat::auto_detect;
    if (args.format == "wide") format = ingest::MatrixFormat::wide_csv;
    if (args.format == "long") format = ingest::MatrixFormat::long_triplet;
    const auto matrix = ingest::load_score_matrix(args.input, format);

    ingest::DiagnoseOptions options;
    options.skew_flag_threshold = args.threshold;
    options.wilcoxon = args.wilcoxon.resolve();
    RandomStream stream(args.shared.resolve_seed(), {0});
    const auto rows = ingest::diagnose_matrix(matrix, args.n, args.alpha, options, stream);
    write_output(args.shared.output, ingest::diagnostics_csv(rows));
    return 0;
}

// ---- calibrate ---------------------------------------------------------

struct CalibrateArgs {
    SharedFlags shared;
    std::string dimension = "all";
    std::string family;
};

int cmd_calibrate(const CalibrateArgs& args) {
    auto cells = calib::build_grid(args.dimension);
    if (!args.family.empty()) {
        std::erase_if(cells,
                      [&](const calib::GridCell& c) { return c.family != args.family; });
        if (cells.empty())
            throw calibration_range_error("no cells for family '" + args.family +
                                          "' in dimension '" + args.dimension + "'");
    }
    write_output(args.shared.output, calib::grid_to_csv(cells));
    return 0;
}

// ---- support -----------------------------------------------------------

struct SupportArgs {
    SharedFlags shared;
    std::string metric = "P";
    int k = 10;
};

int cmd_support(const SupportArgs& args) {
    const auto metric = args.metric == "RR" ? dist::Metric::reciprocal_rank_at_k
                                            : dist::Metric::precision_at_k;
    const auto support = dist::ibb_support(metric, args.k);
    std::string out = "# siglab-support v1\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# metric=%s size=%zu\n",
                  dist::metric_name(metric, args.k).c_str(), support.values.size());
    out += buf;
    out += "value\n";
    for (double v : support.values) {
        std::snprintf(buf, sizeof(buf), "%.3f\n", v);
        out += buf;
    }
    write_output(args.shared.output, out);
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"siglab: paired significance tests under non-normal score distributions"};
    app.set_version_flag("--version", "siglab 1.0.0");
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "Monte Carlo Type I error rates over a departure grid");
    add_seed_output(simulate, sim.shared);
    add_wilcoxon_flags(simulate, sim.wilcoxon);
    simulate->add_option("--grid", sim.grid, "Grid selection (default all)")
        ->check(CLI::IsMember({"all", "asymmetric", "heavy", "light", "discrete", "demo-table1"}));
    simulate->add_option("--replicates", sim.replicates, "Replicates per cell (default 100000)")
        ->each([&sim](const std::string&) { sim.replicates_given = true; });
    simulate->add_flag("--desk", sim.desk, "Desk preset: 10000 replicates (widened tolerances)");
    simulate->add_option("--alpha", sim.alpha, "Significance level (default 0.05)");
    simulate->add_option("--workers", sim.workers, "Worker threads (default 1)");
    simulate->add_option("--format", sim.format, "Output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    simulate->add_option("--tests", sim.tests, "Which tests: t | wilcoxon | both")
        ->check(CLI::IsMember({"t", "wilcoxon", "both"}));

    CltArgs clt;
    auto* cltc = app.add_subcommand(
        "clt", "Empirical t-statistic sampling distributions and KS distances");
    add_seed_output(cltc, clt.shared);
    auto* spec_opt = cltc->add_option("--spec", clt.spec_path, "Distribution config file");
    cltc->add_option("--gamma", clt.gamma, "Calibrate a g-and-h spec to this skewness instead")
        ->each([&clt](const std::string&) { clt.gamma_given = true; })
        ->excludes(spec_opt);
    cltc->add_option("--n", clt.sizes, "Sample sizes (default 5 10 50)");
    cltc->add_option("--replicates", clt.replicates, "Replicates (default 1000000)");
    cltc->add_option("--bins", clt.hist.bins, "Histogram bins (default 200)");
    cltc->add_option("--lo", clt.hist.lo, "Histogram lower edge (default -8)");
    cltc->add_option("--hi", clt.hist.hi, "Histogram upper edge (default 8)");

    MomentsRefArgs momref;
    auto* mrc = app.add_subcommand(
        "moments-reference", "Sample-skewness distribution under a symmetric mechanism");
    add_seed_output(mrc, momref.shared);
    mrc->add_option("--kappa", momref.kappa, "Excess kurtosis of the symmetric mechanism")
        ->required();
    mrc->add_option("--n", momref.n, "Sample size (default 50)");
    mrc->add_option("--replicates", momref.replicates, "Replicates (default 100000)");
    mrc->add_option("--bins", momref.bins, "Histogram bins (default 101)");

    DiagnoseArgs diag;
    auto* diagc = app.add_subcommand(
        "diagnose", "Per-pair tests and moment diagnostics for a score matrix");
    add_seed_output(diagc, diag.shared);
    add_wilcoxon_flags(diagc, diag.wilcoxon);
    diagc->add_option("-i,--input", diag.input, "Score matrix file")->required();
    diagc->add_option("--input-format", diag.format, "auto | wide | long")
        ->check(CLI::IsMember({"auto", "wide", "long"}));
    diagc->add_option("--n", diag.n, "Resample each pair to this n (0 = keep as is; default 50)");
    diagc->add_option("--alpha", diag.alpha, "Significance level (default 0.05)");
    diagc->add_option("--threshold", diag.threshold,
                      "Asymmetry flag threshold on |skewness| (default 0.5)");

    CalibrateArgs cal;
    auto* calc = app.add_subcommand("calibrate", "Solved shape parameters for a departure grid");
    add_seed_output(calc, cal.shared);
    calc->add_option("--dimension", cal.dimension,
                     "all | asymmetric | heavy | light | discrete | demo-table1");
    calc->add_option("--family", cal.family, "Keep only this family tag (e.g. tgh, ibb-P@k)");

    SupportArgs sup;
    auto* supc = app.add_subcommand("support", "Metric-difference support values");
    add_seed_output(supc, sup.shared);
    supc->add_option("--metric", sup.metric, "P | RR")->check(CLI::IsMember({"P", "RR"}));
    supc->add_option("--k", sup.k, "Metric cutoff (default 10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (cltc->parsed()) return cmd_clt(clt);
        if (mrc->parsed()) return cmd_moments_reference(momref);
        if (diagc->parsed()) return cmd_diagnose(diag);
        if (calc->parsed()) return cmd_calibrate(cal);
        if (supc->parsed()) return cmd_support(sup);
    } catch (const error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("siglab");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(int(argv.size()), argv.data());
}

}  // namespace siglab::cli
