// Score-matrix ingestion, paired differences, and moment diagnostics.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "siglab/random.hpp"
#include "siglab/stat_tests.hpp"

namespace siglab::ingest {

enum class MatrixFormat {
    auto_detect,   // wide when the first data line contains a comma
    wide_csv,      // header: topic column + system ids; one row per topic
    long_triplet,  // whitespace-separated lines: system topic score
};

// Topics x systems score matrix; rectangular, all scores finite.
struct ScoreMatrix {
    std::vector<std::string> topics;
    std::vector<std::string> systems;
    std::vector<std::vector<double>> scores;  // scores[topic][system]
    std::string metric;                       // free-form label

    double score(std::size_t topic, std::size_t system) const {
        return scores[topic][system];
    }
    void validate() const;  // rectangularity and finiteness
};

// Parse from text; line numbers in errors refer to the text's lines.
ScoreMatrix parse_score_matrix(const std::string& text,
                               MatrixFormat format = MatrixFormat::auto_detect);
ScoreMatrix load_score_matrix(const std::string& path,
                              MatrixFormat format = MatrixFormat::auto_detect);

// Wide-CSV serialization; load(save(m)) reproduces m exactly.
std::string to_wide_csv(const ScoreMatrix& matrix);
void save_wide_csv(const ScoreMatrix& matrix, const std::string& path);

struct SystemPair {
    std::string a;  // earlier system in input order
    std::string b;
    stat::PairedSample sample;  // D_i = score(a, i) - score(b, i)
};

// One PairedSample per unordered system pair, C(S,2) of them.
std::vector<SystemPair> paired_differences(const ScoreMatrix& matrix);

// Sample skewness and excess kurtosis from uncorrected central moments
// (g-statistics): g1 = m3/m2^{3/2}, g2 = m4/m2^2 - 3. Requires n >= 4.
std::pair<double, double> sample_moments(const stat::PairedSample& sample);

// Downsample without replacement / upsample with replacement to n_target.
stat::PairedSample resample_to_n(const stat::PairedSample& sample, int n_target,
                                 const RandomStream& stream);

struct DiagnoseOptions {
    double skew_flag_threshold = 0.5;
    stat::WilcoxonOptions wilcoxon;
};

struct DiagnosticReport {
    stat::TestResult t;
    stat::TestResult wilcoxon;
    double skewness = 0.0;
    double kurtosis = 0.0;
    bool asymmetry_flag = false;
    bool t_reject = false;
    bool wilcoxon_reject = false;
    std::string note;  // caution attached when the flag is raised
};

// Both tests plus moment diagnostics for one sample; throws
// degenerate_sample_error when the sample cannot support them.
DiagnosticReport diagnose(const stat::PairedSample& sample, double alpha,
                          const DiagnoseOptions& options = {});

// Per-pair diagnostics for a whole matrix, resampled to n_target when
// n_target > 0. Degenerate pairs are reported, not fatal.
struct PairDiagnostic {
    std::string pair;  // "a-vs-b"
    int n = 0;
    std::string resample_mode;  // none | downsample | upsample
    double skewness = 0.0;
    double kurtosis = 0.0;
    double t_p = 1.0;
    double wilcoxon_p = 1.0;
    bool asymmetry_flag = false;
    bool degenerate = false;
};

std::vector<PairDiagnostic> diagnose_matrix(const ScoreMatrix& matrix, int n_target, double alpha,
                                            const DiagnoseOptions& options,
                                            const RandomStream& stream);

// CSV: pair,n,resample_mode,skewness,kurtosis,t_p,wilcoxon_p,flag,degenerate
std::string diagnostics_csv(const std::vector<PairDiagnostic>& rows);

}  // namespace siglab::ingest
