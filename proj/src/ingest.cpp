#include "siglab/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "siglab/errors.hpp"

namespace siglab::ingest {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_score(const std::string& token, long line) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &pos);
    } catch (const std::exception&) {
        throw parse_error("non-numeric score '" + token + "'", line);
    }
    if (pos != token.size()) throw parse_error("non-numeric score '" + token + "'", line);
    if (!std::isfinite(value)) throw parse_error("non-finite score '" + token + "'", line);
    return value;
}

ScoreMatrix parse_wide(const std::vector<std::string>& lines) {
    std::size_t header_at = 0;
    while (header_at < lines.size() && trim(lines[header_at]).empty()) ++header_at;
    if (header_at == lines.size()) throw parse_error("empty score matrix");
    const auto header = split_csv(lines[header_at]);
    if (header.size() < 2)
        throw parse_error("wide CSV header needs a topic column plus system ids",
                          long(header_at + 1));
    ScoreMatrix m;
    m.systems.assign(header.begin() + 1, header.end());
    for (std::size_t s = 0; s < m.systems.size(); ++s) {
        if (m.systems[s].empty())
            throw parse_error("empty system id in header", long(header_at + 1));
        for (std::size_t s2 = s + 1; s2 < m.systems.size(); ++s2)
            if (m.systems[s] == m.systems[s2])
                throw duplicate_key_error("system '" + m.systems[s] + "' appears twice in header");
    }
    for (std::size_t i = header_at + 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto cells = split_csv(lines[i]);
        const std::string topic = cells.empty() ? "" : cells[0];
        if (cells.size() != header.size())
            throw ragged_input_error("topic '" + topic + "' has " +
                                     std::to_string(cells.size() - 1) + " scores, expected " +
                                     std::to_string(m.systems.size()) + " (line " +
                                     std::to_string(i + 1) + ")");
        if (std::find(m.topics.begin(), m.topics.end(), topic) != m.topics.end())
            throw duplicate_key_error("topic '" + topic + "' appears twice");
        m.topics.push_back(topic);
        std::vector<double> row(m.systems.size());
        for (std::size_t s = 0; s < m.systems.size(); ++s)
            row[s] = parse_score(cells[s + 1], long(i + 1));
        m.scores.push_back(std::move(row));
    }
    if (m.topics.empty()) throw parse_error("wide CSV has no topic rows");
    return m;
}

ScoreMatrix parse_long(const std::vector<std::string>& lines) {
    struct Entry {
        double score;
        long line;
    };
    std::map<std::string, std::size_t> system_index, topic_index;
    std::vector<std::string> systems, topics;
    std::map<std::pair<std::size_t, std::size_t>, Entry> cells;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = trim(lines[i]);
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string system, topic, score_token, extra;
        if (!(in >> system >> topic >> score_token))
            throw parse_error("expected 'system topic score'", long(i + 1));
        if (in >> extra) throw parse_error("trailing token '" + extra + "'", long(i + 1));
        const double score = parse_score(score_token, long(i + 1));
        auto [sit, s_new] = system_index.try_emplace(system, systems.size());
        if (s_new) systems.push_back(system);
        auto [tit, t_new] = topic_index.try_emplace(topic, topics.size());
        if (t_new) topics.push_back(topic);
        const auto key = std::make_pair(sit->second, tit->second);
        if (!cells.try_emplace(key, Entry{score, long(i + 1)}).second)
            throw duplicate_key_error("duplicate (system, topic) pair ('" + system + "', '" +
                                      topic + "') at line " + std::to_string(i + 1));
    }
    if (cells.empty()) throw parse_error("empty score matrix");

    ScoreMatrix m;
    m.systems = systems;
    m.topics = topics;
    m.scores.assign(topics.size(), std::vector<double>(systems.size()));
    for (std::size_t t = 0; t < topics.size(); ++t)
        for (std::size_t s = 0; s < systems.size(); ++s) {
            const auto it = cells.find({s, t});
            if (it == cells.end())
                throw ragged_input_error("topic '" + topics[t] + "' is missing for system '" +
                                         systems[s] + "'");
            m.scores[t][s] = it->second.score;
        }
    return m;
}

}  // namespace

void ScoreMatrix::validate() const {
    if (topics.empty() || systems.empty()) throw parse_error("empty score matrix");
    if (scores.size() != topics.size())
        throw ragged_input_error("row count does not match topic count");
    for (std::size_t t = 0; t < scores.size(); ++t) {
        if (scores[t].size() != systems.size())
            throw ragged_input_error("topic '" + topics[t] + "' row width mismatch");
        for (double v : scores[t])
            if (!std::isfinite(v))
                throw parse_error("non-finite score for topic '" + topics[t] + "'");
    }
}

ScoreMatrix parse_score_matrix(const std::string& text, MatrixFormat format) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);

    if (format == MatrixFormat::auto_detect) {
        format = MatrixFormat::long_triplet;
        for (const auto& l : lines) {
            if (trim(l).empty()) continue;
            format = l.find(',') != std::string::npos ? MatrixFormat::wide_csv
                                                      : MatrixFormat::long_triplet;
            break;
        }
    }
    ScoreMatrix m =
        format == MatrixFormat::wide_csv ? parse_wide(lines) : parse_long(lines);
    m.validate();
    return m;
}

ScoreMatrix load_score_matrix(const std::string& path, MatrixFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_score_matrix(buf.str(), format);
}

std::string to_wide_csv(const ScoreMatrix& matrix) {
    matrix.validate();
    std::string out = "topic";
    for (const auto& s : matrix.systems) out += "," + s;
    out += "\n";
    char buf[64];
    for (std::size_t t = 0; t < matrix.topics.size(); ++t) {
        out += matrix.topics[t];
        for (std::size_t s = 0; s < matrix.systems.size(); ++s) {
            std::snprintf(buf, sizeof(buf), ",%.17g", matrix.scores[t][s]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void save_wide_csv(const ScoreMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parse_error("cannot write '" + path + "'");
    out << to_wide_csv(matrix);
}

std::vector<SystemPair> paired_differences(const ScoreMatrix& matrix) {
    matrix.validate();
    if (matrix.systems.size() < 2)
        throw insufficient_systems_error("pairing needs at least 2 systems, got " +
                                         std::to_string(matrix.systems.size()));
    std::vector<SystemPair> pairs;
    pairs.reserve(matrix.systems.size() * (matrix.systems.size() - 1) / 2);
    for (std::size_t a = 0; a < matrix.systems.size(); ++a) {
        for (std::size_t b = a + 1; b < matrix.systems.size(); ++b) {
            SystemPair p;
            p.a = matrix.systems[a];
            p.b = matrix.systems[b];
            p.sample.values.reserve(matrix.topics.size());
            for (std::size_t t = 0; t < matrix.topics.size(); ++t)
                p.sample.values.push_back(matrix.scores[t][a] - matrix.scores[t][b]);
            pairs.push_back(std::move(p));
        }
    }
    return pairs;
}

std::pair<double, double> sample_moments(const stat::PairedSample& sample) {
    sample.validate();
    const std::size_t n = sample.n();
    if (n < 4) throw parameter_domain_error("sample_moments: need n >= 4");
    double mean = 0.0;
    for (double v : sample.values) mean += v;
    mean /= double(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : sample.values) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);
    if (!(m2 > 0.0)) throw degenerate_sample_error("sample_moments: zero variance");
    return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

stat::PairedSample resample_to_n(const stat::PairedSample& sample, int n_target,
                                 const RandomStream& stream) {
    if (sample.values.empty()) throw degenerate_sample_error("resample_to_n: empty sample");
    if (n_target < 1) throw parameter_domain_error("resample_to_n: n_target must be >= 1");
    const int n = int(sample.n());
    if (n == n_target) return sample;
    auto eng = stream.engine();
    stat::PairedSample out;
    out.values.reserve(std::size_t(n_target));
    if (n > n_target) {
        std::sample(sample.values.begin(), sample.values.end(), std::back_inserter(out.values),
                    n_target, eng);
    } else {
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (int i = 0; i < n_target; ++i) out.values.push_back(sample.values[pick(eng)]);
    }
    return out;
}

DiagnosticReport diagnose(const stat::PairedSample& sample, double alpha,
                          const DiagnoseOptions& options) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw parameter_domain_error("diagnose: alpha must be in (0,1)");
    DiagnosticReport report;
    std::tie(report.skewness, report.kurtosis) = sample_moments(sample);
    report.t = stat::t_test(sample);
    report.wilcoxon = stat::wilcoxon_test(sample, options.wilcoxon);
    report.t_reject = report.t.p_value < alpha;
    report.wilcoxon_reject = report.wilcoxon.p_value < alpha;
    report.asymmetry_flag = std::fabs(report.skewness) > options.skew_flag_threshold;
    if (report.asymmetry_flag)
        report.note = "asymmetry flag: |sample skewness| exceeds " +
                      std::to_string(options.skew_flag_threshold) +
                      "; the Wilcoxon p-value conflates location and symmetry";
    return report;
}

std::vector<PairDiagnostic> diagnose_matrix(const ScoreMatrix& matrix, int n_target, double alpha,
                                            const DiagnoseOptions& options,
                                            const RandomStream& stream) {
    const auto pairs = paired_differences(matrix);
    std::vector<PairDiagnostic> rows;
    rows.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        PairDiagnostic row;
        row.pair = pairs[i].a + "-vs-" + pairs[i].b;
        stat::PairedSample sample = pairs[i].sample;
        row.resample_mode = "none";
        if (n_target > 0 && int(sample.n()) != n_target) {
            row.resample_mode = int(sample.n()) > n_target ? "downsample" : "upsample";
            sample = resample_to_n(sample, n_target, stream.child(i));
        }
        row.n = int(sample.n());
        try {
            const auto report = diagnose(sample, alpha, options);
            row.skewness = report.skewness;
            row.kurtosis = report.kurtosis;
            row.t_p = report.t.p_value;
            row.wilcoxon_p = report.wilcoxon.p_value;
            row.asymmetry_flag = report.asymmetry_flag;
        } catch (const degenerate_sample_error&) {
            row.degenerate = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string diagnostics_csv(const std::vector<PairDiagnostic>& rows) {
    std::string out = "# siglab-diagnostics v1\n";
    out += "pair,n,resample_mode,skewness,kurtosis,t_p,wilcoxon_p,flag,degenerate\n";
    char buf[160];
    for (const auto& r : rows) {
        if (r.degenerate) {
            std::snprintf(buf, sizeof(buf), ",%d,%s,,,,,%d,1\n", r.n, r.resample_mode.c_str(),
                          r.asymmetry_flag ? 1 : 0);
        } else {
            std::snprintf(buf, sizeof(buf), ",%d,%s,%.6g,%.6g,%.6g,%.6g,%d,0\n", r.n,
                          r.resample_mode.c_str(), r.skewness, r.kurtosis, r.t_p, r.wilcoxon_p,
                          r.asymmetry_flag ? 1 : 0);
        }
        out += r.pair + buf;
    }
    return out;
}

}  // namespace siglab::ingest
