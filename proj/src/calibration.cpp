#include "siglab/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "siglab/errors.hpp"

namespace siglab::calib {

using dist::DistributionSpec;
using dist::Family;

const std::array<std::string, 6> DepartureGrid::labels = {
    "low", "medium", "high", "very-high", "extremely-high", "pathologically-high"};

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fallback concentration for supports too coarse to reach the target sd;
// numerically the p -> infinity Binomial(n, 1/2) limit.
constexpr double kIbbFallbackP = 1e6;

}  // namespace

double agn_max_skewness() {
    // xi -> infinity limit of the two-piece normal: the half-normal skewness.
    static const double value = [] {
        const double m1 = std::sqrt(2.0 / M_PI);
        const double var = 1.0 - m1 * m1;
        const double m3 = std::sqrt(2.0 / M_PI) * 2.0;  // E|Z|^3
        const double c3 = m3 - 3.0 * m1 * 1.0 + 2.0 * m1 * m1 * m1;
        return c3 / std::pow(var, 1.5);
    }();
    return value;
}

double bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                       double target, double xtol, const std::string& what) {
    if (!(lo < hi)) throw calibration_range_error(what + ": empty bracket");
    // 100-point monotonicity precheck of the objective over the bracket.
    constexpr int kGridPoints = 100;
    double prev = f(lo);
    int direction = 0;
    for (int i = 1; i < kGridPoints; ++i) {
        const double x = lo + (hi - lo) * double(i) / (kGridPoints - 1);
        const double y = f(x);
        if (y > prev) {
            if (direction < 0)
                throw calibration_range_error(what + ": objective not monotone on bracket near x=" +
                                              std::to_string(x));
            direction = 1;
        } else if (y < prev) {
            if (direction > 0)
                throw calibration_range_error(what + ": objective not monotone on bracket near x=" +
                                              std::to_string(x));
            direction = -1;
        }
        prev = y;
    }
    if (direction == 0) throw calibration_range_error(what + ": objective constant on bracket");

    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw calibration_range_error(what + ": target " + std::to_string(target) +
                                      " not bracketed (range [" + std::to_string(f(lo)) + ", " +
                                      std::to_string(f(hi)) + "])");
    double a = lo, b = hi;
    while (b - a > xtol) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;  // double resolution reached
        const double fm = f(mid) - target;
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            a = mid;
            flo = fm;
        } else {
            b = mid;
        }
    }
    return 0.5 * (a + b);
}

DistributionSpec calibrate_skewness(Family family, double target_gamma) {
    const bool reflect = target_gamma < 0.0;
    const double gamma = std::fabs(target_gamma);
    DistributionSpec spec;
    spec.family = family;
    if (family == Family::agn) {
        spec.nu = 2.0;
        if (gamma == 0.0) {
            spec.xi = 1.0;
        } else {
            if (gamma >= agn_max_skewness())
                throw calibration_range_error(
                    "calibrate_skewness(agn): target " + std::to_string(target_gamma) +
                    " exceeds the nu=2 family range (|skewness| < " +
                    std::to_string(agn_max_skewness()) + ")");
            spec.xi = bisect_monotone(
                [](double xi) { return dist::agn_moments(xi, 2.0).first; }, 1.0, 60.0, gamma,
                1e-10, "calibrate_skewness(agn)");
        }
        if (reflect) spec.xi = 1.0 / spec.xi;
    } else if (family == Family::tgh) {
        spec.h = 0.0;
        if (gamma == 0.0) {
            spec.g = 0.0;
        } else {
            spec.g = bisect_monotone(
                [](double g) { return dist::tgh_moments(g, 0.0).first; }, 0.0, 2.0, gamma, 1e-10,
                "calibrate_skewness(tgh)");
        }
        if (reflect) spec.g = -spec.g;
    } else {
        throw parameter_domain_error("calibrate_skewness: family must be agn or tgh");
    }
    return standardize(spec, 0.0, kTargetSd);
}

DistributionSpec calibrate_tails(Family family, double target_kappa) {
    DistributionSpec spec;
    spec.family = family;
    if (family == Family::sgn) {
        if (target_kappa <= -1.2 + 1e-15) {
            if (target_kappa < -1.2)
                throw calibration_range_error("calibrate_tails(sgn): kappa below the uniform cap -1.2");
            spec.beta = kInf;  // uniform limit
        } else if (target_kappa == 0.0) {
            spec.beta = 2.0;
        } else {
            // sgn kurtosis is strictly decreasing in beta
            spec.beta = bisect_monotone([](double b) { return dist::sgn_excess_kurtosis(b); }, 0.2,
                                        60.0, target_kappa, 1e-10, "calibrate_tails(sgn)");
        }
    } else if (family == Family::tgh) {
        spec.g = 0.0;
        if (target_kappa < 0.0)
            throw calibration_range_error("calibrate_tails(tgh): h>=0 cannot reach negative kappa");
        if (target_kappa == 0.0) {
            spec.h = 0.0;
        } else {
            spec.h = bisect_monotone(
                [](double h) { return dist::tgh_moments(0.0, h).second; }, 0.0, 0.2499, target_kappa,
                1e-12, "calibrate_tails(tgh)");
        }
    } else {
        throw parameter_domain_error("calibrate_tails: family must be sgn or tgh");
    }
    return standardize(spec, 0.0, kTargetSd);
}

DistributionSpec calibrate_ibb(const dist::MetricSupport& support, double target_sd) {
    if (!(target_sd > 0.0))
        throw calibration_range_error("calibrate_ibb: target sd must be positive");
    // sd is monotone decreasing in p: (1/sqrt(2k)-like infimum, max at p -> 0.
    const double p_lo = 1e-3, p_hi = kIbbFallbackP;
    const double sd_hi = dist::ibb_sd(support, p_lo);
    const double sd_lo = dist::ibb_sd(support, p_hi);
    if (target_sd < sd_lo || target_sd > sd_hi)
        throw calibration_range_error(
            "calibrate_ibb(" + dist::metric_name(support.metric, support.k) + "): target sd " +
            std::to_string(target_sd) + " outside attainable range [" + std::to_string(sd_lo) +
            ", " + std::to_string(sd_hi) + "]");
    // Bisect on log p for bracket conditioning; stop on the sd tolerance.
    double a = std::log(p_lo), b = std::log(p_hi);
    bisect_monotone([&](double lp) { return dist::ibb_sd(support, std::exp(lp)); }, a, b, target_sd,
                    1e-13, "calibrate_ibb");  // precheck + coarse solve
    // Refine until the achieved sd is within 1e-9 of the target.
    double p_final = 0.0;
    while (true) {
        const double mid = 0.5 * (a + b);
        const double sd = dist::ibb_sd(support, std::exp(mid));
        if (std::fabs(sd - target_sd) <= 1e-9 || b - a < 1e-14) {
            p_final = std::exp(mid);
            break;
        }
        if (sd > target_sd) a = mid;  // need larger p to shrink sd
        else b = mid;
    }
    DistributionSpec spec;
    spec.family = Family::ibb;
    spec.p = p_final;
    spec.support = std::make_shared<dist::MetricSupport>(support);
    spec.loc = 0.0;
    spec.scale = 1.0;
    return spec;
}

DistributionSpec standardize(DistributionSpec spec, double mean, double sd) {
    spec.validate();
    if (!(sd > 0.0)) throw parameter_domain_error("standardize: sd must be positive");
    if (spec.family == Family::ibb)
        throw parameter_domain_error(
            "standardize: IBB has a fixed support; standardize through calibrate_ibb");
    if (spec.family == Family::bimodal && !std::isfinite(spec.separation))
        throw degenerate_sample_error("standardize: degenerate spec");
    spec.loc = mean;
    spec.scale = sd;
    return spec;
}

namespace {

GridCell make_cell(std::string dimension, std::size_t level, std::string family, double target,
                   DistributionSpec spec) {
    GridCell cell;
    cell.dimension = std::move(dimension);
    cell.label = DepartureGrid::labels[level];
    cell.family = std::move(family);
    cell.target = target;
    cell.spec = std::move(spec);
    return cell;
}

}  // namespace

std::vector<GridCell> build_asymmetric_grid() {
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < DepartureGrid::asymmetry.size(); ++i) {
        const double gamma = DepartureGrid::asymmetry[i];
        if (gamma < agn_max_skewness()) {
            cells.push_back(make_cell("asymmetric", i, "agn", gamma,
                                      calibrate_skewness(Family::agn, gamma)));
        }
        cells.push_back(
            make_cell("asymmetric", i, "tgh", gamma, calibrate_skewness(Family::tgh, gamma)));
    }
    return cells;
}

std::vector<GridCell> build_heavy_grid() {
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < DepartureGrid::heavy_tails.size(); ++i) {
        const double kappa = DepartureGrid::heavy_tails[i];
        cells.push_back(make_cell("heavy", i, "sgn", kappa, calibrate_tails(Family::sgn, kappa)));
        cells.push_back(make_cell("heavy", i, "tgh", kappa, calibrate_tails(Family::tgh, kappa)));
    }
    return cells;
}

std::vector<GridCell> build_light_grid() {
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < DepartureGrid::light_tails.size(); ++i) {
        const double kappa = DepartureGrid::light_tails[i];
        cells.push_back(make_cell("light", i, "sgn", kappa, calibrate_tails(Family::sgn, kappa)));
    }
    return cells;
}

std::vector<GridCell> build_discrete_grid() {
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < DepartureGrid::discreteness.size(); ++i) {
        const int k = DepartureGrid::discreteness[i];
        for (const auto metric : {dist::Metric::precision_at_k, dist::Metric::reciprocal_rank_at_k}) {
            const auto support = dist::ibb_support(metric, k);
            GridCell cell;
            try {
                cell = make_cell("discrete", i, "ibb-" + dist::metric_name(metric, k), double(k),
                                 calibrate_ibb(support, kTargetSd));
                cell.achieved_sd = dist::ibb_sd(*cell.spec.support, cell.spec.p);
            } catch (const calibration_range_error&) {
                // Support too coarse for the target sd: fall back to the
                // binomial-limit concentration and record the achieved sd.
                DistributionSpec spec;
                spec.family = Family::ibb;
                spec.p = kIbbFallbackP;
                spec.support = std::make_shared<dist::MetricSupport>(support);
                cell = make_cell("discrete", i, "ibb-" + dist::metric_name(metric, k), double(k),
                                 std::move(spec));
                cell.sd_unattained = true;
                cell.achieved_sd = dist::ibb_sd(*cell.spec.support, cell.spec.p);
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::vector<GridCell> build_demo_grid() {
    std::vector<GridCell> cells;
    {
        GridCell c = make_cell("demo", 3, "tgh", 1.5, calibrate_skewness(Family::tgh, 1.5));
        c.dimension = "demo-asymmetric";
        cells.push_back(std::move(c));
    }
    {
        GridCell c = make_cell("demo", 4, "sgn", 15.0, calibrate_tails(Family::sgn, 15.0));
        c.dimension = "demo-heavy";
        cells.push_back(std::move(c));
    }
    {
        const auto support = dist::ibb_support(dist::Metric::precision_at_k, 10);
        DistributionSpec spec;
        spec.family = Family::ibb;
        spec.p = kIbbFallbackP;
        spec.support = std::make_shared<dist::MetricSupport>(support);
        GridCell c = make_cell("demo", 4, "ibb-P@10", 10.0, std::move(spec));
        c.dimension = "demo-discrete";
        c.sd_unattained = true;
        c.achieved_sd = dist::ibb_sd(*c.spec.support, c.spec.p);
        cells.push_back(std::move(c));
    }
    {
        DistributionSpec spec;
        spec.family = Family::bimodal;
        spec.separation = 3.0;
        spec = standardize(spec, 0.0, kTargetSd);
        GridCell c = make_cell("demo", 4, "bimodal", 3.0, std::move(spec));
        c.dimension = "demo-multimodal";
        cells.push_back(std::move(c));
    }
    return cells;
}

std::vector<GridCell> build_grid(const std::string& selection) {
    std::vector<GridCell> cells;
    auto append = [&cells](std::vector<GridCell> more) {
        for (auto& c : more) cells.push_back(std::move(c));
    };
    if (selection == "asymmetric" || selection == "all") append(build_asymmetric_grid());
    if (selection == "heavy" || selection == "all") append(build_heavy_grid());
    if (selection == "light" || selection == "all") append(build_light_grid());
    if (selection == "discrete" || selection == "all") append(build_discrete_grid());
    if (selection == "demo-table1") append(build_demo_grid());
    if (cells.empty())
        throw parse_error("unknown grid selection: " + selection +
                          " (expected all|asymmetric|heavy|light|discrete|demo-table1)");
    return cells;
}

std::string grid_to_csv(const std::vector<GridCell>& cells) {
    std::ostringstream os;
    os << "# siglab-grid v1\n";
    os << "dimension,label,family,target,parameters,achieved_moment,achieved_sd,sd_unattained\n";
    char buf[512];
    for (const auto& c : cells) {
        std::string params;
        double achieved = 0.0;
        const auto& s = c.spec;
        switch (s.family) {
            case Family::sgn:
                params = std::isinf(s.beta) ? "beta=inf" : "beta=" + std::to_string(s.beta);
                achieved = dist::sgn_excess_kurtosis(s.beta);
                break;
            case Family::agn:
                params = "xi=" + std::to_string(s.xi) + ";nu=" + std::to_string(s.nu);
                achieved = dist::agn_moments(s.xi, s.nu).first;
                break;
            case Family::tgh:
                params = "g=" + std::to_string(s.g) + ";h=" + std::to_string(s.h);
                achieved = (c.dimension == "heavy") ? dist::tgh_moments(s.g, s.h).second
                                                    : dist::tgh_moments(s.g, s.h).first;
                break;
            case Family::ibb:
                params = "p=" + std::to_string(s.p);
                achieved = c.achieved_sd;
                break;
            case Family::bimodal:
                params = "separation=" + std::to_string(s.separation);
                achieved = dist::theoretical_moments(s).excess_kurtosis;
                break;
            case Family::normal:
                params = "";
                achieved = 0.0;
                break;
        }
        std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.10g,%s,%.12g,%.12g,%d\n", c.dimension.c_str(),
                      c.label.c_str(), c.family.c_str(), c.target, params.c_str(), achieved,
                      c.achieved_sd, c.sd_unattained ? 1 : 0);
        os << buf;
    }
    return os.str();
}

}  // namespace siglab::calib
