#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wattbench::ratiostats {

enum class Metric { Time, Cpu, Energy, Vms, Rss, Swap };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::Time, Metric::Cpu, Metric::Energy,
                                                      Metric::Vms,  Metric::Rss, Metric::Swap};

std::string_view metric_name(Metric m) noexcept;  // "time", "cpu", ...
std::optional<Metric> parse_metric(std::string_view s) noexcept;

/// Direction of the candidate build relative to the baseline, read off the
/// confidence interval: entirely below 1, entirely above 1, or straddling it.
enum class Classification { NogilLower, NogilHigher, Indistinguishable };

std::string_view classification_name(Classification c) noexcept;  // "NOGIL_LOWER", ...
std::optional<Classification> parse_classification(std::string_view s) noexcept;

/// Matched (candidate, baseline) measurements of one metric at one
/// parameter point; pairs[i] comes from repetition i of both builds.
struct PairedSeries {
    std::string scenario;
    std::string param;
    Metric metric = Metric::Time;
    std::vector<std::pair<double, double>> pairs;  // (x_nogil, x_gil), both > 0

    std::size_t n() const noexcept { return pairs.size(); }
};

struct RatioSummary {
    double r_geo = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    std::size_t n = 0;
    double mean_log = 0.0;
    double sd_log = 0.0;
    Classification classification = Classification::Indistinguishable;
};

/// x_nogil / x_gil. Throws Errc::NonPositiveInput unless both are finite and > 0.
double per_run_ratio(double x_nogil, double x_gil);

/// CDF of Student's t distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

/// Inverse of student_t_cdf. Throws Errc::InvalidDof for dof < 1 and
/// Errc::NonPositiveInput for p outside (0, 1).
double t_quantile(double p, double dof);

/// Geometric-mean ratio with a Student-t interval built in log space:
/// L_i = ln R_i, mean and sample standard deviation (n - 1) of L, SE = s/sqrt(n),
/// CI = exp(mean -/+ t_{(1+confidence)/2, n-1} * SE).
/// Throws Errc::InsufficientPairs for n < 2 and Errc::NonPositiveInput for
/// a non-positive component.
RatioSummary aggregate(const PairedSeries& series, double confidence = 0.95);

Classification classify(double ci_low, double ci_high) noexcept;
inline Classification classify(const RatioSummary& s) noexcept { return classify(s.ci_low, s.ci_high); }

/// Point estimate and interval of one analysis cell as stored on disk.
struct Estimate {
    double r_geo = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    Classification classification = Classification::Indistinguishable;
};

/// One (scenario, param, metric) cell of an analysis. `estimate` is empty
/// when fewer than two valid pairs were available.
struct CellSummary {
    std::string scenario;
    std::string param;
    Metric metric = Metric::Time;
    std::size_t n = 0;
    std::optional<Estimate> estimate;
};

inline Estimate to_estimate(const RatioSummary& s) {
    return {s.r_geo, s.ci_low, s.ci_high, s.classification};
}

}  // namespace wattbench::ratiostats
