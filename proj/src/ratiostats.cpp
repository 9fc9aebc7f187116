#include "wattbench/ratiostats.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "wattbench/error.hpp"

namespace wattbench::ratiostats {

std::string_view metric_name(Metric m) noexcept {
    switch (m) {
    case Metric::Time: return "time";
    case Metric::Cpu: return "cpu";
    case Metric::Energy: return "energy";
    case Metric::Vms: return "vms";
    case Metric::Rss: return "rss";
    case Metric::Swap: return "swap";
    }
    return "?";
}

std::optional<Metric> parse_metric(std::string_view s) noexcept {
    for (auto m : kAllMetrics)
        if (metric_name(m) == s) return m;
    return std::nullopt;
}

std::string_view classification_name(Classification c) noexcept {
    switch (c) {
    case Classification::NogilLower: return "NOGIL_LOWER";
    case Classification::NogilHigher: return "NOGIL_HIGHER";
    case Classification::Indistinguishable: return "INDISTINGUISHABLE";
    }
    return "?";
}

std::optional<Classification> parse_classification(std::string_view s) noexcept {
    for (auto c : {Classification::NogilLower, Classification::NogilHigher, Classification::Indistinguishable})
        if (classification_name(c) == s) return c;
    return std::nullopt;
}

double per_run_ratio(double x_nogil, double x_gil) {
    if (!(x_nogil > 0.0) || !(x_gil > 0.0) || !std::isfinite(x_nogil) || !std::isfinite(x_gil)) {
        throw Error(Errc::NonPositiveInput, fmt::format("ratio needs positive inputs, got {} / {}", x_nogil, x_gil));
    }
    return x_nogil / x_gil;
}

namespace {

// Continued fraction for the regularized incomplete beta function
// (modified Lentz). Converges quickly for x < (a + 1) / (a + b + 2).
double beta_cf(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 100000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) break;
    }
    return h;
}

// ln(Gamma(a + 1/2) / Gamma(a)); the asymptotic series avoids cancelling
// two huge lgamma values.
double log_gamma_ratio_half(double a) {
    if (a < 30.0) return std::lgamma(a + 0.5) - std::lgamma(a);
    const double r = 1.0 / a, r2 = r * r;
    return 0.5 * std::log(a) +
           r * (-1.0 / 8.0 + r2 * (1.0 / 192.0 + r2 * (-1.0 / 640.0 + r2 * (17.0 / 14336.0 - r2 * 31.0 / 18432.0))));
}

// -ln B(a, b)
double log_inv_beta(double a, double b) {
    if (b == 0.5) return log_gamma_ratio_half(a) - std::lgamma(0.5);
    if (a == 0.5) return log_gamma_ratio_half(b) - std::lgamma(0.5);
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

// I_x(a, b), with y = 1 - x passed separately so callers can supply it
// without cancellation.
double reg_inc_beta(double a, double b, double x, double y) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_x = x < 0.5 ? std::log(x) : std::log1p(-y);
    const double log_y = y < 0.5 ? std::log(y) : std::log1p(-x);
    const double log_front = log_inv_beta(a, b) + a * log_x + b * log_y;
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, y) / b;
}

// P(T > t) for t >= 0.
double upper_tail(double t, double dof) {
    const double t2 = t * t;
    const double x = dof / (dof + t2);
    const double y = t2 / (dof + t2);
    return 0.5 * reg_inc_beta(0.5 * dof, 0.5, x, y);
}

double t_pdf(double t, double dof) {
    const double log_norm = log_gamma_ratio_half(0.5 * dof) - 0.5 * std::log(dof * M_PI);
    return std::exp(log_norm - 0.5 * (dof + 1.0) * std::log1p(t * t / dof));
}

}  // namespace

double student_t_cdf(double t, double dof) {
    if (!(dof > 0.0)) throw Error(Errc::InvalidDof, fmt::format("degrees of freedom must be positive, got {}", dof));
    if (std::isnan(t)) return t;
    return t >= 0.0 ? 1.0 - upper_tail(t, dof) : upper_tail(-t, dof);
}

double t_quantile(double p, double dof) {
    if (!(dof >= 1.0) || !std::isfinite(dof)) {
        throw Error(Errc::InvalidDof, fmt::format("degrees of freedom must be >= 1, got {}", dof));
    }
    if (!(p > 0.0 && p < 1.0)) {
        throw Error(Errc::NonPositiveInput, fmt::format("probability must lie in (0, 1), got {}", p));
    }
    if (p == 0.5) return 0.0;
    if (p < 0.5) return -t_quantile(1.0 - p, dof);

    // Solve upper_tail(t) = q on t > 0; upper_tail is strictly decreasing.
    const double q = 1.0 - p;
    double lo = 0.0, hi = 1.0;
    while (upper_tail(hi, dof) > q) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) return std::numeric_limits<double>::infinity();
    }
    // Newton steps, falling back to bisection whenever a step leaves the bracket.
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
        const double f = upper_tail(t, dof) - q;
        if (f == 0.0) return t;
        if (f > 0.0) lo = t; else hi = t;
        const double step = f / t_pdf(t, dof);  // d(upper_tail)/dt = -pdf
        double next = t + step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * t) return next;
        t = next;
    }
    return t;
}

Classification classify(double ci_low, double ci_high) noexcept {
    if (ci_high < 1.0) return Classification::NogilLower;
    if (ci_low > 1.0) return Classification::NogilHigher;
    return Classification::Indistinguishable;
}

RatioSummary aggregate(const PairedSeries& series, double confidence) {
    const std::size_t n = series.n();
    if (n < 2) {
        throw Error(Errc::InsufficientPairs,
                    fmt::format("{}/{}/{}: {} valid pair(s), need at least 2", series.scenario, series.param,
                                metric_name(series.metric), n));
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw Error(Errc::NonPositiveInput, fmt::format("confidence must lie in (0, 1), got {}", confidence));
    }

    // ln(a) - ln(b) rather than ln(a / b): swapping every pair then negates
    // each log-ratio exactly.
    std::vector<double> logs;
    logs.reserve(n);
    for (const auto& [x_nogil, x_gil] : series.pairs) {
        per_run_ratio(x_nogil, x_gil);
        logs.push_back(std::log(x_nogil) - std::log(x_gil));
    }

    // Shifted two-pass moments: identical inputs give exactly zero spread.
    const double shift = logs.front();
    double sum = 0.0;
    for (double l : logs) sum += l - shift;
    const double mean_dev = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double l : logs) {
        const double d = (l - shift) - mean_dev;
        ss += d * d;
    }

    RatioSummary s;
    s.n = n;
    s.mean_log = shift + mean_dev;
    s.sd_log = std::sqrt(ss / static_cast<double>(n - 1));
    const double se = s.sd_log / std::sqrt(static_cast<double>(n));
    const double half = t_quantile(0.5 + 0.5 * confidence, static_cast<double>(n - 1)) * se;
    s.r_geo = std::exp(s.mean_log);
    s.ci_low = std::exp(s.mean_log - half);
    s.ci_high = std::exp(s.mean_log + half);
    s.classification = classify(s);
    return s;
}

}  // namespace wattbench::ratiostats
