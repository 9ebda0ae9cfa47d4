#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace churnsim {

inline constexpr double kNotMeasured = std::numeric_limits<double>::quiet_NaN();

/// One row per (run, round). Columns that do not apply to the running
/// protocol are NaN and print as `nan`.
struct MetricsRow {
    std::string run_id;
    std::uint64_t seed = 0;
    std::uint32_t round = 0;
    double coverage = kNotMeasured;
    double agree_fraction = kNotMeasured;
    double undecided_fraction = kNotMeasured;
    double n_hat_median = kNotMeasured;
    double spectral_gap = kNotMeasured;
    std::uint64_t bits_sent = 0;
};

using MetricsSeries = std::vector<MetricsRow>;

/// Fixed column order; the header is always written.
inline constexpr const char* kMetricsHeader =
    "run_id,seed,round,coverage,agree_fraction,undecided_fraction,n_hat_median,spectral_gap,"
    "bits_sent";

/// Real number with 17 significant digits.
std::string format_real(double x);

void write_metrics_csv(std::ostream& out, const MetricsSeries& rows);

double median(std::vector<double> values);

}  // namespace churnsim
