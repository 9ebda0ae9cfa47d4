#include "churnsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace churnsim {

std::string format_real(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_metrics_csv(std::ostream& out, const MetricsSeries& rows) {
    out << kMetricsHeader << '\n';
    for (const auto& r : rows) {
        out << r.run_id << ',' << r.seed << ',' << r.round << ',' << format_real(r.coverage) << ','
            << format_real(r.agree_fraction) << ',' << format_real(r.undecided_fraction) << ','
            << format_real(r.n_hat_median) << ',' << format_real(r.spectral_gap) << ','
            << r.bits_sent << '\n';
    }
}

double median(std::vector<double> values) {
    if (values.empty()) {
        return kNotMeasured;
    }
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

}  // namespace churnsim
