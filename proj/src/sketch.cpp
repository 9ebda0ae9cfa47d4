#include "churnsim/sketch.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

namespace churnsim {

Eigen::Index default_sketch_k(std::uint64_t n, double relative_error) {
    const double k = std::ceil(8.0 * std::log(static_cast<double>(std::max<std::uint64_t>(n, 1))) /
                               (relative_error * relative_error));
    return std::max<Eigen::Index>(2, static_cast<Eigen::Index>(k));
}

void write_sketch(std::ostream& out, const SizeSketch& s) {
    out << s.k() << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < s.k(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", s[i]);
        out << buf << '\n';
    }
}

SizeSketch read_sketch(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::ParseError, "sketch: missing k header");
    }
    char* end = nullptr;
    const long long k = std::strtoll(line.c_str(), &end, 10);
    if (end == line.c_str() || *end != '\0' || k < 2) {
        throw Error(ErrorCode::ParseError, "sketch: bad k header `" + line + "`");
    }
    SizeSketch::Minima minima(k);
    for (long long i = 0; i < k; ++i) {
        if (!std::getline(in, line)) {
            throw Error(ErrorCode::ParseError, "sketch: expected " + std::to_string(k) + " entries");
        }
        const double x = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || *end != '\0' || !(x > 0)) {
            throw Error(ErrorCode::ParseError, "sketch line " + std::to_string(i + 2));
        }
        minima[i] = x;
    }
    return SizeSketch(std::move(minima));
}

}  // namespace churnsim
