#include "skewlab/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skewlab {

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty sample");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + mid);
    return 0.5 * (lo + hi);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double kolmogorov_critical(double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("kolmogorov_critical: level outside (0, 1)");
    return std::sqrt(-0.5 * std::log(level / 2.0));
}

double ks_critical_one_sample(double level, std::size_t n) {
    return kolmogorov_critical(level) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(double level, std::size_t n, std::size_t m) {
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return kolmogorov_critical(level) * std::sqrt((nn + mm) / (nn * mm));
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf,
                     double lattice_spacing) {
    if (sample.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    const double half = 0.5 * lattice_spacing;
    double d = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        std::size_t j = i;
        while (j < sample.size() && sample[j] == sample[i]) ++j;
        const double below = static_cast<double>(i) / n;  // F_n just left of the point
        const double at = static_cast<double>(j) / n;     // F_n at the point
        d = std::max(d, std::fabs(below - cdf(sample[i] - half)));
        d = std::max(d, std::fabs(at - cdf(sample[i] + half)));
        i = j;
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i] <= b[j])) x = a[i];
        else x = b[j];
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double snap_to_lattice(double x, double spacing, double offset) {
    if (!(spacing > 0.0)) return x;
    return offset + spacing * std::round((x - offset) / spacing);
}

double standard_normal_cdf(double x) {
    static const boost::math::normal_distribution<double> nd(0.0, 1.0);
    return boost::math::cdf(nd, x);
}

}  // namespace skewlab
