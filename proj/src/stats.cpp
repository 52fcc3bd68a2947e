#include "coalweb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coalweb {

double StatSummary::tail_prob(long k) const {
    if (n == 0) return 0.0;
    std::size_t c = 0;
    for (const auto& [v, cnt] : histogram)
        if (v >= k) c += cnt;
    return static_cast<double>(c) / static_cast<double>(n);
}

StatSummary summarize(const std::vector<double>& sample, bool integer_histogram) {
    StatSummary s;
    s.n = sample.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : sample) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : sample) ss += (v - s.mean) * (v - s.mean);
    if (s.n > 1)
        s.std_error = std::sqrt(ss / static_cast<double>(s.n - 1)) /
                      std::sqrt(static_cast<double>(s.n));
    if (integer_histogram)
        for (double v : sample) ++s.histogram[static_cast<long>(std::llround(v))];
    return s;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double ks_vs_cdf(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_vs_cdf: empty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        std::size_t j = i;
        while (j < sample.size() && sample[j] == sample[i]) ++j;
        double f = cdf(sample[i]);
        d = std::max(d, std::fabs(static_cast<double>(i) / n - f));  // just below the atom
        d = std::max(d, std::fabs(static_cast<double>(j) / n - f));  // at the atom
        i = j;
    }
    return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() || ib < b.size()) {
        double x = (ia < a.size() && (ib >= b.size() || a[ia] <= b[ib])) ? a[ia] : b[ib];
        while (ia < a.size() && a[ia] == x) ++ia;
        while (ib < b.size() && b[ib] == x) ++ib;
        d = std::max(d, std::fabs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    return d;
}

}  // namespace coalweb
