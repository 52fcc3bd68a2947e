#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace coalweb {

// Summary of a replica-indexed sample.  std_error is the sample standard
// deviation over sqrt(n); the histogram is kept for integer-valued
// statistics (counts) and left empty otherwise.
struct StatSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double std_error = 0.0;
    std::map<long, std::size_t> histogram;

    // Empirical P(value >= k) from the histogram.
    double tail_prob(long k) const;
};

StatSummary summarize(const std::vector<double>& sample, bool integer_histogram = false);

double normal_cdf(double z);

// One-sample Kolmogorov-Smirnov distance against a continuous CDF.
double ks_vs_cdf(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov distance (atoms allowed).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace coalweb
