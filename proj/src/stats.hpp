#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace fpt::stats {

struct MeanStderr {
  double mean;
  double stderr_;
  std::int64_t count;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

// Wilson score interval for a binomial proportion.
struct Interval {
  double lo;
  double hi;
};
Interval wilson(std::int64_t successes, std::int64_t trials, double z = 1.96);

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
// Sorts a copy of the samples.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// Asymptotic critical value of the one-sample KS statistic at significance
// `alpha` for n samples (e.g. 1.628/sqrt(n) at the 1% level).
double ks_critical_value(std::int64_t n, double alpha);

// Two-sample KS test; returns the asymptotic p-value. Ties are allowed
// (samples are treated as coming from step CDFs), which makes the test
// conservative for integer-valued data.
double ks_two_sample_pvalue(std::vector<double> xs, std::vector<double> ys);

// Least-squares slope and intercept of y against x.
struct LineFit {
  double slope;
  double intercept;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fpt::stats
