#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace kinetic {

// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Mean, variance and the standard error of both, folded in insertion order.
class RunningStats {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance.
  double variance() const;
  double standard_error() const;
  // Large-sample standard error of the sample variance, sqrt((m4 - s^4)/n).
  double variance_standard_error() const;
  double kurtosis() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double m3_ = 0.0;
  double m4_ = 0.0;
};

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  double variance = 0.0;
  double variance_standard_error = 0.0;
  std::size_t n = 0;
};

MeanEstimate estimate_mean(std::span<const double> values);

// Linear-interpolated quantile (type 7) of an unsorted sample; q in [0, 1].
double quantile(std::vector<double> values, double q);
double median(std::vector<double> values);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// 95% asymptotic critical value of the two-sample KS statistic.
double ks_critical_95(std::size_t n, std::size_t m);

// Two intervals mean +- z*se overlap.
bool intervals_overlap(double m1, double se1, double m2, double se2, double z);

inline constexpr double kZ99 = 2.5758293035489004;

}  // namespace kinetic
