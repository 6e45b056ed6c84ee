#pragma once

#include <cmath>
#include <cstdint>

namespace hotspot {

/// Online mean/variance accumulator (Welford). Variance is the sample
/// variance m2/(n-1), undefined for n < 2.
class RunningStats {
  public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    /// Pooled combination of two accumulators (Chan et al.).
    void merge(const RunningStats& o) {
        if (o.n_ == 0) return;
        if (n_ == 0) { *this = o; return; }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double delta = o.mean_ - mean_;
        const double nt = na + nb;
        mean_ += delta * nb / nt;
        m2_ += o.m2_ + delta * delta * na * nb / nt;
        n_ += o.n_;
    }

    std::uint64_t count() const { return n_; }
    double mean() const { return mean_; }
    double m2() const { return m2_; }
    double variance() const { return n_ >= 2 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }

    void set_raw(std::uint64_t n, double mean, double m2) {
        n_ = n;
        mean_ = mean;
        m2_ = m2;
    }

  private:
    std::uint64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace hotspot
