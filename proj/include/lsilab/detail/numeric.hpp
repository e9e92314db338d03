#pragma once

#include <cmath>
#include <span>

namespace lsilab::detail {

// Compensated accumulator (Neumaier variant of Kahan summation). Mass and
// moment bookkeeping has to stay well below the 1e-12 tolerances even for
// grids with ~1e5 points, which plain left-to-right summation does not
// guarantee.
class NeumaierAcc {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }

    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double neumaier_sum(std::span<const double> xs) {
    NeumaierAcc acc;
    for (double x : xs) acc.add(x);
    return acc.value();
}

}  // namespace lsilab::detail
