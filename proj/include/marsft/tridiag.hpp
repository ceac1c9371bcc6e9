#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace marsft {

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Square tridiagonal matrix. lower[i] = A(i, i-1) (lower[0] unused),
/// upper[i] = A(i, i+1) (upper[n-1] unused).
template <typename T>
struct Tridiagonal {
    std::vector<T> lower, diag, upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n, T{}), diag(n, T{}), upper(n, T{}) {}

    std::size_t size() const noexcept { return diag.size(); }

    /// y = A x
    std::vector<T> apply(std::span<const T> x) const {
        const std::size_t n = size();
        std::vector<T> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            T s = diag[i] * x[i];
            if (i > 0) s += lower[i] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

/// Thomas elimination factored once, reused across right-hand sides. No pivoting.
template <typename T>
class ThomasFactor {
public:
    explicit ThomasFactor(const Tridiagonal<T>& a) : lower_(a.lower), cprime_(a.size()), pivot_(a.size()) {
        const std::size_t n = a.size();
        if (n == 0) throw SingularSystem("empty system");
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            scale = std::max({scale, std::abs(a.diag[i]), std::abs(a.lower[i]), std::abs(a.upper[i])});
        const double tiny = scale * 1e-300 + 1e-300;

        pivot_[0] = a.diag[0];
        if (std::abs(pivot_[0]) <= tiny) throw SingularSystem("zero pivot in row 0");
        cprime_[0] = n > 1 ? a.upper[0] / pivot_[0] : T{};
        for (std::size_t i = 1; i < n; ++i) {
            pivot_[i] = a.diag[i] - a.lower[i] * cprime_[i - 1];
            if (!(std::abs(pivot_[i]) > tiny)) throw SingularSystem("zero pivot in row " + std::to_string(i));
            cprime_[i] = i + 1 < n ? a.upper[i] / pivot_[i] : T{};
        }
    }

    /// Solves A x = b in place.
    void solve(std::span<T> b) const {
        const std::size_t n = pivot_.size();
        b[0] /= pivot_[0];
        for (std::size_t i = 1; i < n; ++i) b[i] = (b[i] - lower_[i] * b[i - 1]) / pivot_[i];
        for (std::size_t i = n - 1; i-- > 0;) b[i] -= cprime_[i] * b[i + 1];
    }

private:
    std::vector<T> lower_, cprime_, pivot_;
};

}  // namespace marsft
