#pragma once

#include <cmath>
#include <stdexcept>

namespace fracalc {

/// A validated fractional order alpha > 0 together with its decomposition
/// alpha = (m-1) + sigma, m = ceil(alpha), sigma in (0, 1].
///
/// sigma == 1 exactly when alpha is a positive integer; operations that are
/// only defined for non-integer orders must check is_integer().
class FracOrder {
public:
    explicit FracOrder(double alpha) : alpha_(alpha) {
        if (!std::isfinite(alpha) || alpha <= 0.0) {
            throw std::domain_error("FracOrder: alpha must be finite and > 0");
        }
        m_ = static_cast<int>(std::ceil(alpha));
        sigma_ = alpha - static_cast<double>(m_ - 1);
    }

    double value() const { return alpha_; }
    int m() const { return m_; }
    double sigma() const { return sigma_; }
    bool is_integer() const { return sigma_ == 1.0; }

private:
    double alpha_;
    int m_;
    double sigma_;
};

} // namespace fracalc
