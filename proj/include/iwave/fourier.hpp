#pragma once

#include <complex>
#include <numbers>
#include <vector>

namespace iw {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// f(t) = a[0] + sum_{k>=1} a[k] cos(2 pi k t) + b[k] sin(2 pi k t), t in turns.
class TrigSeries {
public:
    TrigSeries() = default;
    TrigSeries(std::vector<double> cos_coef, std::vector<double> sin_coef);

    // packed layout [a0, a1, b1, a2, b2, ...]
    static TrigSeries from_packed(const std::vector<double>& packed);
    std::vector<double> packed() const;

    // Least-squares (= DFT) fit to M uniform samples f(j/M), keeping `modes` harmonics.
    static TrigSeries fit(const std::vector<double>& samples, int modes);

    int degree() const { return static_cast<int>(a_.size()) - 1; }
    bool empty() const { return a_.empty(); }
    const std::vector<double>& cos_coef() const { return a_; }
    const std::vector<double>& sin_coef() const { return b_; }

    double eval(double t, int order = 0) const;
    cplx eval(cplx t, int order = 0) const;
    // out[m] = f^{(m)}(t) for m = 0..max_order
    void eval_all(double t, int max_order, double* out) const;
    void eval_all(cplx t, int max_order, cplx* out) const;

    double max_abs_coef_tail(int from_mode) const;
    TrigSeries truncated(int modes) const;
    TrigSeries shifted(double c) const;  // t -> f(t + c)
    TrigSeries derivative() const;

    TrigSeries operator+(const TrigSeries& o) const;
    TrigSeries operator*(double s) const;

private:
    std::vector<double> a_;
    std::vector<double> b_;
};

}  // namespace iw
