#include "iwave/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iw {

TrigSeries::TrigSeries(std::vector<double> cos_coef, std::vector<double> sin_coef)
    : a_(std::move(cos_coef)), b_(std::move(sin_coef)) {
    const std::size_t n = std::max(a_.size(), b_.size());
    a_.resize(n, 0.0);
    b_.resize(n, 0.0);
    if (n > 0) b_[0] = 0.0;
}

TrigSeries TrigSeries::from_packed(const std::vector<double>& packed) {
    if (packed.empty()) return {};
    const std::size_t n = 1 + packed.size() / 2;
    std::vector<double> a(n, 0.0), b(n, 0.0);
    a[0] = packed[0];
    for (std::size_t k = 1; k < n; ++k) {
        if (2 * k - 1 < packed.size()) a[k] = packed[2 * k - 1];
        if (2 * k < packed.size()) b[k] = packed[2 * k];
    }
    return {std::move(a), std::move(b)};
}

std::vector<double> TrigSeries::packed() const {
    if (a_.empty()) return {};
    std::vector<double> out{a_[0]};
    for (std::size_t k = 1; k < a_.size(); ++k) {
        out.push_back(a_[k]);
        out.push_back(b_[k]);
    }
    return out;
}

TrigSeries TrigSeries::fit(const std::vector<double>& samples, int modes) {
    const int m = static_cast<int>(samples.size());
    if (m == 0 || modes < 0) throw std::invalid_argument("TrigSeries::fit: empty samples");
    if (2 * modes >= m) throw std::invalid_argument("TrigSeries::fit: too many modes for sample count");
    std::vector<double> a(modes + 1, 0.0), b(modes + 1, 0.0);
    for (int j = 0; j < m; ++j) a[0] += samples[j];
    a[0] /= m;
    for (int k = 1; k <= modes; ++k) {
        double sa = 0.0, sb = 0.0;
        for (int j = 0; j < m; ++j) {
            // reduce k*j mod m first so the angle stays small
            const double ang = kTwoPi * static_cast<double>((static_cast<long long>(k) * j) % m) / m;
            sa += samples[j] * std::cos(ang);
            sb += samples[j] * std::sin(ang);
        }
        a[k] = 2.0 * sa / m;
        b[k] = 2.0 * sb / m;
    }
    return {std::move(a), std::move(b)};
}

void TrigSeries::eval_all(double t, int max_order, double* out) const {
    for (int m = 0; m <= max_order; ++m) out[m] = 0.0;
    if (a_.empty()) return;
    out[0] = a_[0];
    const double c1 = std::cos(kTwoPi * t), s1 = std::sin(kTwoPi * t);
    double ck = 1.0, sk = 0.0;
    const int n = degree();
    for (int k = 1; k <= n; ++k) {
        // angle addition, re-anchored every 16 steps to bound drift
        if (k % 16 == 0) {
            const double ang = kTwoPi * k * (t - std::floor(t));
            ck = std::cos(ang);
            sk = std::sin(ang);
        } else {
            const double cn = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = cn;
        }
        const double ak = a_[k], bk = b_[k];
        const double w = kTwoPi * k;
        double scale = 1.0;
        for (int m = 0; m <= max_order; ++m) {
            double v = 0.0;
            switch (m & 3) {
                case 0: v = ak * ck + bk * sk; break;
                case 1: v = -ak * sk + bk * ck; break;
                case 2: v = -ak * ck - bk * sk; break;
                case 3: v = ak * sk - bk * ck; break;
            }
            out[m] += scale * v;
            scale *= w;
        }
    }
}

void TrigSeries::eval_all(cplx t, int max_order, cplx* out) const {
    for (int m = 0; m <= max_order; ++m) out[m] = 0.0;
    if (a_.empty()) return;
    out[0] = a_[0];
    const cplx I(0.0, 1.0);
    const double re = t.real() - std::floor(t.real());
    const cplx tt(re, t.imag());
    const cplx w1 = std::exp(I * kTwoPi * tt);
    const cplx wm1 = 1.0 / w1;
    cplx wp = 1.0, wn = 1.0;
    const int n = degree();
    for (int k = 1; k <= n; ++k) {
        if (k % 16 == 0) {
            wp = std::exp(I * (kTwoPi * k) * tt);
            wn = 1.0 / wp;
        } else {
            wp *= w1;
            wn *= wm1;
        }
        const cplx ck = 0.5 * (wp + wn);
        const cplx sk = (wp - wn) / (2.0 * I);
        const double ak = a_[k], bk = b_[k];
        const double w = kTwoPi * k;
        double scale = 1.0;
        for (int m = 0; m <= max_order; ++m) {
            cplx v;
            switch (m & 3) {
                case 0: v = ak * ck + bk * sk; break;
                case 1: v = -ak * sk + bk * ck; break;
                case 2: v = -ak * ck - bk * sk; break;
                default: v = ak * sk - bk * ck; break;
            }
            out[m] += scale * v;
            scale *= w;
        }
    }
}

double TrigSeries::eval(double t, int order) const {
    double buf[8];
    if (order > 7) throw std::invalid_argument("TrigSeries::eval: order too high");
    eval_all(t, order, buf);
    return buf[order];
}

cplx TrigSeries::eval(cplx t, int order) const {
    cplx buf[8];
    if (order > 7) throw std::invalid_argument("TrigSeries::eval: order too high");
    eval_all(t, order, buf);
    return buf[order];
}

double TrigSeries::max_abs_coef_tail(int from_mode) const {
    double m = 0.0;
    for (int k = std::max(from_mode, 0); k <= degree(); ++k)
        m = std::max({m, std::abs(a_[k]), std::abs(b_[k])});
    return m;
}

TrigSeries TrigSeries::truncated(int modes) const {
    const int n = std::min(modes, degree());
    if (n < 0) return {};
    return {std::vector<double>(a_.begin(), a_.begin() + n + 1),
            std::vector<double>(b_.begin(), b_.begin() + n + 1)};
}

TrigSeries TrigSeries::shifted(double c) const {
    std::vector<double> a = a_, b = b_;
    for (int k = 1; k <= degree(); ++k) {
        const double ang = kTwoPi * k * c;
        const double cc = std::cos(ang), ss = std::sin(ang);
        // a cos(x + y) + b sin(x + y)
        a[k] = a_[k] * cc + b_[k] * ss;
        b[k] = -a_[k] * ss + b_[k] * cc;
    }
    return {std::move(a), std::move(b)};
}

TrigSeries TrigSeries::derivative() const {
    std::vector<double> a(a_.size(), 0.0), b(b_.size(), 0.0);
    for (int k = 1; k <= degree(); ++k) {
        a[k] = kTwoPi * k * b_[k];
        b[k] = -kTwoPi * k * a_[k];
    }
    return {std::move(a), std::move(b)};
}

TrigSeries TrigSeries::operator+(const TrigSeries& o) const {
    const std::size_t n = std::max(a_.size(), o.a_.size());
    std::vector<double> a(n, 0.0), b(n, 0.0);
    for (std::size_t k = 0; k < a_.size(); ++k) { a[k] += a_[k]; b[k] += b_[k]; }
    for (std::size_t k = 0; k < o.a_.size(); ++k) { a[k] += o.a_[k]; b[k] += o.b_[k]; }
    return {std::move(a), std::move(b)};
}

TrigSeries TrigSeries::operator*(double s) const {
    std::vector<double> a = a_, b = b_;
    for (auto& v : a) v *= s;
    for (auto& v : b) v *= s;
    return {std::move(a), std::move(b)};
}

}  // namespace iw
