#include "iwave/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "iwave/fourier.hpp"

namespace iw {

namespace {

QuadRule build(int n) {
    QuadRule q;
    q.x.resize(n);
    q.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.x[i] = 0.5 * (1.0 - x);
        q.x[n - 1 - i] = 0.5 * (1.0 + x);
        q.w[i] = q.w[n - 1 - i] = 0.5 * w;
    }
    return q;
}

}  // namespace

const QuadRule& gauss_legendre01(int n) {
    static std::mutex mu;
    static std::map<int, QuadRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build(n)).first;
    return it->second;
}

}  // namespace iw
