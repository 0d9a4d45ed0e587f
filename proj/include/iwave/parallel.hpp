#pragma once

#include <vector>

namespace iw {

// f(j / n) for j = 0..n-1. The parallel variant must agree bitwise with the serial one.
template <class T, class F>
std::vector<T> serial_sample_circle(int n, F&& f) {
    std::vector<T> out(n);
    for (int j = 0; j < n; ++j) out[j] = f(static_cast<double>(j) / n);
    return out;
}

template <class T, class F>
std::vector<T> parallel_sample_circle(int n, F&& f) {
    std::vector<T> out(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (int j = 0; j < n; ++j) out[j] = f(static_cast<double>(j) / n);
    return out;
}

// f(i) for i = 0..n-1
template <class T, class F>
std::vector<T> serial_map_index(int n, F&& f) {
    std::vector<T> out(n);
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
}

template <class T, class F>
std::vector<T> parallel_map_index(int n, F&& f) {
    std::vector<T> out(n);
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
}

}  // namespace iw
