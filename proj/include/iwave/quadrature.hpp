#pragma once

#include <vector>

namespace iw {

struct QuadRule {
    std::vector<double> x;  // nodes on [0, 1]
    std::vector<double> w;  // weights summing to 1
};

// n-point Gauss-Legendre rule on [0, 1] (Newton on the Legendre recurrence).
const QuadRule& gauss_legendre01(int n);

}  // namespace iw
