#pragma once

#include <cmath>
#include <memory>

#include "iwave/billiard.hpp"
#include "iwave/deformation.hpp"
#include "iwave/escape.hpp"

namespace fx {

inline const double kLam = 1.0 / std::sqrt(2.0);

// Figure-1 data (x^4 + y^4 < 1 rotated by pi/10 at lambda = 1/sqrt(2)), built once per binary.
struct Figure1 {
    iw::Billiard bil;
    iw::BilliardAnalysis an;
    iw::EscapeField ef;
    iw::DeformationMap dm;  // tau = 0.02
    Figure1()
        : bil(iw::Domain(iw::preset_superellipse4(iw::kPi / 10, kLam))),
          an(iw::analyze_dynamics(bil)),
          ef(iw::build_escape_field(bil, an)),
          dm(bil, ef.h, 0.02) {}
};

inline const Figure1& figure1() {
    static const Figure1 f;
    return f;
}

inline const iw::Billiard& circle() {
    static const iw::Billiard b{iw::Domain(iw::preset_circle(kLam))};
    return b;
}

inline const iw::Billiard& ellipse() {
    static const iw::Billiard b{iw::Domain(iw::preset_ellipse(2.0, 1.0, 0.5))};
    return b;
}

}  // namespace fx
