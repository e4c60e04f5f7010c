#pragma once

#include <cmath>
#include <vector>

#include "etmc/channel.hpp"
#include "etmc/plant.hpp"

namespace fixtures {

inline etmc::ChannelModel reference_model() {
    const auto p0 = etmc::SquareMatrix::from_rows({{0.5, 0.4, 0.4, 0.3},
                                                   {0.3, 0.3, 0.2, 0.3},
                                                   {0.2, 0.2, 0.2, 0.3},
                                                   {0.0, 0.1, 0.2, 0.1}});
    const auto p1 = etmc::SquareMatrix::from_rows({{0.1, 0.0, 0.1, 0.2},
                                                   {0.1, 0.1, 0.2, 0.2},
                                                   {0.1, 0.3, 0.3, 0.3},
                                                   {0.7, 0.6, 0.4, 0.3}});
    return etmc::ChannelModel::make(p0, p1, {0.1, 0.2, 0.3, 0.4});
}

inline etmc::PlantParams reference_params(double B = 18.0) {
    return etmc::PlantParams::make(1.10, std::nullopt, 0.95, 0.98, 1.0, B);
}

/// Reference transition matrices with a perfect channel.
inline etmc::ChannelModel lossless_model() {
    auto m = reference_model();
    m.e.assign(4, 0.0);
    m.d.assign(4, 1.0);
    return m;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace fixtures
