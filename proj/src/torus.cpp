#include "pesin/torus.hpp"

#include <cmath>

namespace pesin {

Vec wrap_coords(Vec v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] -= std::floor(v[i]);
        if (v[i] >= 1.0) v[i] = 0.0; // floor rounding at the seam
    }
    return v;
}

TorusPoint::TorusPoint(Vec coords) : coords_(wrap_coords(std::move(coords))) {}

TorusPoint TorusPoint::shifted(const Vec& v) const {
    return TorusPoint(coords_ + v);
}

Vec wrap_diff(const TorusPoint& x, const TorusPoint& y) {
    Vec d = y.coords() - x.coords();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        d[i] -= std::round(d[i]);
        if (d[i] >= 0.5) d[i] = -0.5;
    }
    return d;
}

double torus_distance(const TorusPoint& x, const TorusPoint& y) {
    return wrap_diff(x, y).norm();
}

} // namespace pesin
