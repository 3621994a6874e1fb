#pragma once

#include <Eigen/Dense>

namespace pesin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Point on the flat d-torus [0,1)^d.  The flat model keeps the exponential
// map trivial: exp_x(v) = x + v mod 1 and d(exp) = Id.
class TorusPoint {
public:
    TorusPoint() = default;
    explicit TorusPoint(Vec coords);

    int dim() const { return static_cast<int>(coords_.size()); }
    const Vec& coords() const { return coords_; }
    double operator[](int i) const { return coords_[i]; }

    // exp_x(v), v a tangent vector.
    TorusPoint shifted(const Vec& v) const;

    bool operator==(const TorusPoint& o) const { return coords_ == o.coords_; }

private:
    Vec coords_; // each entry normalized into [0,1)
};

// Normalize each coordinate into [0,1).
Vec wrap_coords(Vec v);

// Signed per-coordinate difference y - x mapped into [-1/2, 1/2)^d.
// This is exp_x^{-1}(y) on the flat torus; valid since all radii used
// stay below rho = 0.49.
Vec wrap_diff(const TorusPoint& x, const TorusPoint& y);

// Euclidean distance with per-coordinate wrap-around; at most sqrt(d)/2.
double torus_distance(const TorusPoint& x, const TorusPoint& y);

// Flat-torus geometry constants (spec'd for the identity trivialization).
inline constexpr double kInjectivityRadius = 0.49; // rho(M) = r(M)

} // namespace pesin
