#include "ctrcac/references.hpp"

#include <cmath>

namespace ctrcac {

Vector2d EllipseReference::position(double t) const {
    const double ci = std::cos(incline), si = std::sin(incline);
    const double cw = std::cos(omega * t), sw = std::sin(omega * t);
    return {semi_major * ci - semi_major * ci * cw - semi_minor * si * sw,
            semi_major * si - semi_major * si * cw + semi_minor * ci * sw};
}

Vector2d EllipseReference::velocity(double t) const {
    const double ci = std::cos(incline), si = std::sin(incline);
    const double cw = std::cos(omega * t), sw = std::sin(omega * t);
    return {omega * (semi_major * ci * sw - semi_minor * si * cw),
            omega * (semi_major * si * sw + semi_minor * ci * cw)};
}

} // namespace ctrcac
