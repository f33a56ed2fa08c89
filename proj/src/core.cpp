#include "annulus/core.hpp"

#include <algorithm>

namespace annulus {

LiftedMap deck_shift(const LiftedMap& map, long n) {
    LiftedMap out = map;
    out.forward = [f = map.forward, n](const StripPoint& p) { return deck(f(p), n); };
    out.inverse = [g = map.inverse, n](const StripPoint& p) { return g(deck(p, -n)); };
    out.displacement_bound = map.displacement_bound + static_cast<double>(std::labs(n));
    out.label = map.label + (n >= 0 ? "+tau^" : "-tau^") + std::to_string(std::labs(n));
    return out;
}

LiftedMap inverse_of(const LiftedMap& map) {
    LiftedMap out = map;
    std::swap(out.forward, out.inverse);
    std::swap(out.lipschitz_bound, out.inverse_lipschitz_bound);
    out.label = map.label + "^-1";
    return out;
}

LiftedMap flip_boundaries(const LiftedMap& map) {
    LiftedMap out = map;
    out.forward = [f = map.forward](const StripPoint& p) { return flip_point(f(flip_point(p))); };
    out.inverse = [g = map.inverse](const StripPoint& p) { return flip_point(g(flip_point(p))); };
    out.label = "flip(" + map.label + ")";
    return out;
}

AnnulusPoint project(const StripPoint& p) {
    double t = p.x() - std::floor(p.x());
    if (t >= 1.0) t = 0.0;
    return {t, p.y()};
}

StripPoint lift_point(const AnnulusPoint& a, long sheet) {
    return {a.theta_mod1 + static_cast<double>(sheet), a.r};
}

double displacement(const LiftedMap& map, const StripPoint& z) {
    return map.forward(z).x() - z.x();
}

double displacement(const LiftedMap& map, const AnnulusPoint& a) {
    return displacement(map, lift_point(a, 0));
}

PlaneMap plane_extension(const LiftedMap& map) {
    return PlaneMap{[f = map.forward](const PlanePoint& p) -> PlanePoint {
        const double y = p.y();
        if (std::abs(y) < 1.0) return f(p);
        const double s = y > 0 ? 1.0 : -1.0;
        return f(StripPoint{p.x(), s}) + PlanePoint{0.0, y - s};
    }};
}

double annulus_distance(const StripPoint& a, const StripPoint& b) {
    double dx = a.x() - b.x();
    dx -= std::round(dx);
    return std::hypot(dx, a.y() - b.y());
}

}  // namespace annulus
