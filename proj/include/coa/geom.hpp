#ifndef COA_GEOM_HPP
#define COA_GEOM_HPP

#include <cmath>

namespace coa {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

// Normalize an angle into (-pi, pi].
inline double wrap_angle(double a) {
    const double two_pi = 2.0 * M_PI;
    a = std::fmod(a, two_pi);
    if (a <= -M_PI) a += two_pi;
    if (a > M_PI) a -= two_pi;
    return a;
}

inline Vec2 heading_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }

// Rotate a robot-frame vector into the world frame.
inline Vec2 robot_to_world(const Vec2& v, double heading) {
    const double c = std::cos(heading), s = std::sin(heading);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

}  // namespace coa

#endif
