#pragma once

#include "ofdb/ifs.hpp"

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace ofdb {

// Angles in degrees. Valid poses keep each angle in [0, 360); the rotation
// itself accepts any finite angle.
struct CameraPose {
    double roll = 0.0;  // about x
    double pitch = 0.0; // about y
    double yaw = 0.0;   // about z

    bool is_canonical() const;
    CameraPose canonical() const;

    friend bool operator==(const CameraPose&, const CameraPose&) = default;
};

enum class Axis : std::uint8_t { roll = 1, pitch = 2, yaw = 4 };

// Non-empty subset of {roll, pitch, yaw}.
class AxisSet {
public:
    constexpr AxisSet() = default;
    constexpr explicit AxisSet(std::uint8_t mask) : mask_(mask) {}
    constexpr AxisSet(std::initializer_list<Axis> axes) {
        for (Axis a : axes) {
            mask_ = static_cast<std::uint8_t>(mask_ | static_cast<std::uint8_t>(a));
        }
    }

    constexpr bool contains(Axis a) const { return (mask_ & static_cast<std::uint8_t>(a)) != 0; }
    constexpr bool empty() const { return (mask_ & 7u) == 0; }
    constexpr std::uint8_t mask() const { return mask_; }
    int count() const;

    // "yaw", "pitch,yaw", ...
    static AxisSet parse(const std::string& text);
    std::string to_string() const;

    friend constexpr bool operator==(AxisSet, AxisSet) = default;

private:
    std::uint8_t mask_ = 0;
};

struct ViewpointSet {
    AxisSet axes{Axis::yaw};
    double step = 30.0;
    std::vector<CameraPose> poses;
};

using Matrix3 = std::array<double, 9>; // row-major

// R = R_z(yaw) * R_y(pitch) * R_x(roll), right-handed.
Matrix3 rotation_matrix(const CameraPose& pose);

// Rotates every point and drops z (orthographic view along -z). Order kept.
PointCloud project(const PointCloud& points, const CameraPose& pose);

// Cartesian product of {0, step, 2*step, ...} over the chosen axes, with
// roll varying slowest and yaw fastest. 360 must be a multiple of step.
ViewpointSet enumerate_viewpoints(AxisSet axes, double step);

} // namespace ofdb
