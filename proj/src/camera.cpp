#include "ofdb/camera.hpp"

#include "ofdb/errors.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ofdb {

namespace {

// sin/cos in degrees, exact at multiples of 90 so that the axis-aligned
// viewpoints produce exact permutation matrices.
std::pair<double, double> sin_cos_deg(double degrees) {
    double reduced = std::fmod(degrees, 360.0);
    if (reduced < 0.0) {
        reduced += 360.0;
    }
    if (reduced == 0.0) {
        return {0.0, 1.0};
    }
    if (reduced == 90.0) {
        return {1.0, 0.0};
    }
    if (reduced == 180.0) {
        return {0.0, -1.0};
    }
    if (reduced == 270.0) {
        return {-1.0, 0.0};
    }
    const double rad = reduced * std::numbers::pi / 180.0;
    return {std::sin(rad), std::cos(rad)};
}

Matrix3 multiply(const Matrix3& a, const Matrix3& b) {
    Matrix3 out{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) {
                s += a[static_cast<std::size_t>(3 * i + k)] * b[static_cast<std::size_t>(3 * k + j)];
            }
            out[static_cast<std::size_t>(3 * i + j)] = s;
        }
    }
    return out;
}

double wrap_degrees(double a) {
    double w = std::fmod(a, 360.0);
    if (w < 0.0) {
        w += 360.0;
    }
    return w >= 360.0 ? 0.0 : w;
}

} // namespace

bool CameraPose::is_canonical() const {
    auto ok = [](double a) { return std::isfinite(a) && a >= 0.0 && a < 360.0; };
    return ok(roll) && ok(pitch) && ok(yaw);
}

CameraPose CameraPose::canonical() const {
    return {wrap_degrees(roll), wrap_degrees(pitch), wrap_degrees(yaw)};
}

int AxisSet::count() const {
    return std::popcount(static_cast<unsigned>(mask_ & 7u));
}

AxisSet AxisSet::parse(const std::string& text) {
    AxisSet set;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "roll") {
            set.mask_ |= static_cast<std::uint8_t>(Axis::roll);
        } else if (item == "pitch") {
            set.mask_ |= static_cast<std::uint8_t>(Axis::pitch);
        } else if (item == "yaw") {
            set.mask_ |= static_cast<std::uint8_t>(Axis::yaw);
        } else if (!item.empty()) {
            throw InvalidArgumentError("unknown camera axis '" + item + "'");
        }
    }
    if (set.empty()) {
        throw InvalidArgumentError("viewpoint axes must name at least one of roll, pitch, yaw");
    }
    return set;
}

std::string AxisSet::to_string() const {
    std::string out;
    auto add = [&](Axis a, const char* name) {
        if (contains(a)) {
            if (!out.empty()) {
                out += ',';
            }
            out += name;
        }
    };
    add(Axis::roll, "roll");
    add(Axis::pitch, "pitch");
    add(Axis::yaw, "yaw");
    return out;
}

Matrix3 rotation_matrix(const CameraPose& pose) {
    const auto [sr, cr] = sin_cos_deg(pose.roll);
    const auto [sp, cp] = sin_cos_deg(pose.pitch);
    const auto [sy, cy] = sin_cos_deg(pose.yaw);
    const Matrix3 rx{1.0, 0.0, 0.0, 0.0, cr, -sr, 0.0, sr, cr};
    const Matrix3 ry{cp, 0.0, sp, 0.0, 1.0, 0.0, -sp, 0.0, cp};
    const Matrix3 rz{cy, -sy, 0.0, sy, cy, 0.0, 0.0, 0.0, 1.0};
    return multiply(rz, multiply(ry, rx));
}

PointCloud project(const PointCloud& points, const CameraPose& pose) {
    if (points.dimension != 3) {
        throw InvalidArgumentError("project expects a 3D cloud");
    }
    const Matrix3 r = rotation_matrix(pose);
    PointCloud out;
    out.dimension = 2;
    out.source_seed = points.source_seed;
    out.burn_in = points.burn_in;
    const std::size_t n = points.size();
    out.coords.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = points.coords[3 * i];
        const double y = points.coords[3 * i + 1];
        const double z = points.coords[3 * i + 2];
        out.coords[2 * i] = r[0] * x + r[1] * y + r[2] * z;
        out.coords[2 * i + 1] = r[3] * x + r[4] * y + r[5] * z;
    }
    return out;
}

ViewpointSet enumerate_viewpoints(AxisSet axes, double step) {
    if (axes.empty()) {
        throw InvalidArgumentError("viewpoint axes must be non-empty");
    }
    if (!(step > 0.0) || !(step <= 360.0)) {
        throw InvalidArgumentError("viewpoint step must be in (0, 360]");
    }
    const double per_axis = 360.0 / step;
    const auto count = static_cast<int>(std::lround(per_axis));
    if (std::abs(per_axis - count) > 1e-9) {
        throw InvalidArgumentError("360 must be divisible by the viewpoint step");
    }

    auto angles = [&](Axis a) {
        std::vector<double> out;
        if (!axes.contains(a)) {
            out.push_back(0.0);
            return out;
        }
        for (int k = 0; k < count; ++k) {
            out.push_back(static_cast<double>(k) * step);
        }
        return out;
    };

    ViewpointSet set;
    set.axes = axes;
    set.step = step;
    for (double roll : angles(Axis::roll)) {
        for (double pitch : angles(Axis::pitch)) {
            for (double yaw : angles(Axis::yaw)) {
                set.poses.push_back({roll, pitch, yaw});
            }
        }
    }
    return set;
}

} // namespace ofdb
