#include "mvedit/camera.hpp"

#include <stdexcept>

namespace mvedit {

namespace {

// sin/cos that are exact at multiples of pi/2.
std::pair<double, double> sincos_snapped(double angle) {
    const double quarters = angle / (kPi / 2.0);
    const double k = std::round(quarters);
    if (std::abs(quarters - k) <= 1e-12 * std::max(1.0, std::abs(quarters))) {
        static constexpr std::array<std::pair<double, double>, 4> table{
            {{0.0, 1.0}, {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}}};
        const auto idx = static_cast<std::size_t>(((static_cast<long long>(k) % 4) + 4) % 4);
        return table[idx];
    }
    return {std::sin(angle), std::cos(angle)};
}

double wrap_angle(double a) {
    double w = std::fmod(a, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    if (2.0 * kPi - w <= 1e-12) w = 0.0;
    return w;
}

}  // namespace

CameraPose camera_pose(double azimuth, double elevation, double distance, double fov) {
    if (!(distance > 0.0)) throw std::invalid_argument("camera distance must be positive");
    if (!(fov > 0.0 && fov < kPi)) throw std::invalid_argument("field of view must be in (0, pi)");

    CameraPose pose;
    pose.azimuth = azimuth;
    pose.elevation = elevation;
    pose.distance = distance;
    pose.fov = fov;

    const auto [sa, ca] = sincos_snapped(azimuth);
    const auto [se, ce] = sincos_snapped(elevation);
    pose.position = Vec3{ce * sa, se, ce * ca} * distance;

    const Vec3 forward = normalized(-pose.position);
    Vec3 right = cross(forward, Vec3{0.0, 1.0, 0.0});
    if (length(right) < 1e-12) {
        // Looking straight up or down; keep the image "up" pointing away from the azimuth.
        right = Vec3{ca, 0.0, -sa};
    }
    right = normalized(right);
    const Vec3 up = cross(right, forward);
    pose.rotation = Mat3::from_rows(right, up, -forward);
    return pose;
}

double CameraRig::azimuth(int view) const { return wrap_angle(azimuth_offset + view * (kPi / 2.0)); }

std::array<CameraPose, 4> CameraRig::poses() const {
    std::array<CameraPose, 4> out;
    for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = camera_pose(azimuth(i), elevation, distance, fov);
    return out;
}

}  // namespace mvedit
