#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace vlnforge {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Base class of everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A query referred to a location outside the data it was asked about.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

/// Inputs that violate an operation's preconditions.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    double norm_xy() const { return std::sqrt(x * x + y * y); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }
inline double distance_xy(const Vec3& a, const Vec3& b) { return (a - b).norm_xy(); }

/// Wraps an angle into [0, 2pi).
inline double normalize_heading(double h) {
    h = std::fmod(h, kTwoPi);
    if (h < 0.0) h += kTwoPi;
    return h;
}

struct Pose {
    Vec3 position;
    double heading = 0.0;    // [0, 2pi), 0 = +x
    double elevation = 0.0;  // [-pi/2, pi/2], positive up

    static Pose at(const Vec3& p, double heading, double elevation = 0.0) {
        return Pose{p, normalize_heading(heading), elevation};
    }

    Vec3 forward() const {
        const double ce = std::cos(elevation);
        return {ce * std::cos(heading), ce * std::sin(heading), std::sin(elevation)};
    }
    Vec3 right() const { return {std::sin(heading), -std::cos(heading), 0.0}; }
    Vec3 up() const {
        const double se = std::sin(elevation);
        return {-se * std::cos(heading), -se * std::sin(heading), std::cos(elevation)};
    }
};

struct CameraIntrinsics {
    int width = 0;
    int height = 0;
    double hfov = 0.0;  // radians, (0, pi)

    CameraIntrinsics() = default;
    CameraIntrinsics(int w, int h, double hfov_rad) : width(w), height(h), hfov(hfov_rad) {
        if (w < 1 || h < 1) throw InvalidArgument("camera: width and height must be >= 1");
        if (!(hfov_rad > 0.0 && hfov_rad < kPi)) throw InvalidArgument("camera: hfov out of (0, pi)");
    }

    double cx() const { return (width - 1) / 2.0; }
    double cy() const { return (height - 1) / 2.0; }
    double fx() const { return (std::max(width - 1, 1) / 2.0) / std::tan(hfov / 2.0); }
    double fy() const { return fx(); }

    bool operator==(const CameraIntrinsics& o) const {
        return width == o.width && height == o.height && hfov == o.hfov;
    }
};

/// Unnormalized world-frame ray direction through pixel (u, v); the
/// component along the camera forward axis is exactly 1, so planar
/// depth d maps the ray to origin + d * dir.
Vec3 pixel_ray(double u, double v, const CameraIntrinsics& intr, const Pose& pose);

/// Lifts pixel (u, v) with planar depth to a world-frame point.
/// Throws InvalidArgument on non-positive depth or out-of-image pixels.
Vec3 pixel_to_point(double u, double v, double depth, const CameraIntrinsics& intr,
                    const Pose& pose);

struct PixelProjection {
    double u = 0.0;
    double v = 0.0;
    double depth = 0.0;  // planar; <= 0 means behind the camera
    bool in_image = false;
};

/// Projects a world point into the camera; exact inverse of pixel_to_point.
PixelProjection project_point(const Vec3& point, const CameraIntrinsics& intr, const Pose& pose);

}  // namespace vlnforge
