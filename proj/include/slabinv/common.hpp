// Shared aliases, error types and a small deterministic thread pool.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace slabinv {

using cplx = std::complex<double>;
using std::size_t;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kImag{0.0, 1.0};

struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConstraintViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonvanishingNormalTrace : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ThresholdFrequency : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroKappa : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct OutsideRecipeCone : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonGradientInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct LinearSolveFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PatchMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Static block split over hardware threads.  Workers write only to
// caller-owned slots indexed by i, so results do not depend on scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t)>& body) {
    unsigned nt = std::thread::hardware_concurrency();
    if (nt < 2 || n < 2) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    nt = static_cast<unsigned>(std::min<size_t>(nt, n));
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::exception_ptr err;
    std::mutex err_mtx;
    for (unsigned t = 0; t < nt; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (size_t i = t; i < n; i += nt) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mtx);
                if (!err) err = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

struct Vec3 {
    double x{0}, y{0}, z{0};
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline Vec3 normalized(Vec3 a) {
    double n = norm(a);
    if (n == 0.0) throw ConstraintViolation("cannot normalize zero vector");
    return (1.0 / n) * a;
}

// Complex 3-vector, used for the CGO frequency vectors.
struct CVec3 {
    cplx x{0}, y{0}, z{0};
    cplx& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    cplx operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline CVec3 operator+(CVec3 a, CVec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline CVec3 operator*(cplx s, CVec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline CVec3 operator*(double s, CVec3 a) { return {s * a.x, s * a.y, s * a.z}; }
inline CVec3 conj(CVec3 a) { return {std::conj(a.x), std::conj(a.y), std::conj(a.z)}; }
// Bilinear (unconjugated) product, matching zeta.zeta = 0.
inline cplx dotu(CVec3 a, CVec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline CVec3 to_cvec(Vec3 a) { return {cplx(a.x), cplx(a.y), cplx(a.z)}; }
inline double cnorm(CVec3 a) {
    return std::sqrt(std::norm(a.x) + std::norm(a.y) + std::norm(a.z));
}

// Fit the slope of log(y) vs log(x) by least squares; x, y > 0.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("loglog_slope needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace slabinv
