#include "slabinv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace slabinv {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Cache of c2c plans keyed by (nx, ny, direction).  Plans are executed via
// fftw_execute_dft on caller buffers.
fftw_plan get_c2c_plan(int nx, int ny, int sign) {
    static std::map<std::tuple<int, int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lk(plan_mutex());
    auto key = std::make_tuple(nx, ny, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<cplx> tmp(size_t(nx) * ny);
    auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
    fftw_plan plan = fftw_plan_dft_2d(ny, nx, p, p, sign, FFTW_ESTIMATE);
    cache.emplace(key, plan);
    return plan;
}

}  // namespace

void fft2(std::vector<cplx>& data, int nx, int ny, bool forward) {
    if (data.size() != size_t(nx) * ny) throw GridMismatch("fft2: size mismatch");
    fftw_plan plan = get_c2c_plan(nx, ny, forward ? FFTW_FORWARD : FFTW_BACKWARD);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
    if (!forward) {
        const double s = 1.0 / (double(nx) * ny);
        for (auto& z : data) z *= s;
    }
}

Dst3::Dst3(int nx, int ny, int nz) : nx_(nx), ny_(ny), nz_(nz) {
    scratch_.assign(size_t(nx) * ny * nz, 0.0);
    std::lock_guard<std::mutex> lk(plan_mutex());
    fftw_r2r_kind kinds[3] = {FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00};
    plan_ = fftw_plan_r2r_3d(nz, ny, nx, scratch_.data(), scratch_.data(), kinds[0],
                             kinds[1], kinds[2], FFTW_ESTIMATE);
    if (!plan_) throw std::runtime_error("Dst3: FFTW plan creation failed");
}

Dst3::~Dst3() {
    std::lock_guard<std::mutex> lk(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void Dst3::execute(double* data) const {
    fftw_execute_r2r(static_cast<fftw_plan>(plan_), data, data);
}

}  // namespace slabinv
