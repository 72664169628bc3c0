#include "fft.hpp"

#include <cstring>
#include <mutex>

#include <fftw3.h>

namespace rmdyn::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    auto* buf = fftw_alloc_complex(n);
    buf_ = buf;
    plan_fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_);
}

void Fft::forward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    std::memcpy(buf_, in.data(), n_ * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    out.resize(static_cast<Eigen::Index>(n_));
    std::memcpy(out.data(), buf_, n_ * sizeof(fftw_complex));
}

void Fft::backward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    std::memcpy(buf_, in.data(), n_ * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    out.resize(static_cast<Eigen::Index>(n_));
    std::memcpy(out.data(), buf_, n_ * sizeof(fftw_complex));
}

}  // namespace rmdyn::detail
