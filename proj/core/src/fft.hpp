#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace rmdyn::detail {

/// Unnormalized 1D complex DFT backed by FFTW. One instance per thread;
/// plan creation is serialized internally since FFTW's planner is not reentrant.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const noexcept { return n_; }

    /// out_k = sum_j in_j exp(-2 pi i jk/n)
    void forward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out);
    /// out_j = sum_k in_k exp(+2 pi i jk/n)  (no 1/n factor)
    void backward(const Eigen::VectorXcd& in, Eigen::VectorXcd& out);

private:
    std::size_t n_;
    void* buf_;
    void* plan_fwd_;
    void* plan_bwd_;
};

}  // namespace rmdyn::detail
