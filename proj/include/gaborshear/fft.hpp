#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace gaborshear {
namespace fft {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class Plan1D {
public:
    Plan1D(int n, int sign) : n_(n) {
        buf_ = fftw_alloc_complex(static_cast<size_t>(n));
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_dft_1d(n, buf_, buf_, sign, FFTW_ESTIMATE);
    }
    ~Plan1D() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    Plan1D(const Plan1D&) = delete;
    Plan1D& operator=(const Plan1D&) = delete;

    void run(std::complex<double>* data) const {
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }
    int size() const { return n_; }

private:
    int n_;
    fftw_complex* buf_;
    fftw_plan plan_;
};

/// In-place forward DFT, sum_p a_p e^{-2 pi i m p / n}. Thread-local plan
/// cache keyed by length.
inline void forward(std::complex<double>* data, int n) {
    thread_local std::map<int, std::unique_ptr<Plan1D>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<Plan1D>(n, FFTW_FORWARD);
    p->run(data);
}

/// In-place unnormalized inverse DFT (adjoint of forward).
inline void backward(std::complex<double>* data, int n) {
    thread_local std::map<int, std::unique_ptr<Plan1D>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<Plan1D>(n, FFTW_BACKWARD);
    p->run(data);
}

inline void forward(std::vector<std::complex<double>>& v) {
    forward(v.data(), static_cast<int>(v.size()));
}
inline void backward(std::vector<std::complex<double>>& v) {
    backward(v.data(), static_cast<int>(v.size()));
}

class Plan2D {
public:
    Plan2D(int n, int sign) : n_(n) {
        buf_ = fftw_alloc_complex(static_cast<size_t>(n) * n);
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_ = fftw_plan_dft_2d(n, n, buf_, buf_, sign, FFTW_ESTIMATE);
    }
    ~Plan2D() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(buf_);
    }
    Plan2D(const Plan2D&) = delete;
    Plan2D& operator=(const Plan2D&) = delete;

    void run(std::complex<double>* data) const {
        fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(data),
                         reinterpret_cast<fftw_complex*>(data));
    }

private:
    int n_;
    fftw_complex* buf_;
    fftw_plan plan_;
};

/// In-place 2D DFT on an n*n row-major array.
inline void forward2d(std::complex<double>* data, int n) {
    thread_local std::map<int, std::unique_ptr<Plan2D>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<Plan2D>(n, FFTW_FORWARD);
    p->run(data);
}

inline void backward2d(std::complex<double>* data, int n) {
    thread_local std::map<int, std::unique_ptr<Plan2D>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<Plan2D>(n, FFTW_BACKWARD);
    p->run(data);
}

} // namespace fft
} // namespace gaborshear
