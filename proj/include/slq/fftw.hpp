#pragma once

// Minimal RAII layer over FFTW3. Planning is serialized through one mutex; execution
// uses the new-array interface, which FFTW guarantees to be thread-safe.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <utility>

#include <fftw3.h>

#include "slq/core.hpp"

namespace slq::fftw {

inline std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

struct Free {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <class T>
using Buffer = std::unique_ptr<T[], Free>;

template <class T>
Buffer<T> allocate(std::size_t count) {
  void* p = fftw_malloc(sizeof(T) * count);
  if (!p) throw std::bad_alloc();
  return Buffer<T>(static_cast<T*>(p));
}

class Plan {
public:
  Plan() = default;
  explicit Plan(fftw_plan p) : p_(p) {
    if (!p_) throw NumericalFailure("fftw: planner returned no plan");
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  Plan(Plan&& o) noexcept : p_(std::exchange(o.p_, nullptr)) {}
  Plan& operator=(Plan&& o) noexcept {
    if (this != &o) {
      reset();
      p_ = std::exchange(o.p_, nullptr);
    }
    return *this;
  }
  ~Plan() { reset(); }

  fftw_plan get() const noexcept { return p_; }

private:
  void reset() noexcept {
    if (p_) {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(p_);
      p_ = nullptr;
    }
  }
  fftw_plan p_ = nullptr;
};

/// Real 2D transform pair on an array with `slow` x `fast` entries (fast index contiguous).
class Real2D {
public:
  Real2D(std::size_t slow, std::size_t fast) : slow_(slow), fast_(fast) {
    require(slow > 0 && fast > 0, "fftw::Real2D: empty transform");
    auto in = allocate<double>(real_size());
    auto out = allocate<fftw_complex>(complex_size());
    std::lock_guard lock(planner_mutex());
    forward_ = Plan(fftw_plan_dft_r2c_2d(static_cast<int>(slow), static_cast<int>(fast), in.get(), out.get(),
                                         FFTW_ESTIMATE));
    backward_ = Plan(fftw_plan_dft_c2r_2d(static_cast<int>(slow), static_cast<int>(fast), out.get(), in.get(),
                                          FFTW_ESTIMATE));
  }

  std::size_t real_size() const noexcept { return slow_ * fast_; }
  std::size_t complex_size() const noexcept { return slow_ * (fast_ / 2 + 1); }

  void forward(double* in, fftw_complex* out) const { fftw_execute_dft_r2c(forward_.get(), in, out); }
  /// Unnormalized inverse; destroys `in`.
  void backward(fftw_complex* in, double* out) const { fftw_execute_dft_c2r(backward_.get(), in, out); }

private:
  std::size_t slow_, fast_;
  Plan forward_, backward_;
};

/// Orthonormal 2D type-I sine transform (its own inverse).
class Dst2D {
public:
  Dst2D(std::size_t slow, std::size_t fast) : slow_(slow), fast_(fast) {
    auto a = allocate<double>(slow * fast);
    auto b = allocate<double>(slow * fast);
    std::lock_guard lock(planner_mutex());
    plan_ = Plan(fftw_plan_r2r_2d(static_cast<int>(slow), static_cast<int>(fast), a.get(), b.get(), FFTW_RODFT00,
                                  FFTW_RODFT00, FFTW_ESTIMATE));
  }

  Vector operator()(std::span<const double> x) const {
    require(x.size() == slow_ * fast_, "fftw::Dst2D: size mismatch");
    auto in = allocate<double>(x.size());
    auto out = allocate<double>(x.size());
    std::copy(x.begin(), x.end(), in.get());
    fftw_execute_r2r(plan_.get(), in.get(), out.get());
    const double s = 1.0 / std::sqrt(4.0 * static_cast<double>(slow_ + 1) * static_cast<double>(fast_ + 1));
    Vector y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = s * out[i];
    return y;
  }

private:
  std::size_t slow_, fast_;
  Plan plan_;
};

}  // namespace slq::fftw
