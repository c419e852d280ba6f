#include "fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <new>
#include <numbers>
#include <utility>

namespace levcool::detail {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int sign_of(FftPlan::Direction d) { return d == FftPlan::Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

}  // namespace

FftPlan FftPlan::rows(std::size_t n, std::size_t howmany, Direction dir) {
  FftBuffer scratch(n * howmany);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  const int len = static_cast<int>(n);
  FftPlan plan;
  std::lock_guard lock(planner_mutex());
  plan.plan_ = fftw_plan_many_dft(1, &len, static_cast<int>(howmany), p, nullptr, 1, len, p, nullptr,
                                  1, len, sign_of(dir), FFTW_ESTIMATE);
  if (!plan.plan_) throw std::bad_alloc();
  return plan;
}

FftPlan FftPlan::grid(std::size_t n0, std::size_t n1, Direction dir) {
  FftBuffer scratch(n0 * n1);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  FftPlan plan;
  std::lock_guard lock(planner_mutex());
  plan.plan_ = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), p, p, sign_of(dir),
                                FFTW_ESTIMATE);
  if (!plan.plan_) throw std::bad_alloc();
  return plan;
}

FftPlan::FftPlan(FftPlan&& o) noexcept : plan_(std::exchange(o.plan_, nullptr)) {}

FftPlan& FftPlan::operator=(FftPlan&& o) noexcept {
  if (this != &o) {
    this->~FftPlan();
    plan_ = std::exchange(o.plan_, nullptr);
  }
  return *this;
}

FftPlan::~FftPlan() {
  if (plan_) {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_));
    plan_ = nullptr;
  }
}

void FftPlan::execute(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(plan_), p, p);
}

FftBuffer::FftBuffer(std::size_t n) : size_(n) {
  data_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
  if (!data_ && n > 0) throw std::bad_alloc();
  for (std::size_t i = 0; i < n; ++i) data_[i] = 0.0;
}

FftBuffer::FftBuffer(FftBuffer&& o) noexcept
    : data_(std::exchange(o.data_, nullptr)), size_(std::exchange(o.size_, 0)) {}

FftBuffer& FftBuffer::operator=(FftBuffer&& o) noexcept {
  if (this != &o) {
    if (data_) fftw_free(data_);
    data_ = std::exchange(o.data_, nullptr);
    size_ = std::exchange(o.size_, 0);
  }
  return *this;
}

FftBuffer::~FftBuffer() {
  if (data_) fftw_free(data_);
}

double wavenumber(std::size_t index, std::size_t n, double dx) {
  const auto i = static_cast<std::ptrdiff_t>(index);
  const auto m = i < static_cast<std::ptrdiff_t>(n / 2) ? i : i - static_cast<std::ptrdiff_t>(n);
  return 2.0 * std::numbers::pi * static_cast<double>(m) / (static_cast<double>(n) * dx);
}

}  // namespace levcool::detail
