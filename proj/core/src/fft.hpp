#pragma once

#include <complex>
#include <cstddef>
#include <memory>

namespace levcool::detail {

using cplx = std::complex<double>;

/// Owning handle to an FFTW plan for in-place complex transforms.
///
/// Planning is serialised behind a global mutex; execution on other arrays
/// of the same layout is thread-safe. Buffers must come from `FftBuffer`.
class FftPlan {
 public:
  enum class Direction { forward, backward };

  /// `howmany` contiguous rows of length `n`.
  static FftPlan rows(std::size_t n, std::size_t howmany, Direction dir);
  /// One `n0` x `n1` row-major 2D transform.
  static FftPlan grid(std::size_t n0, std::size_t n1, Direction dir);

  FftPlan() = default;
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan();

  void execute(cplx* data) const;
  explicit operator bool() const { return plan_ != nullptr; }

 private:
  void* plan_ = nullptr;
};

/// SIMD-aligned complex buffer.
class FftBuffer {
 public:
  FftBuffer() = default;
  explicit FftBuffer(std::size_t n);
  FftBuffer(FftBuffer&&) noexcept;
  FftBuffer& operator=(FftBuffer&&) noexcept;
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
  ~FftBuffer();

  cplx* data() { return data_; }
  const cplx* data() const { return data_; }
  std::size_t size() const { return size_; }
  cplx& operator[](std::size_t i) { return data_[i]; }
  const cplx& operator[](std::size_t i) const { return data_[i]; }

 private:
  cplx* data_ = nullptr;
  std::size_t size_ = 0;
};

/// Angular wavenumbers in FFT order for n samples of spacing dx.
double wavenumber(std::size_t index, std::size_t n, double dx);

}  // namespace levcool::detail
