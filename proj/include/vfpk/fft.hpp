#pragma once

#include <complex>
#include <vector>

namespace vfpk {

using Spectrum = std::vector<std::complex<double>>;

// Multidimensional real-to-complex transform of a fixed row-major shape.
// Plans are shared across instances with the same shape; execution is
// reentrant because every call supplies its own arrays.
class RealFft {
 public:
  explicit RealFft(std::vector<int> shape);

  const std::vector<int>& shape() const { return shape_; }
  std::size_t real_size() const { return real_size_; }
  std::size_t complex_size() const { return complex_size_; }

  Spectrum forward(const std::vector<double>& in) const;
  // Unnormalized inverse: inverse(forward(x)) = real_size() * x.
  std::vector<double> inverse(const Spectrum& in) const;

 private:
  std::vector<int> shape_;
  std::size_t real_size_ = 0;
  std::size_t complex_size_ = 0;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

}  // namespace vfpk
