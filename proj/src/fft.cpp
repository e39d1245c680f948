#include "vfpk/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace vfpk {

namespace {

struct PlanPair {
  fftw_plan fwd;
  fftw_plan inv;
};

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

PlanPair get_plans(const std::vector<int>& shape, std::size_t nreal, std::size_t ncomplex) {
  static std::map<std::vector<int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(planner_mutex());
  auto it = cache.find(shape);
  if (it != cache.end()) return it->second;
  double* r = fftw_alloc_real(nreal);
  fftw_complex* c = fftw_alloc_complex(ncomplex);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  const int rank = static_cast<int>(shape.size());
  PlanPair p{fftw_plan_dft_r2c(rank, shape.data(), r, c, flags),
             fftw_plan_dft_c2r(rank, shape.data(), c, r, flags)};
  fftw_free(r);
  fftw_free(c);
  cache.emplace(shape, p);
  return p;
}

}  // namespace

RealFft::RealFft(std::vector<int> shape) : shape_(std::move(shape)) {
  real_size_ = 1;
  for (int n : shape_) real_size_ *= static_cast<std::size_t>(n);
  complex_size_ = real_size_ / shape_.back() * (shape_.back() / 2 + 1);
  auto p = get_plans(shape_, real_size_, complex_size_);
  plan_fwd_ = p.fwd;
  plan_inv_ = p.inv;
}

Spectrum RealFft::forward(const std::vector<double>& in) const {
  std::vector<double> buf(in);
  Spectrum out(complex_size_);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), buf.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> RealFft::inverse(const Spectrum& in) const {
  Spectrum buf(in);  // c2r overwrites its input
  std::vector<double> out(real_size_);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_),
                       reinterpret_cast<fftw_complex*>(buf.data()), out.data());
  return out;
}

}  // namespace vfpk
