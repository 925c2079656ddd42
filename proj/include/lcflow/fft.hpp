#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

namespace lcflow::detail {

// FFTW planning is not thread safe; execution on distinct arrays is. Plans are
// created once per (size, sign) with FFTW_ESTIMATE so results are reproducible
// run to run, and with FFTW_UNALIGNED so any std::vector buffer may be passed.
class FftPlans {
 public:
  static FftPlans& instance() {
    static FftPlans plans;
    return plans;
  }

  fftw_plan get(int m, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(m, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> scratch(static_cast<std::size_t>(m) * m);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft_2d(m, m, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  ~FftPlans() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  FftPlans() = default;
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

/// Unnormalised in-place 2-D DFT of an m x m row-major array.
inline void fft2d(std::span<std::complex<double>> data, int m, int sign) {
  fftw_plan plan = FftPlans::instance().get(m, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace lcflow::detail
