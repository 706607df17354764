#include "qdual/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace qdual {
namespace {

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex& plan_mutex() {
  static std::mutex mu;
  return mu;
}

// FFTW planning is not thread safe; new-array execution is. Plans are created
// once per (dim, n) with FFTW_UNALIGNED so they accept std::vector storage.
PlanPair& plan_for(int dim, int n) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_pair(dim, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
  std::vector<std::complex<double>> a(total), b(total);
  std::vector<int> shape(dim, n);
  PlanPair p;
  p.fwd = fftw_plan_dft(dim, shape.data(),
                        reinterpret_cast<fftw_complex*>(a.data()),
                        reinterpret_cast<fftw_complex*>(b.data()),
                        FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft(dim, shape.data(),
                        reinterpret_cast<fftw_complex*>(a.data()),
                        reinterpret_cast<fftw_complex*>(b.data()),
                        FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p.fwd || !p.bwd) throw std::runtime_error("fftw planning failed");
  return cache.emplace(key, p).first->second;
}

}  // namespace

std::vector<std::complex<double>> dft_forward(int dim, int n,
                                              const std::vector<std::complex<double>>& in) {
  PlanPair& p = plan_for(dim, n);
  std::vector<std::complex<double>> src(in), out(in.size());
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<std::complex<double>> dft_inverse(int dim, int n,
                                              const std::vector<std::complex<double>>& in) {
  PlanPair& p = plan_for(dim, n);
  std::vector<std::complex<double>> src(in), out(in.size());
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(in.size());
  for (auto& z : out) z *= scale;
  return out;
}

}  // namespace qdual
