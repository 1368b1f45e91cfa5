#include "msgp/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace msgp::fft {

namespace {

// Plan creation is not thread-safe in FFTW; execution with new arrays is.
// Plans are cached per (shape, sign) and created with FFTW_UNALIGNED so that
// they can execute on arbitrary caller buffers.
struct PlanCache {
  std::mutex mu;
  std::map<std::pair<std::vector<int>, int>, fftw_plan> plans;

  fftw_plan get(const std::vector<int>& shape, int sign) {
    std::scoped_lock lock(mu);
    auto key = std::make_pair(shape, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::size_t total = 1;
    for (int s : shape) total *= static_cast<std::size_t>(s);
    std::vector<fftw_complex> scratch_in(total), scratch_out(total);
    fftw_plan p = fftw_plan_dft(static_cast<int>(shape.size()), shape.data(),
                                scratch_in.data(), scratch_out.data(), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p) throw std::runtime_error("fftw plan creation failed");
    plans.emplace(std::move(key), p);
    return p;
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void execute(const std::vector<int>& shape, int sign, const Complex* in, Complex* out) {
  std::size_t total = 1;
  for (int s : shape) {
    if (s <= 0) throw std::invalid_argument("fft: shape entries must be positive");
    total *= static_cast<std::size_t>(s);
  }
  fftw_plan p = cache().get(shape, sign);
  // out-of-place c2c transforms leave the input untouched
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  if (sign == FFTW_BACKWARD) {
    const double scale = 1.0 / static_cast<double>(total);
    for (std::size_t i = 0; i < total; ++i) out[i] *= scale;
  }
}

}  // namespace

void forward(std::size_t n, const Complex* in, Complex* out) {
  execute({static_cast<int>(n)}, FFTW_FORWARD, in, out);
}

void inverse(std::size_t n, const Complex* in, Complex* out) {
  execute({static_cast<int>(n)}, FFTW_BACKWARD, in, out);
}

void forward_nd(const std::vector<int>& shape, const Complex* in, Complex* out) {
  execute(shape, FFTW_FORWARD, in, out);
}

void inverse_nd(const std::vector<int>& shape, const Complex* in, Complex* out) {
  execute(shape, FFTW_BACKWARD, in, out);
}

std::vector<Complex> forward(const std::vector<Complex>& in) {
  std::vector<Complex> out(in.size());
  forward(in.size(), in.data(), out.data());
  return out;
}

std::vector<Complex> inverse(const std::vector<Complex>& in) {
  std::vector<Complex> out(in.size());
  inverse(in.size(), in.data(), out.data());
  return out;
}

}  // namespace msgp::fft
