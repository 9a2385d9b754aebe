// Times the OpenMP kernels against the single-threaded reference lane and
// verifies the outputs stay bit-identical while the clock runs.

#include <chrono>
#include <cstdio>
#include <algorithm>
#include <functional>
#include <omp.h>

#include "neoscan/imgcore.hpp"
#include "neoscan/kernels.hpp"
#include "neoscan/matrix.hpp"
#include "neoscan/rng.hpp"
#include "neoscan/tensor.hpp"
#include "reference.hpp"

using namespace neoscan;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const std::chrono::duration<double, std::milli> dt =
      std::chrono::steady_clock::now() - start;
  return dt.count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-16s %10.3f ms %10.3f ms   x%5.2f   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, identical ? "bitwise-equal" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-16s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

  Rng rng(9000);

  {
    GrayImage img(1024, 1024);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    const GaussianKernel k = gaussian_kernel(2.0);
    GrayImage a, b;
    const double s = time_ms([&] { a = ref::gaussian_blur(img, k); }, 5);
    const double p = time_ms([&] { b = gaussian_blur(img, k); }, 5);
    row("gaussian_blur", s, p, a == b);
  }

  {
    GrayImage img(1024, 1024);
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
    SobelGradients a, b;
    const double s = time_ms([&] { a = ref::sobel_gradients(img); }, 5);
    const double p = time_ms([&] { b = sobel_gradients(img); }, 5);
    row("sobel", s, p, a.gx == b.gx && a.gy == b.gy);
  }

  {
    Tensor in(32, 64, 64);
    for (auto& v : in.v) v = rng.uniform();
    const int out_c = 64;
    std::vector<double> w(static_cast<std::size_t>(out_c) * 32 * 9), b(out_c);
    for (auto& v : w) v = rng.uniform(-0.1, 0.1);
    Tensor oa, ob;
    const double s = time_ms([&] { ref::conv3x3_relu(in, w, b, out_c, oa); }, 3);
    const double p = time_ms([&] { kernels::conv3x3_relu(in, w, b, out_c, ob); }, 3);
    row("conv3x3_relu", s, p, oa == ob);
  }

  {
    Tensor in(16, 40, 40);
    for (auto& v : in.v) v = rng.uniform();
    const int out_c = 32;
    std::vector<double> w(static_cast<std::size_t>(out_c) * 16 * 9), b(out_c);
    for (auto& v : w) v = rng.uniform(-0.1, 0.1);
    Tensor out;
    kernels::conv3x3_relu(in, w, b, out_c, out);
    Tensor gout = out;
    for (auto& v : gout.v) v = rng.uniform();

    Tensor gin_a, gin_b;
    std::vector<double> gwa(w.size()), gba(b.size()), gwb(w.size()), gbb(b.size());
    const double s = time_ms(
        [&] {
          std::fill(gwa.begin(), gwa.end(), 0.0);
          std::fill(gba.begin(), gba.end(), 0.0);
          ref::conv3x3_backward(in, out, gout, w, out_c, gin_a, gwa, gba);
        },
        3);
    const double p = time_ms(
        [&] {
          std::fill(gwb.begin(), gwb.end(), 0.0);
          std::fill(gbb.begin(), gbb.end(), 0.0);
          kernels::conv3x3_backward(in, out, gout, w, out_c, gin_b, gwb, gbb);
        },
        3);
    row("conv3x3_bwd", s, p, gin_a == gin_b && gwa == gwb && gba == gbb);
  }

  {
    Matrix X(600, 40);
    for (auto& v : X.v) v = rng.uniform();
    Matrix a, b;
    const double s = time_ms([&] { ref::rbf_gram(X, 0.5, a); }, 3);
    const double p = time_ms([&] { kernels::rbf_gram(X, 0.5, b); }, 3);
    row("rbf_gram", s, p, a == b);
  }

  return 0;
}
