#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fairtext/kernels.hpp"

using namespace fairtext::kernels;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0, 1);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void close(double a, double b, double scale) { CHECK(std::abs(a - b) <= 1e-12 * (1 + scale)); }

}  // namespace

TEST_CASE("scalar reference kernels") {
  const auto& s = scalar_table();
  std::vector<double> x{1, 2, 3}, y{4, 5, 6};
  CHECK(s.dot(x.data(), y.data(), 3) == 32);
  CHECK(s.sum_squares(x.data(), 3) == 14);
  s.axpy(2, x.data(), y.data(), 3);
  CHECK(y == std::vector<double>{6, 9, 12});
  std::vector<double> rows{1, 0, 9, 0, 1, 9}, v{3, 4}, out(2);
  s.gemv(rows.data(), 2, 2, 3, v.data(), out.data());
  CHECK(out == std::vector<double>{3, 4});
}

TEST_CASE("AVX2 kernels agree with the scalar reference") {
  const KernelTable* avx = avx2_table();
  if (!avx) {
    MESSAGE("AVX2 variant unavailable on this machine; skipped");
    return;
  }
  const auto& s = scalar_table();
  std::mt19937_64 rng(1);
  for (std::size_t n = 0; n < 70; ++n) {
    auto x = random_vec(rng, n), y = random_vec(rng, n);
    double scale = n ? s.sum_squares(x.data(), n) + s.sum_squares(y.data(), n) : 0;
    close(avx->dot(x.data(), y.data(), n), s.dot(x.data(), y.data(), n), scale);
    close(avx->sum_squares(x.data(), n), s.sum_squares(x.data(), n), scale);
    auto ya = y, ys = y;
    avx->axpy(0.37, x.data(), ya.data(), n);
    s.axpy(0.37, x.data(), ys.data(), n);
    for (std::size_t i = 0; i < n; ++i) close(ya[i], ys[i], 1);
  }
  for (std::size_t cols : {1u, 4u, 7u, 33u}) {
    std::size_t stride = cols + 3, rows = 9;
    auto m = random_vec(rng, rows * stride), v = random_vec(rng, cols);
    std::vector<double> a(rows), b(rows);
    avx->gemv(m.data(), rows, cols, stride, v.data(), a.data());
    s.gemv(m.data(), rows, cols, stride, v.data(), b.data());
    for (std::size_t r = 0; r < rows; ++r) close(a[r], b[r], static_cast<double>(cols));
  }
}

TEST_CASE("ISA can be forced") {
  CHECK(force_isa(Isa::Scalar));
  CHECK(active().isa == Isa::Scalar);
  CHECK(isa_name(Isa::Scalar) == "scalar");
  if (avx2_table()) {
    CHECK(force_isa(Isa::Avx2));
    CHECK(active().isa == Isa::Avx2);
  } else {
    CHECK_FALSE(force_isa(Isa::Avx2));
  }
}
