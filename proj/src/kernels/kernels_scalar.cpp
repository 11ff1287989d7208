#include "fairtext/kernels.hpp"

namespace fairtext::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void gemv_scalar(const double* rows, std::size_t n_rows, std::size_t cols,
                 std::size_t stride, const double* v, double* out) {
  for (std::size_t r = 0; r < n_rows; ++r) out[r] = dot_scalar(rows + r * stride, v, cols);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::Scalar, dot_scalar, axpy_scalar, sum_squares_scalar,
                                 gemv_scalar};
  return table;
}

}  // namespace fairtext::kernels
