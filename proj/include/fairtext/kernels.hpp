#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision kernels used by the classifier, the near-duplicate
// scan and the explanation surrogate. Every routine has a scalar reference
// implementation; wider variants are selected once at startup from the CPU
// feature set and must agree with the reference to rounding.
namespace fairtext::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* x, const double* y, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // out[r] = dot(rows[r * stride .. + cols], v) for r in [0, n_rows)
  void (*gemv)(const double* rows, std::size_t n_rows, std::size_t cols,
               std::size_t stride, const double* v, double* out);
};

const KernelTable& scalar_table();
// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_table();

// The table in use. Honors FAIRTEXT_ISA=scalar|avx2 from the environment on
// first use; force_isa() overrides it afterwards (tests only).
const KernelTable& active();
bool force_isa(Isa isa);
std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}
inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}

}  // namespace fairtext::kernels
