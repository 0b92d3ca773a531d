#ifndef CFB_KERNELS_HPP
#define CFB_KERNELS_HPP

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops. Scalar reference implementations always exist;
// on x86-64 an AVX2/FMA variant is compiled as well and selected once at
// startup based on cpuid. Set CFB_FORCE_SCALAR=1 in the environment to pin
// the scalar path.
namespace cfb::kernels {

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> a);
double squared_norm(std::span<const double> a);
}  // namespace scalar

#ifdef CFB_KERNELS_AVX2
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> a);
double squared_norm(std::span<const double> a);
}  // namespace avx2
#endif

// Dispatched entry points.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> a);
double squared_norm(std::span<const double> a);

// "scalar" or "avx2".
std::string_view active_backend();

}  // namespace cfb::kernels

#endif
