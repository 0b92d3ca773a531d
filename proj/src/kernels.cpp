#include "cfb/kernels.hpp"

#include <cstdlib>

namespace cfb::kernels {

namespace scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

double sum(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v;
    return acc;
}

double squared_norm(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return acc;
}

}  // namespace scalar

namespace {

struct Dispatch {
    double (*dot)(std::span<const double>, std::span<const double>);
    void (*axpy)(double, std::span<const double>, std::span<double>);
    double (*sum)(std::span<const double>);
    double (*squared_norm)(std::span<const double>);
    std::string_view name;
};

Dispatch select_backend() {
#ifdef CFB_KERNELS_AVX2
    const char* force = std::getenv("CFB_FORCE_SCALAR");
    const bool forced_scalar = force != nullptr && force[0] == '1';
    if (!forced_scalar && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return {avx2::dot, avx2::axpy, avx2::sum, avx2::squared_norm, "avx2"};
    }
#endif
    return {scalar::dot, scalar::axpy, scalar::sum, scalar::squared_norm, "scalar"};
}

const Dispatch& backend() {
    static const Dispatch d = select_backend();
    return d;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) { return backend().dot(a, b); }
void axpy(double alpha, std::span<const double> x, std::span<double> y) { backend().axpy(alpha, x, y); }
double sum(std::span<const double> a) { return backend().sum(a); }
double squared_norm(std::span<const double> a) { return backend().squared_norm(a); }
std::string_view active_backend() { return backend().name; }

}  // namespace cfb::kernels
