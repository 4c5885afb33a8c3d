#include <atomic>
#include <cstdlib>
#include <string>

#include "impl.hpp"
#include "netdiff/error.hpp"

namespace netdiff::kernels {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_table() noexcept { return detail::kScalarTable; }

const KernelTable* avx2_table() noexcept {
#if defined(NETDIFF_HAVE_AVX2_TU)
  return &detail::kAvx2Table;
#else
  return nullptr;
#endif
}

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(NETDIFF_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

namespace {

const KernelTable* initial_table() noexcept {
  const char* env = std::getenv("NETDIFF_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_table();
  if (cpu_supports(Isa::Avx2)) return avx2_table();
  return &scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

void check_len(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::LengthMismatch, "kernel operands differ in length");
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) {
  if (!cpu_supports(isa)) {
    throw Error(ErrorCode::InvalidArgument,
                "ISA " + std::string(to_string(isa)) + " not available on this build/CPU");
  }
  current().store(isa == Isa::Avx2 ? avx2_table() : &scalar_table(), std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_len(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_len(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const Matrix& a, std::span<const double> x, std::span<double> y) {
  check_len(a.cols(), x.size());
  check_len(a.rows(), y.size());
  active().gemv(a.data().data(), a.rows(), a.cols(), x.data(), y.data());
}

void gemv_t(const Matrix& a, std::span<const double> w, std::span<double> y) {
  check_len(a.rows(), w.size());
  check_len(a.cols(), y.size());
  active().gemv_t(a.data().data(), a.rows(), a.cols(), w.data(), y.data());
}

void bernoulli_threshold(std::span<const double> u, std::span<const double> p,
                         std::span<std::uint8_t> out) {
  check_len(u.size(), p.size());
  check_len(u.size(), out.size());
  active().threshold(u.data(), p.data(), out.data(), u.size());
}

void soft_threshold(std::span<double> v, double t) {
  active().soft_threshold(v.data(), t, v.size());
}

}  // namespace netdiff::kernels
