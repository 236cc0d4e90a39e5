// Dense kernels behind the tape. Every kernel has a plain serial reference
// implementation and an OpenMP implementation with the same signature. The
// parallel versions partition work by output element, so each output is
// accumulated in the same order regardless of thread count.

#ifndef RELNN_KERNELS_HPP_
#define RELNN_KERNELS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

namespace relnn::kernels {

// Bags of ids in CSR form: bag b owns ids[offsets[b] .. offsets[b + 1]).
struct BagView {
  std::span<const std::uint32_t> ids;
  std::span<const std::size_t> offsets;

  std::size_t size() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

#define RELNN_DECLARE_KERNELS                                                  \
  /* c[n,q] (+)= a[n,p] * b[p,q] */                                            \
  template <typename T>                                                        \
  void gemm(std::size_t n, std::size_t p, std::size_t q, const T* a,           \
            const T* b, T* c, bool accumulate);                                \
  /* c[p,q] (+)= a[n,p]^T * b[n,q] */                                          \
  template <typename T>                                                        \
  void gemm_at_b(std::size_t n, std::size_t p, std::size_t q, const T* a,      \
                 const T* b, T* c, bool accumulate);                           \
  /* c[n,p] (+)= a[n,q] * b[p,q]^T */                                          \
  template <typename T>                                                        \
  void gemm_a_bt(std::size_t n, std::size_t q, std::size_t p, const T* a,      \
                 const T* b, T* c, bool accumulate);                           \
  /* out[q] += sum over rows of x[n,q] */                                      \
  template <typename T>                                                        \
  void column_sum(std::size_t n, std::size_t q, const T* x, T* out);          \
  /* out[b, :] = sum of table rows in bag b / sqrt(max(|bag|, 1)) */           \
  template <typename T>                                                        \
  void embed_bag(BagView bags, const T* table, std::size_t dim, T* out);       \
  /* table_grad[id, :] += out_grad[b, :] / sqrt(max(|bag|, 1)) */             \
  template <typename T>                                                        \
  void embed_bag_backward(BagView bags, const T* out_grad, std::size_t dim,    \
                          std::size_t table_rows, T* table_grad);              \
  /* out[r, :] = a[ia[r], :] + b[ib[r], :] + bias */                           \
  template <typename T>                                                        \
  void gather_add(std::span<const std::uint32_t> ia,                           \
                  std::span<const std::uint32_t> ib, const T* a, const T* b,   \
                  const T* bias, std::size_t width, T* out);                   \
  /* grad[idx[r], :] += out_grad[r, :] for a source of `rows` rows */          \
  template <typename T>                                                        \
  void scatter_add(std::span<const std::uint32_t> idx, const T* out_grad,      \
                   std::size_t width, std::size_t rows, T* grad);

namespace serial {
RELNN_DECLARE_KERNELS
}  // namespace serial

namespace parallel {
RELNN_DECLARE_KERNELS
}  // namespace parallel

#undef RELNN_DECLARE_KERNELS

// Caps OpenMP parallelism; values < 1 are ignored.
void set_num_threads(int threads);
int max_threads();

// Reads RELNN_THREADS and applies it when set.
void apply_thread_env();

}  // namespace relnn::kernels

#endif  // RELNN_KERNELS_HPP_
