#include "relnn/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace relnn::kernels {

namespace serial {

template <typename T>
void gemm(std::size_t n, std::size_t p, std::size_t q, const T* a, const T* b,
          T* c, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      T acc = accumulate ? c[i * q + j] : T{0};
      for (std::size_t k = 0; k < p; ++k) acc += a[i * p + k] * b[k * q + j];
      c[i * q + j] = acc;
    }
  }
}

template <typename T>
void gemm_at_b(std::size_t n, std::size_t p, std::size_t q, const T* a,
               const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < q; ++j) {
      T acc = accumulate ? c[i * q + j] : T{0};
      for (std::size_t k = 0; k < n; ++k) acc += a[k * p + i] * b[k * q + j];
      c[i * q + j] = acc;
    }
  }
}

template <typename T>
void gemm_a_bt(std::size_t n, std::size_t q, std::size_t p, const T* a,
               const T* b, T* c, bool accumulate) {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      T acc = accumulate ? c[i * p + j] : T{0};
      for (std::size_t k = 0; k < q; ++k) acc += a[i * q + k] * b[j * q + k];
      c[i * p + j] = acc;
    }
  }
}

template <typename T>
void column_sum(std::size_t n, std::size_t q, const T* x, T* out) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < q; ++j) out[j] += x[r * q + j];
  }
}

template <typename T>
void embed_bag(BagView bags, const T* table, std::size_t dim, T* out) {
  for (std::size_t bag = 0; bag < bags.size(); ++bag) {
    const std::size_t begin = bags.offsets[bag];
    const std::size_t end = bags.offsets[bag + 1];
    T* dst = out + bag * dim;
    std::fill(dst, dst + dim, T{0});
    for (std::size_t t = begin; t < end; ++t) {
      const T* src = table + static_cast<std::size_t>(bags.ids[t]) * dim;
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
    }
    const T scale = T{1} / std::sqrt(static_cast<T>(std::max<std::size_t>(end - begin, 1)));
    for (std::size_t j = 0; j < dim; ++j) dst[j] *= scale;
  }
}

template <typename T>
void embed_bag_backward(BagView bags, const T* out_grad, std::size_t dim,
                        std::size_t /*table_rows*/, T* table_grad) {
  for (std::size_t bag = 0; bag < bags.size(); ++bag) {
    const std::size_t begin = bags.offsets[bag];
    const std::size_t end = bags.offsets[bag + 1];
    const T scale = T{1} / std::sqrt(static_cast<T>(std::max<std::size_t>(end - begin, 1)));
    const T* src = out_grad + bag * dim;
    for (std::size_t t = begin; t < end; ++t) {
      T* dst = table_grad + static_cast<std::size_t>(bags.ids[t]) * dim;
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j] * scale;
    }
  }
}

template <typename T>
void gather_add(std::span<const std::uint32_t> ia,
                std::span<const std::uint32_t> ib, const T* a, const T* b,
                const T* bias, std::size_t width, T* out) {
  for (std::size_t r = 0; r < ia.size(); ++r) {
    const T* ra = a + static_cast<std::size_t>(ia[r]) * width;
    const T* rb = b + static_cast<std::size_t>(ib[r]) * width;
    for (std::size_t j = 0; j < width; ++j) {
      out[r * width + j] = ra[j] + rb[j] + (bias ? bias[j] : T{0});
    }
  }
}

template <typename T>
void scatter_add(std::span<const std::uint32_t> idx, const T* out_grad,
                 std::size_t width, std::size_t /*rows*/, T* grad) {
  for (std::size_t r = 0; r < idx.size(); ++r) {
    T* dst = grad + static_cast<std::size_t>(idx[r]) * width;
    for (std::size_t j = 0; j < width; ++j) dst[j] += out_grad[r * width + j];
  }
}

}  // namespace serial

namespace parallel {
namespace {

// Rows of the output handled together; columns per register tile.
constexpr std::size_t kRowBlock = 4;
template <typename T>
constexpr std::size_t kColTile = 64 / sizeof(T);

// c[i, :] (+)= sum_k a(i, k) * b[k, :], with a(i, k) = a[i * ars + k * acs].
// The reduction dimension is processed in chunks so the streamed rows of b
// stay cache resident; within a chunk each output element is owned by one
// iteration of the parallel loop and k always advances in order.
template <typename T>
void gemm_strided(std::size_t n, std::size_t p, std::size_t q, const T* a,
                  std::size_t ars, std::size_t acs, const T* b, T* c,
                  bool accumulate) {
  constexpr std::size_t kTile = kColTile<T>;
  constexpr std::size_t kDepth = 256;
  if (q == 1) {
    // Matrix-vector product: one dot product per output row.
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n * p > 16384)
    for (std::ptrdiff_t r = 0; r < rows; ++r) {
      const T* arow = a + static_cast<std::size_t>(r) * ars;
      T acc{0};
#pragma omp simd reduction(+ : acc)
      for (std::size_t k = 0; k < p; ++k) acc += arow[k * acs] * b[k];
      c[r] = accumulate ? c[r] + acc : acc;
    }
    return;
  }
  const auto blocks = static_cast<std::ptrdiff_t>((n + kRowBlock - 1) / kRowBlock);
  if (!accumulate) std::fill(c, c + n * q, T{0});
  for (std::size_t k0 = 0; k0 < p; k0 += kDepth) {
    const std::size_t k1 = std::min(p, k0 + kDepth);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
      const std::size_t i0 = static_cast<std::size_t>(blk) * kRowBlock;
      const std::size_t rows = std::min(kRowBlock, n - i0);
      std::size_t j0 = 0;
      if (rows == kRowBlock) {
        for (; j0 + kTile <= q; j0 += kTile) {
          T acc[kRowBlock][kTile];
          for (std::size_t r = 0; r < kRowBlock; ++r) {
            for (std::size_t j = 0; j < kTile; ++j) acc[r][j] = c[(i0 + r) * q + j0 + j];
          }
          for (std::size_t k = k0; k < k1; ++k) {
            const T* brow = b + k * q + j0;
            const T a0 = a[(i0 + 0) * ars + k * acs];
            const T a1 = a[(i0 + 1) * ars + k * acs];
            const T a2 = a[(i0 + 2) * ars + k * acs];
            const T a3 = a[(i0 + 3) * ars + k * acs];
#pragma omp simd
            for (std::size_t j = 0; j < kTile; ++j) {
              acc[0][j] += a0 * brow[j];
              acc[1][j] += a1 * brow[j];
              acc[2][j] += a2 * brow[j];
              acc[3][j] += a3 * brow[j];
            }
          }
          for (std::size_t r = 0; r < kRowBlock; ++r) {
            for (std::size_t j = 0; j < kTile; ++j) c[(i0 + r) * q + j0 + j] = acc[r][j];
          }
        }
      }
      // Row or column remainder.
      for (std::size_t r = 0; r < rows; ++r) {
        T* crow = c + (i0 + r) * q;
        for (std::size_t k = k0; k < k1; ++k) {
          const T av = a[(i0 + r) * ars + k * acs];
          const T* brow = b + k * q;
          for (std::size_t j = j0; j < q; ++j) crow[j] += av * brow[j];
        }
      }
    }
  }
}

// Splits [0, rows) into one contiguous range per thread.
inline std::pair<std::size_t, std::size_t> thread_range(std::size_t rows) {
  const auto threads = static_cast<std::size_t>(omp_get_num_threads());
  const auto tid = static_cast<std::size_t>(omp_get_thread_num());
  const std::size_t chunk = (rows + threads - 1) / threads;
  const std::size_t lo = std::min(rows, tid * chunk);
  return {lo, std::min(rows, lo + chunk)};
}

}  // namespace

template <typename T>
void gemm(std::size_t n, std::size_t p, std::size_t q, const T* a, const T* b,
          T* c, bool accumulate) {
  gemm_strided(n, p, q, a, p, 1, b, c, accumulate);
}

template <typename T>
void gemm_at_b(std::size_t n, std::size_t p, std::size_t q, const T* a,
               const T* b, T* c, bool accumulate) {
  gemm_strided(p, n, q, a, 1, p, b, c, accumulate);
}

template <typename T>
void gemm_a_bt(std::size_t n, std::size_t q, std::size_t p, const T* a,
               const T* b, T* c, bool accumulate) {
  std::vector<T> bt(q * p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < q; ++k) bt[k * p + i] = b[i * q + k];
  }
  gemm_strided(n, q, p, a, q, 1, bt.data(), c, accumulate);
}

template <typename T>
void column_sum(std::size_t n, std::size_t q, const T* x, T* out) {
  const auto cols = static_cast<std::ptrdiff_t>(q);
#pragma omp parallel for schedule(static) if (n * q > 65536)
  for (std::ptrdiff_t j = 0; j < cols; ++j) {
    T acc = out[j];
    for (std::size_t r = 0; r < n; ++r) acc += x[r * q + static_cast<std::size_t>(j)];
    out[j] = acc;
  }
}

template <typename T>
void embed_bag(BagView bags, const T* table, std::size_t dim, T* out) {
  const auto count = static_cast<std::ptrdiff_t>(bags.size());
#pragma omp parallel for schedule(static) if (count > 64)
  for (std::ptrdiff_t bag = 0; bag < count; ++bag) {
    const std::size_t begin = bags.offsets[static_cast<std::size_t>(bag)];
    const std::size_t end = bags.offsets[static_cast<std::size_t>(bag) + 1];
    T* dst = out + static_cast<std::size_t>(bag) * dim;
    std::fill(dst, dst + dim, T{0});
    for (std::size_t t = begin; t < end; ++t) {
      const T* src = table + static_cast<std::size_t>(bags.ids[t]) * dim;
#pragma omp simd
      for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j];
    }
    const T scale = T{1} / std::sqrt(static_cast<T>(std::max<std::size_t>(end - begin, 1)));
    for (std::size_t j = 0; j < dim; ++j) dst[j] *= scale;
  }
}

template <typename T>
void embed_bag_backward(BagView bags, const T* out_grad, std::size_t dim,
                        std::size_t table_rows, T* table_grad) {
  // Each thread owns a contiguous band of table rows and scans every bag, so
  // a row's contributions are always added in bag order.
#pragma omp parallel if (bags.ids.size() > 4096)
  {
    const auto [lo, hi] = thread_range(table_rows);
    for (std::size_t bag = 0; bag < bags.size(); ++bag) {
      const std::size_t begin = bags.offsets[bag];
      const std::size_t end = bags.offsets[bag + 1];
      const T scale = T{1} / std::sqrt(static_cast<T>(std::max<std::size_t>(end - begin, 1)));
      const T* src = out_grad + bag * dim;
      for (std::size_t t = begin; t < end; ++t) {
        const std::size_t id = bags.ids[t];
        if (id < lo || id >= hi) continue;
        T* dst = table_grad + id * dim;
        for (std::size_t j = 0; j < dim; ++j) dst[j] += src[j] * scale;
      }
    }
  }
}

template <typename T>
void gather_add(std::span<const std::uint32_t> ia,
                std::span<const std::uint32_t> ib, const T* a, const T* b,
                const T* bias, std::size_t width, T* out) {
  const auto count = static_cast<std::ptrdiff_t>(ia.size());
#pragma omp parallel for schedule(static) if (count > 256)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const std::size_t row = static_cast<std::size_t>(r);
    const T* ra = a + static_cast<std::size_t>(ia[row]) * width;
    const T* rb = b + static_cast<std::size_t>(ib[row]) * width;
    T* dst = out + row * width;
    if (bias) {
#pragma omp simd
      for (std::size_t j = 0; j < width; ++j) dst[j] = ra[j] + rb[j] + bias[j];
    } else {
#pragma omp simd
      for (std::size_t j = 0; j < width; ++j) dst[j] = ra[j] + rb[j] + T{0};
    }
  }
}

template <typename T>
void scatter_add(std::span<const std::uint32_t> idx, const T* out_grad,
                 std::size_t width, std::size_t rows, T* grad) {
#pragma omp parallel if (idx.size() > 4096)
  {
    const auto [lo, hi] = thread_range(rows);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const std::size_t target = idx[r];
      if (target < lo || target >= hi) continue;
      T* dst = grad + target * width;
      const T* src = out_grad + r * width;
#pragma omp simd
      for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
    }
  }
}

}  // namespace parallel

#define RELNN_INSTANTIATE(NS, T)                                               \
  template void NS::gemm<T>(std::size_t, std::size_t, std::size_t, const T*,  \
                            const T*, T*, bool);                               \
  template void NS::gemm_at_b<T>(std::size_t, std::size_t, std::size_t,        \
                                 const T*, const T*, T*, bool);                \
  template void NS::gemm_a_bt<T>(std::size_t, std::size_t, std::size_t,        \
                                 const T*, const T*, T*, bool);                \
  template void NS::column_sum<T>(std::size_t, std::size_t, const T*, T*);     \
  template void NS::embed_bag<T>(BagView, const T*, std::size_t, T*);          \
  template void NS::embed_bag_backward<T>(BagView, const T*, std::size_t,      \
                                          std::size_t, T*);                    \
  template void NS::gather_add<T>(std::span<const std::uint32_t>,              \
                                  std::span<const std::uint32_t>, const T*,    \
                                  const T*, const T*, std::size_t, T*);        \
  template void NS::scatter_add<T>(std::span<const std::uint32_t>, const T*,   \
                                   std::size_t, std::size_t, T*);

RELNN_INSTANTIATE(serial, float)
RELNN_INSTANTIATE(serial, double)
RELNN_INSTANTIATE(parallel, float)
RELNN_INSTANTIATE(parallel, double)

#undef RELNN_INSTANTIATE

void set_num_threads(int threads) {
  if (threads >= 1) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

void apply_thread_env() {
  if (const char* env = std::getenv("RELNN_THREADS")) {
    try {
      set_num_threads(std::stoi(env));
    } catch (const std::exception&) {
      // Malformed values leave the OpenMP default in place.
    }
  }
}

}  // namespace relnn::kernels
