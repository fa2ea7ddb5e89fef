#pragma once

// Small SIMD helpers shared by the harmonic accumulation and grid synthesis
// kernels. GCC vector extensions compile everywhere gcc/clang do; the lane
// structure and the reduction trees are fixed, so results are bit-stable
// across optimization levels and hosts.

namespace needlet::detail {

using v8 = double __attribute__((vector_size(64)));

inline v8 broadcast(double x) { return v8{x, x, x, x, x, x, x, x}; }

inline v8 load(const double* p) {
    v8 v;
    __builtin_memcpy(&v, p, sizeof(v));
    return v;
}

/// Fixed-tree sum of the eight lanes.
inline double hsum(const v8& v) {
    return ((v[0] + v[1]) + (v[2] + v[3])) + ((v[4] + v[5]) + (v[6] + v[7]));
}

/// Fixed-tree sum of eight vectors.
inline v8 tree_sum(const v8* q) {
    return ((q[0] + q[1]) + (q[2] + q[3])) + ((q[4] + q[5]) + (q[6] + q[7]));
}

}  // namespace needlet::detail
