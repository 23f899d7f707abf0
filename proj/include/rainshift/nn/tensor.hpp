#pragma once

#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

namespace rainshift::nn {

// Fixed 64-byte alignment for every tensor buffer. Eigen kernels pick
// alignment-dependent code paths; pinning the alignment keeps float rounding
// identical across runs, which the reproducibility contract depends on.
template <typename T, size_t Align>
struct AlignedAllocator {
    using value_type = T;
    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U, Align>&) {}
    template <class U>
    struct rebind {
        using other = AlignedAllocator<U, Align>;
    };

    T* allocate(size_t n) {
        const size_t bytes = ((n * sizeof(T) + Align - 1) / Align) * Align;
        void* p = std::aligned_alloc(Align, bytes);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, size_t) { std::free(p); }

    bool operator==(const AlignedAllocator&) const { return true; }
    bool operator!=(const AlignedAllocator&) const { return false; }
};

using AlignedVec = std::vector<float, AlignedAllocator<float, 64>>;

// Channels-first float tensor. Vectors are stored as (c, 1, 1).
struct Tensor {
    int c = 0, h = 0, w = 0;
    AlignedVec data;

    Tensor() = default;
    Tensor(int c_, int h_, int w_, float fill = 0.f)
        : c(c_), h(h_), w(w_), data(static_cast<size_t>(c_) * h_ * w_, fill) {}

    static Tensor vec(int n, float fill = 0.f) { return Tensor(n, 1, 1, fill); }

    float& at(int ch, int y, int x) { return data[(static_cast<size_t>(ch) * h + y) * w + x]; }
    float at(int ch, int y, int x) const { return data[(static_cast<size_t>(ch) * h + y) * w + x]; }
    float& operator[](size_t i) { return data[i]; }
    float operator[](size_t i) const { return data[i]; }

    size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
    void zero() { std::fill(data.begin(), data.end(), 0.f); }
};

inline void add_inplace(Tensor& a, const Tensor& b) {
    for (size_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

inline void axpy(Tensor& a, float alpha, const Tensor& b) {
    for (size_t i = 0; i < a.size(); ++i) a.data[i] += alpha * b.data[i];
}

inline void scale_inplace(Tensor& a, float s) {
    for (float& v : a.data) v *= s;
}

inline bool all_finite(const Tensor& a) {
    for (float v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

// Learnable parameter and its gradient accumulator.
struct Param {
    Tensor value;
    Tensor grad;

    explicit Param(Tensor init) : value(std::move(init)) {
        grad = Tensor(value.c, value.h, value.w);
    }
    void zero_grad() { grad.zero(); }
};

}  // namespace rainshift::nn
