#pragma once

// Deterministic compensated accumulation. Everything that sums more than a
// handful of terms goes through here in ascending index order.

#include <cstddef>
#include <span>
#include <vector>

#include "scalar.hpp"

namespace hardy {

/// Neumaier (improved Kahan-Babuska) summation for a real type.
template <class R>
class NeumaierSum {
public:
    void add(const R& x) {
        R t = sum_ + x;
        using std::abs;
        if (abs(sum_) >= abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    R value() const { return sum_ + comp_; }

private:
    R sum_{0};
    R comp_{0};
};

/// Accumulator selecting compensated summation for floating types
/// (componentwise for complex) and plain summation for exact ones.
template <class T, class Enable = void>
class Accumulator {
public:
    void add(const T& x) { sum_ = sum_ + x; }
    T value() const { return sum_; }

private:
    T sum_{0};
};

template <class T>
class Accumulator<T, std::enable_if_t<is_floating_v<T> && !is_complex_v<T>>> {
public:
    void add(const T& x) { s_.add(x); }
    T value() const { return s_.value(); }

private:
    NeumaierSum<T> s_;
};

template <class T>
class Accumulator<T, std::enable_if_t<is_floating_v<T> && is_complex_v<T>>> {
public:
    void add(const T& x) {
        re_.add(real_part(x));
        im_.add(imag_part(x));
    }
    T value() const { return make_complex<T>(re_.value(), im_.value()); }

private:
    NeumaierSum<real_of_t<T>> re_;
    NeumaierSum<real_of_t<T>> im_;
};

template <class T>
T compensated_sum(std::span<const T> xs) {
    Accumulator<T> acc;
    for (const auto& x : xs) acc.add(x);
    return acc.value();
}

/// Running prefix sums: out[n] = xs[0] + ... + xs[n], compensated.
template <class T>
std::vector<T> prefix_sums(std::span<const T> xs) {
    std::vector<T> out;
    out.reserve(xs.size());
    if constexpr (is_floating_v<T> && !is_complex_v<T>) {
        NeumaierSum<T> acc;
        for (const auto& x : xs) {
            acc.add(x);
            out.push_back(acc.value());
        }
    } else {
        Accumulator<T> acc;
        for (const auto& x : xs) {
            acc.add(x);
            out.push_back(acc.value());
        }
    }
    return out;
}

}  // namespace hardy
