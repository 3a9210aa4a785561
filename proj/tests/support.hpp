#pragma once

// Seeded generators shared by the property tests.

#include <cstdint>
#include <vector>

#include "efelab/probability.hpp"
#include "efelab/random.hpp"

namespace efelab::test {

inline Categorical random_categorical(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    for (double& v : w) v = rng.exponential();
    return Categorical::normalized(std::move(w));
}

/// Random categorical with a few exact zeros.
inline Categorical sparse_categorical(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    for (double& v : w) v = rng.uniform_open() < 0.3 ? 0.0 : rng.exponential();
    w[static_cast<std::size_t>(rng.uniform_open() * static_cast<double>(n))] = 1.0;
    return Categorical::normalized(std::move(w));
}

inline Joint2 random_joint(Rng& rng, std::size_t rows, std::size_t cols) {
    auto c = random_categorical(rng, rows * cols);
    return Joint2(Matrix(rows, cols, c.probs()));
}

inline StochasticMatrix random_stochastic(Rng& rng, std::size_t rows, std::size_t cols) {
    std::vector<Categorical> columns;
    for (std::size_t c = 0; c < cols; ++c) columns.push_back(random_categorical(rng, rows));
    return StochasticMatrix::from_columns(columns);
}

}  // namespace efelab::test
