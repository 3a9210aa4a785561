#pragma once

// Exact finite-dimensional probability kernel. Everything here is a value
// type; validated types check their invariants once, at construction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "efelab/errors.hpp"

namespace efelab {

/// Tolerance used by every normalization invariant.
inline constexpr double kSumTolerance = 1e-9;

/// Probabilities below this floor are clamped before a logarithm is taken.
inline constexpr double kLogFloor = 1e-12;

/// Dense row-major table with no probabilistic invariants.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
        : rows_(rows), cols_(cols), data_(std::move(row_major)) {
        if (data_.size() != rows_ * cols_)
            throw dimension_mismatch("matrix data", rows_ * cols_, data_.size());
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double const> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double column_sum(std::size_t c) const noexcept {
        double s = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, c);
        return s;
    }

    bool operator==(Matrix const&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Normalized probability vector over a finite index set.
class Categorical {
  public:
    /// Validates: nonempty, finite, nonnegative, sums to 1 within kSumTolerance.
    explicit Categorical(std::vector<double> probs) : probs_(std::move(probs)) {
        if (probs_.empty()) throw invalid_distribution("categorical with empty support");
        double total = 0.0;
        for (std::size_t i = 0; i < probs_.size(); ++i) {
            double const p = probs_[i];
            if (!std::isfinite(p))
                throw non_finite_input("categorical entry " + std::to_string(i) + " is not finite");
            if (p < 0.0)
                throw invalid_distribution("categorical entry " + std::to_string(i) +
                                           " is negative");
            total += p;
        }
        if (std::abs(total - 1.0) > kSumTolerance)
            throw invalid_distribution("categorical sums to " + std::to_string(total));
    }

    /// Rescales nonnegative weights to unit mass.
    static Categorical normalized(std::vector<double> weights) {
        double const total = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (!(total > 0.0) || !std::isfinite(total))
            throw invalid_distribution("cannot normalize weights with total " +
                                       std::to_string(total));
        for (double& w : weights) w /= total;
        return Categorical(std::move(weights));
    }

    static Categorical uniform(std::size_t n) {
        if (n == 0) throw invalid_distribution("categorical with empty support");
        return Categorical(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static Categorical delta(std::size_t n, std::size_t at) {
        if (at >= n) throw index_out_of_range("delta", at, n);
        std::vector<double> p(n, 0.0);
        p[at] = 1.0;
        return Categorical(std::move(p));
    }

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const noexcept { return probs_[i]; }
    std::vector<double> const& probs() const noexcept { return probs_; }
    auto begin() const noexcept { return probs_.begin(); }
    auto end() const noexcept { return probs_.end(); }

    std::size_t argmax() const noexcept {
        return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) -
                                        probs_.begin());
    }

    bool operator==(Categorical const&) const = default;

  private:
    std::vector<double> probs_;
};

/// Column-stochastic table: column j is the distribution of the row variable
/// given conditioning index j.
class StochasticMatrix {
  public:
    explicit StochasticMatrix(Matrix m) : m_(std::move(m)) {
        if (m_.rows() == 0 || m_.cols() == 0)
            throw invalid_distribution("stochastic matrix with empty dimension");
        for (std::size_t c = 0; c < m_.cols(); ++c) {
            for (std::size_t r = 0; r < m_.rows(); ++r) {
                double const v = m_(r, c);
                if (!std::isfinite(v))
                    throw non_finite_input("stochastic matrix entry (" + std::to_string(r) + "," +
                                           std::to_string(c) + ") is not finite");
                if (v < 0.0)
                    throw invalid_distribution("stochastic matrix entry (" + std::to_string(r) +
                                               "," + std::to_string(c) + ") is negative");
            }
            double const s = m_.column_sum(c);
            if (std::abs(s - 1.0) > kSumTolerance)
                throw invalid_distribution("stochastic matrix column " + std::to_string(c) +
                                           " sums to " + std::to_string(s));
        }
    }

    /// Builds a matrix whose columns are the given distributions.
    static StochasticMatrix from_columns(std::vector<Categorical> const& columns) {
        if (columns.empty()) throw invalid_distribution("stochastic matrix with no columns");
        std::size_t const rows = columns.front().size();
        Matrix m(rows, columns.size());
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c].size() != rows)
                throw dimension_mismatch("stochastic matrix column", rows, columns[c].size());
            for (std::size_t r = 0; r < rows; ++r) m(r, c) = columns[c][r];
        }
        return StochasticMatrix(std::move(m));
    }

    static StochasticMatrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return StochasticMatrix(std::move(m));
    }

    std::size_t rows() const noexcept { return m_.rows(); }
    std::size_t cols() const noexcept { return m_.cols(); }
    double operator()(std::size_t r, std::size_t c) const noexcept { return m_(r, c); }
    Matrix const& matrix() const noexcept { return m_; }

    Categorical column(std::size_t c) const {
        if (c >= cols()) throw index_out_of_range("stochastic matrix column", c, cols());
        std::vector<double> p(rows());
        for (std::size_t r = 0; r < rows(); ++r) p[r] = m_(r, c);
        return Categorical(std::move(p));
    }

    /// Pushes a distribution over the conditioning index through the table.
    Categorical apply(Categorical const& x) const {
        if (x.size() != cols()) throw dimension_mismatch("stochastic matrix apply", cols(), x.size());
        std::vector<double> out(rows(), 0.0);
        for (std::size_t c = 0; c < cols(); ++c) {
            double const w = x[c];
            if (w == 0.0) continue;
            for (std::size_t r = 0; r < rows(); ++r) out[r] += m_(r, c) * w;
        }
        return Categorical(std::move(out));
    }

    bool operator==(StochasticMatrix const&) const = default;

  private:
    Matrix m_;
};

/// Joint distribution over (row variable, column variable); in this library
/// rows are observations and columns are states.
class Joint2 {
  public:
    explicit Joint2(Matrix m) : m_(std::move(m)) {
        if (m_.rows() == 0 || m_.cols() == 0) throw invalid_distribution("joint with empty axis");
        double total = 0.0;
        for (double v : m_.data()) {
            if (!std::isfinite(v)) throw non_finite_input("joint entry is not finite");
            if (v < 0.0) throw invalid_distribution("joint entry is negative");
            total += v;
        }
        if (std::abs(total - 1.0) > kSumTolerance)
            throw invalid_distribution("joint mass is " + std::to_string(total));
    }

    /// joint(r, c) = conditional(r | c) * marginal(c)
    static Joint2 compose(StochasticMatrix const& row_given_col, Categorical const& col_marginal) {
        if (row_given_col.cols() != col_marginal.size())
            throw dimension_mismatch("joint compose", row_given_col.cols(), col_marginal.size());
        Matrix m(row_given_col.rows(), row_given_col.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = row_given_col(r, c) * col_marginal[c];
        return Joint2(std::move(m));
    }

    /// joint(r, c) = conditional(c | r) * marginal(r)
    static Joint2 compose_transposed(StochasticMatrix const& col_given_row,
                                     Categorical const& row_marginal) {
        if (col_given_row.cols() != row_marginal.size())
            throw dimension_mismatch("joint compose", col_given_row.cols(), row_marginal.size());
        Matrix m(col_given_row.cols(), col_given_row.rows());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = col_given_row(c, r) * row_marginal[r];
        return Joint2(std::move(m));
    }

    std::size_t rows() const noexcept { return m_.rows(); }
    std::size_t cols() const noexcept { return m_.cols(); }
    double operator()(std::size_t r, std::size_t c) const noexcept { return m_(r, c); }
    Matrix const& matrix() const noexcept { return m_; }

    bool operator==(Joint2 const&) const = default;

  private:
    Matrix m_;
};

/// Both factorizations of a Joint2. Conditionals of zero-mass conditioning
/// indices are uniform and listed in the *_zero_mass vectors.
struct Factorization {
    Categorical row_marginal;
    Categorical col_marginal;
    StochasticMatrix row_given_col;  // rows x cols, column c = p(row | c)
    StochasticMatrix col_given_row;  // cols x rows, column r = p(col | r)
    std::vector<std::size_t> zero_mass_rows;
    std::vector<std::size_t> zero_mass_cols;
};

inline Factorization factorize(Joint2 const& j) {
    std::size_t const R = j.rows();
    std::size_t const C = j.cols();
    std::vector<double> row_mass(R, 0.0), col_mass(C, 0.0);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c) {
            row_mass[r] += j(r, c);
            col_mass[c] += j(r, c);
        }

    std::vector<std::size_t> zero_rows, zero_cols;
    Matrix rgc(R, C), cgr(C, R);
    for (std::size_t c = 0; c < C; ++c) {
        if (col_mass[c] > 0.0) {
            for (std::size_t r = 0; r < R; ++r) rgc(r, c) = j(r, c) / col_mass[c];
        } else {
            zero_cols.push_back(c);
            for (std::size_t r = 0; r < R; ++r) rgc(r, c) = 1.0 / static_cast<double>(R);
        }
    }
    for (std::size_t r = 0; r < R; ++r) {
        if (row_mass[r] > 0.0) {
            for (std::size_t c = 0; c < C; ++c) cgr(c, r) = j(r, c) / row_mass[r];
        } else {
            zero_rows.push_back(r);
            for (std::size_t c = 0; c < C; ++c) cgr(c, r) = 1.0 / static_cast<double>(C);
        }
    }
    return Factorization{Categorical(std::move(row_mass)), Categorical(std::move(col_mass)),
                         StochasticMatrix(std::move(rgc)), StochasticMatrix(std::move(cgr)),
                         std::move(zero_rows), std::move(zero_cols)};
}

/// KL[p || q] with 0 ln 0 = 0. Throws when p has mass where q has none.
inline double kl_divergence(Categorical const& p, Categorical const& q) {
    if (p.size() != q.size()) throw dimension_mismatch("kl_divergence", p.size(), q.size());
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) throw absolute_continuity_violation(i);
        kl += p[i] * std::log(p[i] / q[i]);
    }
    return kl;
}

inline double entropy(Categorical const& p) {
    double h = 0.0;
    for (double v : p)
        if (v > 0.0) h -= v * std::log(v);
    return h;
}

/// Output_i proportional to exp(precision * values_i).
inline Categorical softmax(std::span<double const> values, double precision = 1.0) {
    if (values.empty()) throw invalid_distribution("softmax of empty vector");
    if (!std::isfinite(precision) || !(precision > 0.0))
        throw non_finite_input("softmax precision must be finite and positive");
    for (double v : values)
        if (!std::isfinite(v)) throw non_finite_input("softmax input is not finite");
    double const top = *std::max_element(values.begin(), values.end());
    std::vector<double> out(values.size());
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = std::exp(precision * (values[i] - top));
        total += out[i];
    }
    for (double& v : out) v /= total;
    return Categorical(std::move(out));
}

/// Logarithm that floors its argument at kLogFloor and remembers whether it
/// ever had to.
class ClampedLog {
  public:
    double operator()(double p) noexcept {
        if (p < kLogFloor) {
            clamped_ = true;
            return std::log(kLogFloor);
        }
        return std::log(p);
    }
    bool clamped() const noexcept { return clamped_; }

  private:
    bool clamped_ = false;
};

}  // namespace efelab
