#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace efelab {

class error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class dimension_mismatch : public error {
  public:
    dimension_mismatch(std::string const& what, std::size_t expected, std::size_t got)
        : error(what + ": expected size " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
    using error::error;
};

/// Raised when p_i > 0 but q_i == 0 in a divergence KL[p || q].
class absolute_continuity_violation : public error {
  public:
    explicit absolute_continuity_violation(std::size_t index)
        : error("absolute continuity violated at index " + std::to_string(index)),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

class non_finite_input : public error {
  public:
    using error::error;
};

class invalid_distribution : public error {
  public:
    using error::error;
};

class index_out_of_range : public error {
  public:
    index_out_of_range(std::string const& what, std::size_t index, std::size_t bound)
        : error(what + ": index " + std::to_string(index) + " out of range [0, " +
                std::to_string(bound) + ")") {}
};

class impossible_observation : public error {
  public:
    explicit impossible_observation(std::size_t obs)
        : error("observation " + std::to_string(obs) + " has zero probability under the prior"),
          obs_(obs) {}
    std::size_t observation() const noexcept { return obs_; }

  private:
    std::size_t obs_;
};

class parse_error : public error {
  public:
    parse_error(std::string const& field, std::string const& detail)
        : error("parse error in field '" + field + "': " + detail), field_(field) {}
    std::string const& field() const noexcept { return field_; }

  private:
    std::string field_;
};

class policy_space_too_large : public error {
  public:
    explicit policy_space_too_large(unsigned long long size)
        : error("policy space too large: " + std::to_string(size) + " policies"), size_(size) {}
    unsigned long long size() const noexcept { return size_; }

  private:
    unsigned long long size_;
};

class trajectory_space_too_large : public error {
  public:
    explicit trajectory_space_too_large(unsigned long long size)
        : error("trajectory space too large: " + std::to_string(size) + " sequences"),
          size_(size) {}
    unsigned long long size() const noexcept { return size_; }

  private:
    unsigned long long size_;
};

class mixed_functionals : public error {
  public:
    mixed_functionals() : error("policy evaluations use different functionals") {}
};

}  // namespace efelab
