#pragma once

#include <string>
#include <vector>

namespace pieces {

// Repulsive pair potential: nonnegative, even, bounded, zero beyond `range`.
class Potential {
  public:
    enum class Kind { step, table };

    static Potential step(double magnitude, double range);
    // xs must start at 0 and increase; values are U(|x|), linearly
    // interpolated, zero beyond xs.back().
    static Potential table(std::vector<double> xs, std::vector<double> values);

    double operator()(double x) const;
    bool is_zero() const { return max_value_ == 0.0; }
    double range() const { return range_; }
    double magnitude() const { return max_value_; }
    Kind kind() const { return kind_; }
    // breakpoints of the interpolant (empty for step potentials)
    const std::vector<double>& table_nodes() const { return xs_; }
    std::string describe() const;

  private:
    Potential() = default;
    Kind kind_ = Kind::step;
    double range_ = 0.0;
    double max_value_ = 0.0;
    std::vector<double> xs_, vals_;
};

Potential parse_potential(const std::string& spec);

}  // namespace pieces
