#ifndef R1LAB_SEQUENCES_HPP_
#define R1LAB_SEQUENCES_HPP_

#include <optional>
#include <string>
#include <vector>

#include "r1lab/bigmath.hpp"

namespace r1lab {

// Integer-valued polynomial with rational coefficients, ascending powers.
// Coefficients may be rational (e.g. n(n+1)/2) as long as every value at
// integer arguments is an integer; eval_int checks that.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rat> coeffs);

  static Polynomial from_int_coeffs(const std::vector<long>& coeffs);

  int degree() const;
  const Rat& leading() const;
  const std::vector<Rat>& coeffs() const { return coeffs_; }

  Rat eval(const Rat& x) const;
  Int eval_int(const Int& n) const;  // throws if value not an integer

  // f(x+1) - f(x)
  Polynomial forward_difference() const;
  Polynomial shifted(long c) const;  // f(x + c)
  Polynomial operator-(const Polynomial& other) const;
  Polynomial operator+(const Polynomial& other) const;
  Polynomial with_constant_added(const Rat& c) const;

  bool all_coeffs_nonneg() const;
  // True when the forward difference has nonnegative coefficients, i.e.
  // the polynomial is nondecreasing over nonnegative arguments.
  bool nondecreasing_on_nonneg() const;

  std::string text() const;

 private:
  std::vector<Rat> coeffs_;  // ascending, normalized (no trailing zeros)
};

// The pair (p, q) driving the construction.
struct SequencePair {
  Polynomial p;
  Polynomial q;
  std::string p_name;
  std::string q_name;

  Int p_at(const Int& n) const { return p.eval_int(n); }
  Int q_at(const Int& n) const { return q.eval_int(n); }

  // Largest n >= 1 with f(n) < bound, or nullopt when already f(1) >= bound.
  // Requires f increasing on n >= 1 (validated by gap_condition_check).
  std::optional<Int> max_n_below(bool use_q, const Int& bound) const;
  // Smallest n >= 1 with f(n) > bound (f increasing, unbounded).
  Int min_n_above(bool use_q, const Int& bound) const;
};

SequencePair make_squares_cubes();        // p = n^2, q = n^3
SequencePair make_squares_plus_linear();  // p = n^2, q = n^2 + n
SequencePair make_pair(Polynomial p, Polynomial q, std::string p_name,
                       std::string q_name);

struct GapReport {
  bool p_symbolic_pass = false;
  bool q_symbolic_pass = false;
  bool p_probe_pass = false;
  bool q_probe_pass = false;
  Int p_min_tail_gap;  // min difference over the tail half of the probe
  Int q_min_tail_gap;
  bool pass() const {
    return (p_symbolic_pass || p_probe_pass) &&
           (q_symbolic_pass || q_probe_pass);
  }
};

// Symbolic verdict for polynomials (degree >= 2, positive leading), plus an
// empirical probe of increments. Throws Degenerate when a sequence fails to
// increase over the probe range.
GapReport gap_condition_check(const SequencePair& seq, long probe_max);

}  // namespace r1lab

#endif  // R1LAB_SEQUENCES_HPP_
