#ifndef R1LAB_POISSON_HPP_
#define R1LAB_POISSON_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "r1lab/conjugator.hpp"
#include "r1lab/tower.hpp"

namespace r1lab {

// Exact value of the form  sum_i coeff_i * e^{-exponent_i}  with rational
// coefficients and nonnegative rational exponents. Terms with equal
// exponents merge; the value is zero iff no terms remain (e^{-s} for
// distinct rational s are linearly independent over Q).
class ExactProb {
 public:
  ExactProb() = default;
  static ExactProb zero() { return ExactProb(); }
  static ExactProb constant(const Rat& c);
  static ExactProb exp_term(const Rat& coeff, const Rat& exponent);

  void add_term(const Rat& coeff, const Rat& exponent);
  ExactProb operator+(const ExactProb& other) const;
  ExactProb operator-(const ExactProb& other) const;
  ExactProb operator*(const ExactProb& other) const;
  ExactProb scaled(const Rat& c) const;

  bool is_zero() const { return terms_.empty(); }
  bool operator==(const ExactProb& other) const {
    return terms_ == other.terms_;
  }

  // Sign of the exact value: -1, 0, +1 (interval refinement; exact zero is
  // decided symbolically).
  int sign() const;
  double to_double() const;

  const std::map<Rat, Rat>& terms() const { return terms_; }

 private:
  std::map<Rat, Rat> terms_;  // exponent -> coefficient
};

// Correctly rounded decimal rendering with `digits` digits after the point.
std::string to_float(const ExactProb& p, int digits);

// The Poisson configuration meets `set` in exactly `count` points;
// an event is the conjunction of its constraints.
struct CylinderConstraint {
  FloorSet set;
  int count = 0;
};

struct CylinderEvent {
  std::vector<CylinderConstraint> constraints;
};

inline constexpr int kDefaultCountCap = 4;

// Exact probability of the event under the Poisson measure: disjoint atoms
// of the constraint algebra carry independent Poisson counts with mean
// equal to the atom measure.
ExactProb cylinder_prob(const CylinderEvent& event, const TowerSchedule& s,
                        int count_cap = kDefaultCountCap);

// mu_o(S^p C(A,0)  intersect  T^q C(A,0)) = e^{-mu(S^p A  union  T^q A)}.
ExactProb suspension_correlation(const FloorSet& a, const Int& p_shift,
                                 const Int& q_shift,
                                 const ConjugationPlan& plan);

// mu_o(RD  intersect  T^{-n} R T^n D) for D = C(E,0) ^ C(RE,1), where
// conj_e / conj_re are the T^{-n} R T^n images of E / RE.
ExactProb nonrecurrence_prob(const FloorSet& e, const FloorSet& re,
                             const FloorSet& conj_e, const FloorSet& conj_re,
                             const TowerSchedule& s);

struct McResult {
  double estimate = 0.0;
  double stderr_est = 0.0;
  std::int64_t hits = 0;
  std::int64_t samples = 0;
};

// Monte-Carlo check: samples the Poisson process restricted to the union of
// the constraint sets. Fully deterministic for a given seed.
McResult mc_oracle(const CylinderEvent& event, const TowerSchedule& s,
                   std::int64_t samples, std::uint64_t seed);

}  // namespace r1lab

#endif  // R1LAB_POISSON_HPP_
