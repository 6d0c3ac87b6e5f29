#ifndef R1LAB_BIGMATH_HPP_
#define R1LAB_BIGMATH_HPP_

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace r1lab {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int& num, const Int& den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Int& v) { return v.get_str(); }

inline std::string to_string(const Rat& v) {
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

inline Int int_from_string(const std::string& s) { return Int(s); }

inline bool fits_i64(const Int& v) {
  return v.fits_slong_p() || (sizeof(long) == 8 && v.fits_slong_p());
}

inline std::int64_t to_i64(const Int& v) { return v.get_si(); }

}  // namespace r1lab

#endif  // R1LAB_BIGMATH_HPP_
