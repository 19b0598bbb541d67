#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace elrp {

/// Fixed-point currency amount with 10^-6 resolution.
///
/// Every cost that enters a route or a station is rounded once to micro-units
/// and then summed exactly, so two code paths that price the same route agree
/// bit for bit.
class Money {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) {
    Money m;
    m.micros_ = micros;
    return m;
  }
  static Money from_double(double value) {
    return from_micros(static_cast<std::int64_t>(std::llround(value * static_cast<double>(kScale))));
  }

  [[nodiscard]] constexpr std::int64_t micros() const { return micros_; }
  [[nodiscard]] constexpr double value() const {
    return static_cast<double>(micros_) / static_cast<double>(kScale);
  }

  constexpr Money& operator+=(Money o) {
    micros_ += o.micros_;
    return *this;
  }
  constexpr Money& operator-=(Money o) {
    micros_ -= o.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return a += b; }
  friend constexpr Money operator-(Money a, Money b) { return a -= b; }
  friend constexpr Money operator-(Money a) { return from_micros(-a.micros_); }
  friend constexpr Money operator*(Money a, std::int64_t k) { return from_micros(a.micros_ * k); }
  friend constexpr Money operator*(std::int64_t k, Money a) { return a * k; }

  friend constexpr auto operator<=>(Money, Money) = default;
  friend constexpr bool operator==(Money, Money) = default;

  /// Decimal rendering with exactly six fractional digits.
  [[nodiscard]] std::string to_string() const;

 private:
  std::int64_t micros_ = 0;
};

}  // namespace elrp
