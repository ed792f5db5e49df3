#pragma once

#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tbspam::metrics {

/// Nonnegative ETH amount held exactly as an integer number of wei.
class EthAmount {
 public:
  __extension__ typedef unsigned __int128 Wei;
  static constexpr int kDecimals = 18;

  constexpr EthAmount() = default;
  static constexpr EthAmount from_wei(Wei wei) { return EthAmount(wei); }

  /// Parses a plain decimal string ("0.25", "3", "1.000000000000000001").
  /// Throws std::invalid_argument on signs, exponents, more than 18
  /// fractional digits, or overflow.
  static EthAmount parse(std::string_view text);

  constexpr Wei wei() const { return wei_; }

  /// Shortest exact decimal form: no trailing fractional zeros, "0" for zero.
  std::string to_string() const;

  EthAmount& operator+=(EthAmount other);
  friend EthAmount operator+(EthAmount a, EthAmount b) { return a += b; }
  friend constexpr auto operator<=>(EthAmount, EthAmount) = default;

 private:
  constexpr explicit EthAmount(Wei wei) : wei_(wei) {}
  Wei wei_ = 0;
};

}  // namespace tbspam::metrics
