#include "tbspam/eth_amount.hpp"

#include <algorithm>
#include <limits>

namespace tbspam::metrics {

namespace {

constexpr EthAmount::Wei kMax = std::numeric_limits<EthAmount::Wei>::max();

bool mul_add(EthAmount::Wei& acc, unsigned digit) {
  if (acc > (kMax - digit) / 10) return false;
  acc = acc * 10 + digit;
  return true;
}

}  // namespace

EthAmount EthAmount::parse(std::string_view text) {
  const auto fail = [&](const char* why) {
    return std::invalid_argument("invalid ETH amount '" + std::string(text) + "': " + why);
  };
  if (text.empty()) throw fail("empty");
  const auto dot = text.find('.');
  const auto whole = text.substr(0, dot);
  const auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw fail("no digits");
  if (dot != std::string_view::npos && frac.empty()) throw fail("trailing decimal point");
  if (frac.size() > kDecimals) throw fail("more than 18 fractional digits");

  Wei wei = 0;
  for (std::string_view part : {whole, frac}) {
    for (char ch : part) {
      if (ch < '0' || ch > '9') throw fail("not a plain decimal");
      if (!mul_add(wei, static_cast<unsigned>(ch - '0'))) throw fail("overflow");
    }
  }
  for (std::size_t i = frac.size(); i < kDecimals; ++i) {
    if (!mul_add(wei, 0)) throw fail("overflow");
  }
  return EthAmount(wei);
}

std::string EthAmount::to_string() const {
  std::string digits;
  Wei rest = wei_;
  do {
    digits.push_back(static_cast<char>('0' + static_cast<unsigned>(rest % 10)));
    rest /= 10;
  } while (rest != 0);
  while (digits.size() <= kDecimals) digits.push_back('0');
  std::reverse(digits.begin(), digits.end());

  std::string out = digits.substr(0, digits.size() - kDecimals);
  std::string frac = digits.substr(digits.size() - kDecimals);
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  if (!frac.empty()) out += "." + frac;
  return out;
}

EthAmount& EthAmount::operator+=(EthAmount other) {
  if (wei_ > kMax - other.wei_) throw std::overflow_error("ETH amount overflow");
  wei_ += other.wei_;
  return *this;
}

}  // namespace tbspam::metrics
