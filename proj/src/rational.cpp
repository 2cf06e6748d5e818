#include "fmc/rational.hpp"

#include <cctype>

namespace fmc {

namespace {

bool valid_integer_token(std::string_view s) {
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// "12.345e-2" -> 12345 / 10^(3+2), sign handled separately.
Rat parse_decimal(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s[0] == '+' || s[0] == '-')) {
    negative = s[0] == '-';
    s.remove_prefix(1);
  }

  std::string digits;
  long frac_digits = 0;
  long exponent = 0;
  std::size_t i = 0;
  bool seen_digit = false, seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if ((c == 'e' || c == 'E') && seen_digit) {
      std::string_view exp = s.substr(i + 1);
      if (!valid_integer_token(exp))
        throw input_error("bad rational literal: '" + std::string(text) + "'");
      exponent = std::stol(std::string(exp));
      i = s.size();
      break;
    } else {
      throw input_error("bad rational literal: '" + std::string(text) + "'");
    }
  }
  if (!seen_digit)
    throw input_error("bad rational literal: '" + std::string(text) + "'");

  mpz_class num(digits.empty() ? std::string("0") : digits, 10);
  mpz_class den(1);
  long shift = exponent - frac_digits;
  mpz_class pow10;
  mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  if (shift >= 0)
    num *= pow10;
  else
    den = pow10;
  Rat r(num, den);
  r.canonicalize();
  if (negative) r = -r;
  return r;
}

}  // namespace

Rat rat_from_string(std::string_view text) {
  if (text.empty()) throw input_error("empty rational literal");
  auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    std::string_view n = text.substr(0, slash);
    std::string_view d = text.substr(slash + 1);
    if (!valid_integer_token(n) || !valid_integer_token(d))
      throw input_error("bad rational literal: '" + std::string(text) + "'");
    Rat r(std::string(text), 10);
    if (r.get_den() == 0)
      throw input_error("zero denominator in '" + std::string(text) + "'");
    r.canonicalize();
    return r;
  }
  if (valid_integer_token(text)) {
    Rat r(std::string(text), 10);
    r.canonicalize();
    return r;
  }
  return parse_decimal(text);
}

std::string rat_to_string(const Rat& r) { return r.get_str(); }

Rat rat_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) {
    Rat r(nlohmann::to_string(j), 10);
    r.canonicalize();
    return r;
  }
  if (j.is_number_float()) {
    // Round-trip through the shortest decimal rendering so that a literal
    // like 0.1 in an input file means exactly 1/10.
    return rat_from_string(j.dump());
  }
  if (j.is_string()) return rat_from_string(j.get<std::string>());
  throw input_error("expected a rational (number or string), got " + j.dump());
}

nlohmann::json rat_to_json(const Rat& r) {
  if (r.get_den() == 1 && r.get_num().fits_slong_p())
    return nlohmann::json(r.get_num().get_si());
  return nlohmann::json(rat_to_string(r));
}

}  // namespace fmc
