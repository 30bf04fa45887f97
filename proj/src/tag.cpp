#include "manivar/tag.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace manivar {

ManifoldTag ManifoldTag::euclidean(int m) {
  ManifoldTag t{Kind::Euclidean, m, {}};
  t.validate();
  return t;
}

ManifoldTag ManifoldTag::circle() { return {Kind::Circle, 1, {}}; }

ManifoldTag ManifoldTag::sphere2() { return {Kind::Sphere2, 1, {}}; }

ManifoldTag ManifoldTag::spd(int d) {
  ManifoldTag t{Kind::SPD, d, {}};
  t.validate();
  return t;
}

ManifoldTag ManifoldTag::rotations3() { return {Kind::Rotations3, 1, {}}; }

ManifoldTag ManifoldTag::product(std::vector<ManifoldTag> factors) {
  ManifoldTag t{Kind::Product, 1, std::move(factors)};
  t.validate();
  return t;
}

ManifoldTag ManifoldTag::power(ManifoldTag base, int n) {
  ManifoldTag t{Kind::Power, n, {std::move(base)}};
  t.validate();
  return t;
}

void ManifoldTag::validate() const {
  switch (kind) {
    case Kind::Euclidean:
      if (size < 1) throw std::invalid_argument("Euclidean dimension must be >= 1");
      break;
    case Kind::SPD:
      if (size != 2 && size != 3) throw std::invalid_argument("SPD dimension must be 2 or 3");
      break;
    case Kind::Product:
      if (children.empty()) throw std::invalid_argument("Product needs at least one factor");
      for (const auto& c : children) c.validate();
      break;
    case Kind::Power:
      if (children.size() != 1) throw std::invalid_argument("Power needs exactly one base");
      if (size < 1) throw std::invalid_argument("Power exponent must be >= 1");
      children.front().validate();
      break;
    default:
      break;
  }
}

std::string ManifoldTag::to_string() const {
  switch (kind) {
    case Kind::Euclidean:
      return "R(" + std::to_string(size) + ")";
    case Kind::Circle:
      return "S1";
    case Kind::Sphere2:
      return "S2";
    case Kind::SPD:
      return "SPD(" + std::to_string(size) + ")";
    case Kind::Rotations3:
      return "SO3";
    case Kind::Product: {
      std::string s = "Product(";
      for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) s += ",";
        s += children[i].to_string();
      }
      return s + ")";
    }
    case Kind::Power:
      return "Power(" + children.front().to_string() + "," + std::to_string(size) + ")";
  }
  return {};
}

namespace {

class TagParser {
 public:
  explicit TagParser(std::string_view text) : text_(text) {}

  ManifoldTag parse_all() {
    ManifoldTag t = parse_tag();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters");
    t.validate();
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("bad manifold tag '" + std::string(text_) + "': " + msg);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view identifier() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a manifold name");
    return text_.substr(start, pos_ - start);
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int integer() {
    skip_ws();
    int value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("expected an integer");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  ManifoldTag parse_tag() {
    std::string_view name = identifier();
    if (name == "S1") return ManifoldTag::circle();
    if (name == "S2") return ManifoldTag::sphere2();
    if (name == "SO3") return ManifoldTag::rotations3();
    if (name == "R") {
      expect('(');
      int m = integer();
      expect(')');
      return ManifoldTag{ManifoldTag::Kind::Euclidean, m, {}};
    }
    if (name == "SPD") {
      expect('(');
      int d = integer();
      expect(')');
      return ManifoldTag{ManifoldTag::Kind::SPD, d, {}};
    }
    if (name == "Product") {
      expect('(');
      std::vector<ManifoldTag> factors;
      factors.push_back(parse_tag());
      while (accept(',')) factors.push_back(parse_tag());
      expect(')');
      return ManifoldTag{ManifoldTag::Kind::Product, 1, std::move(factors)};
    }
    if (name == "Power") {
      expect('(');
      ManifoldTag base = parse_tag();
      expect(',');
      int n = integer();
      expect(')');
      return ManifoldTag{ManifoldTag::Kind::Power, n, {std::move(base)}};
    }
    fail("unknown manifold '" + std::string(name) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ManifoldTag ManifoldTag::parse(std::string_view text) { return TagParser(text).parse_all(); }

}  // namespace manivar
